# Synthetic environments and subscriber data for tests and demos
