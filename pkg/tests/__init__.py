# Auxiliar module
