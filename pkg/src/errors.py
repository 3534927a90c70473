"""
Exception hierarchy for the simulator.

Outcomes that are part of normal operation (undecryptable headers, incomplete
reassembly, dropped fragments, failed runs) are returned as values instead.
"""


class PuppeteerError(Exception):
    """Base class for all simulator errors"""


class ScenarioError(PuppeteerError):
    """A scenario file or environment could not be loaded or is invalid"""


class MissingKey(PuppeteerError):
    def __init__(self, key_id):
        self.key_id = key_id
        super().__init__(f"keyring holds no key for key_id {key_id}")


class FieldOutOfRange(PuppeteerError):
    def __init__(self, field, value):
        self.field = field
        self.value = value
        super().__init__(f"header field '{field}' out of range: {value!r}")


class CapacityTooSmall(PuppeteerError):
    def __init__(self, capacity, minimum):
        self.capacity = capacity
        self.minimum = minimum
        super().__init__(f"message capacity {capacity} bit is below the minimum of {minimum} bit")


class ConflictingTotals(PuppeteerError):
    def __init__(self, totals):
        self.totals = tuple(sorted(totals))
        super().__init__(f"fragments disagree on total_fragments: {self.totals}")


class NoPath(PuppeteerError):
    """Routing was asked to choose among zero candidate paths"""


class TargetUnknown(PuppeteerError):
    def __init__(self, supi):
        self.supi = supi
        super().__init__(f"subscriber key store has no entry for SUPI {supi:#018x}")
