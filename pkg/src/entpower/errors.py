"""Exception types raised by entpower."""


class EntPowerError(ValueError):
    """Base class for all validation errors in this package."""


class NonHermitianInput(EntPowerError):
    pass


class NonUnitary(EntPowerError):
    pass


class InvalidDensityMatrix(EntPowerError):
    pass


class GammaOutOfRange(EntPowerError):
    pass


class PurityOutOfRange(EntPowerError):
    pass


class UnreachablePurity(PurityOutOfRange):
    pass


class ConfigInvalid(EntPowerError):
    pass
