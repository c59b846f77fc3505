"""Exception types raised across the package."""


class SparseDynError(Exception):
    """Base class for all package errors."""


class NonFiniteField(SparseDynError, FloatingPointError):
    """A field or modal amplitude became NaN/inf during time stepping."""


class EigenFailure(SparseDynError):
    pass


class DegenerateData(SparseDynError, ValueError):
    """Snapshot data has no energy (all singular values vanish)."""


class DimensionMismatch(SparseDynError, ValueError):
    pass


class DuplicateRegime(SparseDynError, ValueError):
    pass


class OutOfRange(SparseDynError, IndexError):
    pass


class FormatError(SparseDynError, ValueError):
    """Library file is truncated, corrupt, or of an unknown version."""


class DuplicateSensor(SparseDynError, ValueError):
    pass


class OutOfDomain(SparseDynError, ValueError):
    pass


class AllZero(SparseDynError, ValueError):
    """Every sparse coefficient is zero, so no regime can be chosen."""


class ConfigError(SparseDynError, ValueError):
    pass
