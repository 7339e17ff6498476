"""Exception hierarchy shared by all modules."""


class DCosetError(Exception):
    """Base class for every error raised by the package."""


class NumericError(DCosetError):
    """A numerical precondition failed (singular matrix, non-PD factor...)."""


class NotPositiveDefinite(NumericError):
    pass


class Singular(NumericError):
    pass


class NotInAlgebra(NumericError):
    pass


class BasisMismatch(DCosetError):
    pass


class InvalidSetup(DCosetError):
    """Raised by ``validate_setup`` wrapping the first hard failure."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MembershipViolation(DCosetError):
    pass


class NotInH(MembershipViolation):
    pass


class NoDescent(NumericError):
    """Backtracking underflowed before the flow made any progress."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class Inconclusive(NumericError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NotClosed(DCosetError):
    """Weyl group closure exceeded ``max_order``."""


class NotNormalizing(DCosetError):
    pass


class NotStandard(DCosetError):
    pass


class ConfigError(DCosetError):
    pass


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass
