"""Exception hierarchy shared by the library and the command line."""


class OtIdentError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InvalidArgument(OtIdentError, ValueError):
    exit_code = 2


class InvalidDistribution(InvalidArgument):
    pass


class ParseError(InvalidArgument):
    """Malformed model or instance file; message carries the field path."""


class Infeasible(OtIdentError):
    exit_code = 4


class Unbounded(OtIdentError):
    exit_code = 4


class TooLarge(OtIdentError):
    exit_code = 2


class DegenerateModel(OtIdentError):
    exit_code = 4


class DegenerateClass(DegenerateModel):
    """A protected class has zero probability."""


class DegenerateDenominator(DegenerateModel):
    """A ratio in the TPRD map has a vanishing denominator."""


class SingularMoment(DegenerateModel):
    """The second-moment matrix fails the condition-number guard."""


class EmptySet(DegenerateModel):
    """No candidate survived halfspace filtering."""


class VerificationFailure(OtIdentError):
    exit_code = 3

    def __init__(self, message, instance=None):
        super().__init__(message)
        self.instance = instance
