"""Exception hierarchy. Every error the CLI maps to exit code 2 derives from CubicLabError."""


class CubicLabError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(CubicLabError, ValueError):
    pass


class ConfigurationError(CubicLabError, ValueError):
    pass


class ValidationError(CubicLabError, ValueError):
    pass


class DivergenceError(CubicLabError, ArithmeticError):
    """A control series has ratio certificate >= 1."""


class UndefinedBoundError(CubicLabError, ArithmeticError):
    """Closed-form bound requested at the excluded exponent r = 3."""


class NoContractionError(CubicLabError, ArithmeticError):
    pass


class ScaleLimitError(CubicLabError, OverflowError):
    """Dyadic rescaling left the [1e-100, 1e100] norm window."""


class CertificateViolationError(CubicLabError, AssertionError):
    pass


class HypothesisFailure(CubicLabError):
    """The measured control level is infinite: the stability hypotheses fail on the probes."""
