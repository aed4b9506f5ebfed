"""Exception hierarchy. The CLI maps these onto exit codes."""


class KinemetricaError(Exception):
    """Base class for all package errors."""


class UsageError(KinemetricaError, ValueError):
    """Bad arguments: dimension mismatch, nonpositive lengths, out-of-range parameters."""


class CapabilityError(KinemetricaError, NotImplementedError):
    """Operation not supported for this shape or curve kind."""


class RegimeViolation(KinemetricaError):
    """Inputs violate the curvature-radius hypotheses a formula or estimator relies on."""


class ConfigurationError(KinemetricaError):
    """Degenerate experiment setup (e.g. nothing ever hits the window) or invalid config."""


class DegenerateEstimate(KinemetricaError):
    """Estimator has no accepted denominator mass to divide by."""
