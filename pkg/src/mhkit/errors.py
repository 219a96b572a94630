"""Exception hierarchy shared by all modules."""


class MHError(Exception):
    """Base class for every error raised by mhkit."""


class ConfigurationError(MHError, ValueError):
    """Invalid construction parameters or configuration values."""


class InvalidStateError(MHError, RuntimeError):
    """A chain state with zero target mass (log density of -inf) or NaN."""


class SamplerError(MHError, RuntimeError):
    """Numerical failure while drawing a proposal (e.g. non-finite gradient)."""


class ContractError(MHError):
    """An operation was called outside its contract."""


class ValidationError(MHError, ValueError):
    """A transition matrix or pmf failed validation."""


class DegenerateSeriesError(MHError, ValueError):
    """Correlation diagnostics requested on a zero-variance series."""


class CapabilityError(MHError):
    """Problem size beyond what an operation supports."""


class ConvergenceError(MHError):
    """Iteration hit its cap before reaching the requested tolerance."""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
