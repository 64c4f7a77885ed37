"""Exception types shared across the package."""


class FvptruncError(Exception):
    """Base class for all package-specific errors."""


class ExponentOverflowError(FvptruncError, ArithmeticError):
    """An exponential factor left the double range; raised instead of
    silently producing inf, because callers must distinguish 'value too
    large to represent' from an actual numeric result."""


class UnsupportedDomainError(FvptruncError, ValueError):
    """Operation requires the built-in 1D interval domain."""


class UnsupportedRegimeError(FvptruncError, ValueError):
    """Inputs fall outside the parameter regime an operation covers
    (e.g. non-real mode roots, mixed smoothness regimes)."""


class NonConvergenceError(FvptruncError, RuntimeError):
    """Fixed-point iteration hit its iteration cap above tolerance.

    Carries the increment history so callers can diagnose stagnation.
    """

    def __init__(self, message, increments=None, defect=None):
        super().__init__(message)
        self.increments = list(increments) if increments is not None else []
        self.defect = defect


class ReferenceRejectedError(FvptruncError, RuntimeError):
    """Self-convergence ladder did not contract at the expected rate."""


class NoiseTooLargeError(FvptruncError, ValueError):
    """Noise level too large for the parameter-choice rule to apply."""


class BracketError(FvptruncError, ValueError):
    """Root bracketing failed (no sign change on the given interval)."""


class ConfigError(FvptruncError, ValueError):
    """Invalid or unknown experiment configuration content."""
