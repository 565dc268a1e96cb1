"""Exception types shared across the package."""


class SsgraphError(Exception):
    """Base class for all errors raised by this package."""


class GridMismatchError(SsgraphError):
    """Two signals with incompatible (dt, length, start time) met in a binary op."""


class ParameterError(SsgraphError):
    """Invalid or infeasible parameters (family, tau range, config values)."""


class DegeneratePairError(SsgraphError):
    """A phase was requested for a pair with a zero-norm member."""


class NonInvertiblePointError(SsgraphError):
    """Cloud inversion hit a zero-gain point."""


class UnsupportedModelError(SsgraphError):
    """Operation defined only for LTI models was applied to something else."""


class UnstableModelError(SsgraphError):
    """Construction of an LTI block with a non-Hurwitz denominator/state matrix."""


class LoopDivergenceError(SsgraphError):
    """Per-step algebraic loop solve failed to converge."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class CatalogError(SsgraphError):
    """Unknown analytic region catalog entry."""


class EmptyRegionError(SsgraphError):
    """Distance requested from an empty region."""


class NotNegativeImaginaryError(SsgraphError):
    """Interconnection theorem precondition failed; names the offending system."""

    def __init__(self, message, system=None):
        super().__init__(message)
        self.system = system


class ConfigError(SsgraphError):
    """Experiment configuration document failed validation."""
