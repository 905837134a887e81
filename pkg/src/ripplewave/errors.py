"""Exception hierarchy for the ripplewave package.

Everything raised on purpose derives from RippleWaveError so callers can
catch library failures without swallowing genuine bugs.  The CLI maps the
subtree onto exit codes (config/usage -> 2, numeric -> 3, no-result -> 4).
"""


class RippleWaveError(Exception):
    """Base class for all errors raised by ripplewave."""


class ParameterError(RippleWaveError, ValueError):
    """Invalid parameters at object construction time."""


class DomainError(RippleWaveError, ValueError):
    """Function evaluated outside its mathematical domain."""


class ConfigError(RippleWaveError):
    """Invalid run configuration (time step, grid, file contents)."""


class UsageError(RippleWaveError):
    """Operation applied to an object it does not make sense for."""


class ConsistencyError(RippleWaveError):
    """Input claims a property (e.g. being a steady state) it does not have."""


class NumericError(RippleWaveError):
    """An iterative numerical procedure failed to converge."""


class IntegrationError(NumericError):
    """Time integration left the invariant region (time step too large)."""


class SingularityError(NumericError):
    """Evaluation at a removable/true singularity of a wave-profile equation."""


class BlowUpError(NumericError):
    """Simulation produced NaNs or significantly negative densities."""

    def __init__(self, message, cell=None, time=None):
        super().__init__(message)
        self.cell = cell
        self.time = time


class ConstructionError(RippleWaveError):
    """Travelling-wave construction failed (diagnostics in the message)."""


class NoWaveError(ConstructionError):
    """The model admits no travelling wave of the requested type."""


class ReachabilityError(ConstructionError):
    """No admissible jump target shares the required level-curve value."""


class IncomparableError(RippleWaveError):
    """Two profiles cannot be compared (incompatible periods/grids)."""
