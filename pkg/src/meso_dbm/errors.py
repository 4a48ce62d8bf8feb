"""Exception hierarchy shared by the library modules.

Tool modules turn these into ``{"error": ...}`` payloads; the CLI turns
those into exit codes.
"""


class MesoDbmError(Exception):
    """Base class for every error raised by meso_dbm."""


class DomainError(MesoDbmError, ValueError):
    """A parameter lies outside the domain an operation is defined on."""


class DivergenceError(MesoDbmError):
    """An integral required by the operation does not converge."""


class BranchCutError(MesoDbmError, ValueError):
    """An argument sits on a branch cut of a multivalued function."""


class QuadratureError(MesoDbmError):
    """Numerical quadrature failed to reach the requested tolerance."""


class ConvergenceError(MesoDbmError):
    """An iterative solver did not converge or left its admissible region."""


class OrderingError(MesoDbmError):
    """Particle ordering could not be maintained (collision or tie)."""


class TrialFailureError(MesoDbmError):
    """Too many Monte Carlo trials failed for the run to be trusted."""


class ConfigError(MesoDbmError):
    """An experiment configuration could not be parsed or validated."""
