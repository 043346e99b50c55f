"""Exception and warning classes shared by all modules."""


class HoercalcError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(HoercalcError):
    """Invalid grid, lattice or manifest configuration."""


class InputError(HoercalcError, ValueError):
    """Malformed numerical input (NaN, wrong shape, out of range)."""


class InvalidWeightError(InputError):
    """A weight takes values below one."""


class DomainError(HoercalcError, ValueError):
    """A function or operation is used outside its domain."""


class SupportError(DomainError):
    """A bump function touches a forbidden region."""


class DegenerateInputError(HoercalcError, ValueError):
    """The input makes the requested quantity meaningless (0/0)."""


class SpectralCollisionError(HoercalcError, ValueError):
    """A resolvent point lies on (or numerically on) the spectrum."""


class ContourProximityError(HoercalcError, ValueError):
    """An eigenvalue sits too close to an integration contour."""


class RangeError(HoercalcError, OverflowError):
    """An exponential would overflow double precision."""


class DivergenceError(HoercalcError):
    """A quantity does not converge on the available grid.

    The error is soft: ``partial`` carries whatever was computed before the
    divergence was detected, so callers can tell "outside the space" apart
    from "grid too small" by inspecting it.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class TailWarning(UserWarning):
    """Samples do not decay at the grid ends."""


class ConvergenceWarning(UserWarning):
    """A result changed noticeably under grid or lattice refinement."""


class DivergenceWarning(UserWarning):
    """A weighted integral looks non-integrable within the grid."""
