"""Exception hierarchy for kslab."""


class KslabError(Exception):
    """Base class for all library errors."""


class PoleHitError(KslabError):
    """Evaluation point coincides (to double precision) with a pole."""

    def __init__(self, z, pole):
        self.z = z
        self.pole = pole
        super().__init__(f"evaluation point {z!r} hits pole {pole!r}")


class ToleranceUnreachable(KslabError):
    """A certified tail bound could not be pushed below the requested tolerance."""

    def __init__(self, tol, best_bound, message=None):
        self.tol = tol
        self.best_bound = best_bound
        super().__init__(message or f"tolerance {tol:g} unreachable (best bound {best_bound:g})")


class ExcludedRadiusError(KslabError):
    """A circle passes too close to a pole (radius lies in the exclusion set)."""


class WindingError(KslabError):
    """Argument tracking along a contour failed."""


class ClearanceError(WindingError):
    """A zero or pole lies too close to the contour; nudge the boundary."""

    def __init__(self, message, suggestion=None):
        self.suggestion = suggestion
        super().__init__(message)


class ResolutionError(WindingError):
    """Phase steps could not be reduced below the acceptance threshold."""


class NearMultipleZeroError(KslabError):
    """|g'| at a zero of g is below the simplicity threshold."""


class NormalizationError(KslabError):
    """The coefficient sum is too small to normalize by."""


class IllConditionedFitError(KslabError):
    """Polynomial least-squares fit is ill conditioned; choose other samples."""


class SelectionError(KslabError):
    """Subsequence selection ran out of certified data."""


class ConvergenceError(KslabError):
    """An iterative refinement (Newton, ODE stepping) did not converge."""


class ScenarioError(KslabError):
    """Malformed or invalid scenario document."""


class NoCriticalRaysError(KslabError):
    """A constant ``Q`` has no critical rays."""
