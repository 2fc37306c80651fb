"""Exception hierarchy."""


class MacfbError(ValueError):
    """Base class for input and model errors raised by this package."""


class DimensionError(MacfbError):
    """Component tables disagree on alphabet sizes or variable names."""


class ConsistencyError(MacfbError):
    """A feedback law does not reproduce the designed auxiliary marginal.

    Attributes
    ----------
    deviation : float
        Largest absolute deviation found.
    cell : tuple of int or None
        Index of the auxiliary cell where it occurs.
    """

    def __init__(self, message, deviation=float("nan"), cell=None):
        super().__init__(message)
        self.deviation = deviation
        self.cell = cell


class InfeasibleError(MacfbError):
    """Parameters lie outside the region where a construction exists."""


class SingularSystemError(MacfbError):
    """A linear system that should have a unique solution is singular."""
