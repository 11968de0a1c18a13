"""Exception types shared across the planner."""


class GeometryError(ValueError):
    """Degenerate geometry (coincident points, zero distance, bad angles)."""


class RegimeError(ValueError):
    """Closed-form placement used outside its small-parameter regime."""


class ConvergenceError(RuntimeError):
    """Iterative solver exhausted its iteration budget.

    Carries the best iterate found so far in ``best_point``.
    """

    def __init__(self, message, best_point=None):
        super().__init__(message)
        self.best_point = best_point


class PartitionError(ValueError):
    """No feasible sub-array partition within the allowed group count."""


class UnreachableUavError(ValueError):
    """A UAV has zero beamforming gain; no finite power meets its rate."""


class SensitivityUndefinedError(ValueError):
    """Gain-sensitivity analysis requested while the gain clamp is engaged."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""
