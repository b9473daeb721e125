"""Exception types raised across the package."""


class BabbleReachError(Exception):
    """Base class for all package errors."""


class ConfigurationError(BabbleReachError, ValueError):
    """Inconsistent shapes, counts or parameters."""


class ReachabilityError(BabbleReachError, ValueError):
    """A Cartesian target lies outside the arm's reach."""


class ConvergenceError(BabbleReachError, RuntimeError):
    """Iterative inverse kinematics did not converge.

    The final position residual (metres) is kept on ``residual``.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class TrainingError(BabbleReachError, RuntimeError):
    """Autoencoder training diverged; ``epoch`` is where it happened."""

    def __init__(self, message, epoch):
        super().__init__(message)
        self.epoch = epoch


class DegenerateFeatureError(BabbleReachError, ValueError):
    """A reduced feature never changes along any trajectory."""


class PlanningError(BabbleReachError, RuntimeError):
    """The planner cannot start (e.g. start state not covered by babbling)."""


class StageError(BabbleReachError, RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
