"""Learn reaching from motor babbling with trajectory bundles in a reduced space.

Pipeline: babble reaches on a simulated arm, compress motor-sensory states
with an autoencoder, lay a sparse neural grid over the reduced space, strengthen
synapses along the babbled trajectories, then plan new reaches by spreading
activation back from the goal.
"""

from .arm import (ArcSpec, ArmConfig, JointState, default_arc, forward_kinematics,
                  humanoid_arm, inverse_kinematics, make_arm, planar_arm,
                  sample_arc_targets)
from .babble import (BabbleProtocol, Dataset, Trajectory, generate_dataset,
                     generate_trajectory, multi_start_poses)
from .bundles import BundleConfig, calculate_weight, form_bundles
from .codec import (Autoencoder, NormStats, TrainHyper, decode, encode, fit_norm_stats,
                    train_autoencoder)
from .errors import (BabbleReachError, ConfigurationError, ConvergenceError,
                     DegenerateFeatureError, PlanningError, ReachabilityError, StageError,
                     TrainingError)
from .metrics import MetricReport, end_effector_error, norm_jerk, summarize
from .neural_map import NeuralMap, build_map, compute_resolution, find_firing_neurons
from .planner import PlannerConfig, PlanResult, oracle_path, plan

__all__ = [
    "ArcSpec",
    "ArmConfig",
    "Autoencoder",
    "BabbleProtocol",
    "BabbleReachError",
    "BundleConfig",
    "ConfigurationError",
    "ConvergenceError",
    "Dataset",
    "DegenerateFeatureError",
    "JointState",
    "MetricReport",
    "NeuralMap",
    "NormStats",
    "PlanResult",
    "PlannerConfig",
    "PlanningError",
    "ReachabilityError",
    "StageError",
    "TrainHyper",
    "TrainingError",
    "Trajectory",
    "build_map",
    "calculate_weight",
    "compute_resolution",
    "decode",
    "default_arc",
    "encode",
    "end_effector_error",
    "find_firing_neurons",
    "fit_norm_stats",
    "form_bundles",
    "forward_kinematics",
    "generate_dataset",
    "generate_trajectory",
    "humanoid_arm",
    "inverse_kinematics",
    "make_arm",
    "multi_start_poses",
    "norm_jerk",
    "oracle_path",
    "plan",
    "planar_arm",
    "sample_arc_targets",
    "summarize",
    "train_autoencoder",
]

__version__ = "0.1.0"
