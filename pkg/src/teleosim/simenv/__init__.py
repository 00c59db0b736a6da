from .model import (
    RobotModel,
    default_model,
    JOINT_NAMES,
    NUM_JOINTS,
    KEYBODY_NAMES,
    FULL_SCALE_ACTION_DIM,
)
from .kinematics import Keypoints, FKResult, fk_keypoints, fk_full, fk_jacobian, state_fk, solve_stance
from .randomization import (
    RandomizationConfig,
    EpisodeParams,
    sample_randomization,
    nominal_params,
)
from .env import (
    RobotState,
    SimulationFault,
    TerminationResult,
    step,
    check_termination,
    initial_state,
    delay_steps_for,
    contact_flags,
)
from .rewards import (
    RewardBreakdown,
    REWARD_TERMS,
    TABLE_WEIGHTS,
    compute_reward,
    default_reward_weights,
    training_reward_weights,
)

__all__ = [
    "RobotModel", "default_model", "JOINT_NAMES", "NUM_JOINTS", "KEYBODY_NAMES",
    "FULL_SCALE_ACTION_DIM", "Keypoints", "FKResult", "fk_keypoints", "fk_full", "fk_jacobian", "state_fk",
    "solve_stance", "RandomizationConfig", "EpisodeParams", "sample_randomization",
    "nominal_params", "RobotState", "SimulationFault", "TerminationResult", "step",
    "check_termination", "initial_state", "delay_steps_for", "contact_flags",
    "RewardBreakdown", "REWARD_TERMS", "TABLE_WEIGHTS", "compute_reward",
    "default_reward_weights", "training_reward_weights",
]
