from .drift import DEFAULT_DRIFT, DEFAULT_OPERATOR_DRIFT, DriftInjector, \
    inject_observation_noise
from .ppo import (
    FULL_SCALE_STUDENT,
    FULL_SCALE_TEACHER,
    GaussianPolicy,
    PPOConfig,
    PPOUpdateError,
    RunningNorm,
    TrajectoryBatch,
    collect_rollouts,
    compute_gae,
    ppo_update,
)
from .amp import (
    AMP_FEATURE_DIM,
    AmpConfig,
    AmpDiscriminator,
    amp_score_from_logits,
    amp_update_and_reward,
    reference_features,
    transition_features,
)
from .sessions import (
    NOISE_INJECTED,
    NOISE_NONE,
    NOISE_ODOMETRY,
    EpisodeRecord,
    StudentSession,
    TeacherSession,
)
from .teacher import (
    TeacherTrainConfig,
    evaluate_success_rate,
    make_training_tracks,
    train_teacher,
)
from .distill import (
    AggregatedBuffer,
    DistillConfig,
    StudentRewardSession,
    beta_schedule,
    distill_student,
    evaluate_distillation_mse,
    student_ppo_finetune,
)
from .logs import TrainLogWriter, read_training_log
from .policy_io import load_policy, save_policy

__all__ = [
    "DEFAULT_DRIFT", "DEFAULT_OPERATOR_DRIFT", "DriftInjector",
    "inject_observation_noise", "FULL_SCALE_STUDENT", "FULL_SCALE_TEACHER",
    "GaussianPolicy", "PPOConfig", "PPOUpdateError", "RunningNorm",
    "TrajectoryBatch", "collect_rollouts", "compute_gae", "ppo_update",
    "AMP_FEATURE_DIM", "AmpConfig", "AmpDiscriminator", "amp_score_from_logits",
    "amp_update_and_reward", "reference_features", "transition_features",
    "NOISE_INJECTED", "NOISE_NONE", "NOISE_ODOMETRY", "EpisodeRecord",
    "StudentSession", "TeacherSession", "TeacherTrainConfig",
    "evaluate_success_rate", "make_training_tracks", "train_teacher",
    "AggregatedBuffer", "DistillConfig", "StudentRewardSession", "beta_schedule",
    "distill_student", "evaluate_distillation_mse", "student_ppo_finetune",
    "TrainLogWriter", "read_training_log", "load_policy", "save_policy",
]
