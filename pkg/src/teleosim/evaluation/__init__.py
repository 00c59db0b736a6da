from .metrics import (
    EpisodeRollout,
    MetricsReport,
    TRACKING_BOUND_M,
    compute_metrics,
    episode_success,
)
from .experiments import (
    PathExperimentResult,
    PathTrial,
    STRAIGHT_DISTANCES,
    StanceEntry,
    activation_spread,
    expert_activation_profile,
    path_experiment,
    replay_action,
    run_student_episode,
    stance_sweep,
    two_sample_t,
)
from .reports import ReportError, emit_report, load_report

__all__ = [
    "EpisodeRollout", "MetricsReport", "TRACKING_BOUND_M", "compute_metrics",
    "episode_success", "PathExperimentResult", "PathTrial", "STRAIGHT_DISTANCES",
    "StanceEntry", "activation_spread", "expert_activation_profile",
    "path_experiment", "replay_action", "run_student_episode", "stance_sweep",
    "two_sample_t", "ReportError", "emit_report", "load_report",
]
