from .nets import MLPNet, Linear, Adam, elu, flatten_params, set_flat_params
from .moe import (
    MoEConfig,
    MoELayer,
    MoENet,
    RoutingStats,
    FULL_SCALE_TRUNK,
    balance_loss,
    balance_loss_grad,
    moe_forward,
    moe_layer_forward,
    softmax,
)
from .observations import (
    ENV_BLOCK_FIELDS,
    HISTORY_LEN,
    HistoryBuffer,
    LayoutError,
    STATE_FRAME_DIM,
    STUDENT_OBS_DIM,
    STUDENT_TASK_LAYOUT,
    TEACHER_LAYOUT,
    TEACHER_LAYOUT_VERSION,
    TEACHER_OBS_DIM,
    build_student_obs,
    build_teacher_obs,
    state_frame_vec,
)
from .checkpoint import CheckpointError, checkpoint_load, checkpoint_save

__all__ = [
    "MLPNet", "Linear", "Adam", "elu", "flatten_params", "set_flat_params",
    "MoEConfig", "MoELayer", "MoENet", "RoutingStats", "FULL_SCALE_TRUNK",
    "balance_loss", "balance_loss_grad", "moe_forward", "moe_layer_forward",
    "softmax", "ENV_BLOCK_FIELDS", "HISTORY_LEN", "HistoryBuffer", "LayoutError",
    "STATE_FRAME_DIM", "STUDENT_OBS_DIM", "STUDENT_TASK_LAYOUT", "TEACHER_LAYOUT",
    "TEACHER_LAYOUT_VERSION", "TEACHER_OBS_DIM", "build_student_obs",
    "build_teacher_obs", "state_frame_vec", "CheckpointError", "checkpoint_load",
    "checkpoint_save",
]
