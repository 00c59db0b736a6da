from .clip import (
    CATEGORIES,
    CLIP_FPS,
    ClipFormatError,
    ClipFrameError,
    ClipQuaternionError,
    ClipSchemaError,
    MotionClip,
    MotionFrame,
    make_clip,
    read_clip,
    write_clip,
)
from .curation import CurationLimits, RejectedClip, curate
from .editing import (
    CurationWarning,
    augment_hand_orientation,
    concat_edit,
    stance_height_edit,
    time_scale,
)
from .generators import curved_path_clip, synth_generate, walk_path_clip
from .refs import RefFrame, ReferenceTrack, build_reference_track

__all__ = [
    "CATEGORIES", "CLIP_FPS", "ClipFormatError", "ClipFrameError",
    "ClipQuaternionError", "ClipSchemaError", "MotionClip", "MotionFrame",
    "make_clip", "read_clip", "write_clip", "CurationLimits", "RejectedClip",
    "curate", "CurationWarning", "augment_hand_orientation", "concat_edit",
    "stance_height_edit", "time_scale", "curved_path_clip", "synth_generate",
    "walk_path_clip", "RefFrame", "ReferenceTrack", "build_reference_track",
]
