"""Motion editing: concatenation, time scaling, hand-orientation
augmentation, and stance-height re-solving."""

from __future__ import annotations

import warnings

import numpy as np

from ..mathcore import (
    quat_from_axis_angle,
    quat_multiply,
    slerp,
    wrap_angle,
)
from ..simenv.kinematics import fk_keypoints, solve_stance
from ..simenv.model import RobotModel, default_model, TORSO_PITCH, LEG_JOINTS
from .clip import CLIP_FPS, MotionClip, MotionFrame, make_clip


class CurationWarning(UserWarning):
    pass


def _rot2d(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s], [s, c]])


def _rebase(b: MotionClip, anchor: MotionFrame) -> dict:
    """Rigidly transform clip b so its first frame root coincides with the
    anchor frame's root position and yaw."""
    dyaw = wrap_angle(anchor.root_yaw - float(b.root_yaw[0]))
    rot = _rot2d(dyaw)
    origin = b.root_pos[0].copy()
    target = anchor.root_pos.copy()
    qrot = quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), dyaw)

    def move(points: np.ndarray) -> np.ndarray:
        rel = points - origin
        out = rel.copy()
        out[..., 0:2] = rel[..., 0:2] @ rot.T
        out[..., 0] += target[0]
        out[..., 1] += target[1]
        out[..., 2] += origin[2]
        return out

    wrist_orient = np.empty_like(b.wrist_orient)
    for i in range(b.n_frames):
        for k in range(2):
            wrist_orient[i, k] = quat_multiply(qrot, b.wrist_orient[i, k])
    return {
        "joint_pos": b.joint_pos.copy(),
        "root_pos": move(b.root_pos),
        "root_yaw": np.array([wrap_angle(y + dyaw) for y in b.root_yaw]),
        "head_pos": move(b.head_pos),
        "wrist_pos": move(b.wrist_pos),
        "wrist_orient": wrist_orient,
    }


def concat_edit(a: MotionClip, b: MotionClip, blend_window: int,
                swap_upper_lower: bool = False) -> MotionClip:
    """Join two clips with a cross-faded seam.

    b's root trajectory is rigidly re-based so its first frame coincides with
    a's last (position and yaw continuity); inside the window, joint and
    position channels are linearly cross-faded and wrist orientations
    SLERP-blended. Output length is len(a) + len(b) - blend_window.

    With swap_upper_lower, b's upper-body joint channels are first spliced
    onto its own lower body before joining, the channel-swap variant of
    body-part recombination.
    """
    if a.n_joints != b.n_joints:
        raise ValueError("joint dimensionality mismatch")
    if blend_window < 1 or blend_window > min(a.n_frames, b.n_frames) // 2:
        raise ValueError(
            f"blend_window must be in [1, {min(a.n_frames, b.n_frames) // 2}]"
        )
    if swap_upper_lower:
        joints = b.joint_pos.copy()
        n = min(a.n_frames, b.n_frames)
        joints[:n, 5:] = a.joint_pos[:n, 5:]
        b = MotionClip(
            name=b.name, category=b.category, fps=b.fps, joint_pos=joints,
            root_pos=b.root_pos, root_yaw=b.root_yaw, head_pos=b.head_pos,
            wrist_pos=b.wrist_pos, wrist_orient=b.wrist_orient,
        )
        return _refresh_keypoints(b, default_model())

    w = blend_window
    moved = _rebase(b, a.frame(a.n_frames - 1))
    ta, tb = a.n_frames, b.n_frames
    n_out = ta + tb - w

    def fade(name: str, wrap: bool = False) -> np.ndarray:
        arr_a = getattr(a, name)
        arr_b = moved[name]
        out = np.concatenate([arr_a[: ta - w], np.zeros_like(arr_b[:w]), arr_b[w:]])
        for j in range(w):
            alpha = (j + 1) / w
            va, vb = arr_a[ta - w + j], arr_b[j]
            if wrap:
                out[ta - w + j] = vb + (1 - alpha) * wrap_angle(va - vb)
            else:
                out[ta - w + j] = (1 - alpha) * va + alpha * vb
        return out

    wrist_orient = np.concatenate(
        [a.wrist_orient[: ta - w], np.zeros((w, 2, 4)), moved["wrist_orient"][w:]]
    )
    for j in range(w):
        alpha = (j + 1) / w
        for k in range(2):
            wrist_orient[ta - w + j, k] = slerp(
                a.wrist_orient[ta - w + j, k], moved["wrist_orient"][j, k], alpha
            )

    return make_clip(
        f"{a.name}+{b.name}", a.category if a.category == b.category else "mixed",
        fade("joint_pos"), fade("root_pos"), fade("root_yaw", wrap=True),
        fade("head_pos"), fade("wrist_pos"), wrist_orient,
    )


def time_scale(clip: MotionClip, factor: float) -> MotionClip:
    """Resample the clip over duration/factor at the fixed frame rate.

    Vector channels interpolate linearly, wrist orientations by SLERP; the
    implied frame-difference velocities scale by the factor.
    """
    if factor <= 0:
        raise ValueError("factor must be > 0")
    if not 0.5 <= factor <= 2.0:
        warnings.warn(
            f"time_scale factor {factor} outside [0.5, 2.0]; output may fail curation",
            CurationWarning,
        )
    t_in = clip.n_frames
    n_out = int(round((t_in - 1) / factor)) + 1
    src = np.minimum(np.arange(n_out) * factor, t_in - 1)
    i0 = np.floor(src).astype(int)
    i1 = np.minimum(i0 + 1, t_in - 1)
    frac = src - i0

    def lin(arr: np.ndarray) -> np.ndarray:
        sh = (n_out,) + (1,) * (arr.ndim - 1)
        f = frac.reshape(sh)
        return (1 - f) * arr[i0] + f * arr[i1]

    yaw = np.array([
        clip.root_yaw[a] + frac[k] * wrap_angle(clip.root_yaw[b] - clip.root_yaw[a])
        for k, (a, b) in enumerate(zip(i0, i1))
    ])
    orient = np.zeros((n_out, 2, 4))
    for k in range(n_out):
        for w in range(2):
            if i0[k] == i1[k] or frac[k] == 0.0:
                orient[k, w] = clip.wrist_orient[i0[k], w]
            else:
                orient[k, w] = slerp(
                    clip.wrist_orient[i0[k], w], clip.wrist_orient[i1[k], w], frac[k]
                )
    return make_clip(
        clip.name, clip.category, lin(clip.joint_pos), lin(clip.root_pos), yaw,
        lin(clip.head_pos), lin(clip.wrist_pos), orient,
    )


def _random_tilt(max_tilt: float, rng: np.random.Generator) -> np.ndarray:
    """Rotation within the cap: uniform axis, angle uniform in [0, max_tilt]."""
    axis = rng.standard_normal(3)
    angle = rng.uniform(0.0, max_tilt)
    return quat_from_axis_angle(axis, angle)


def augment_hand_orientation(clip: MotionClip, rng: np.random.Generator,
                             keyframe_spacing: int = 25,
                             max_tilt: float = 0.5) -> MotionClip:
    """Overlay SLERP-smoothed random wrist-orientation offsets.

    Tilt keyframes are sampled every keyframe_spacing frames (uniform within
    a cap of half-angle max_tilt about the original orientation) and the
    offset is spherically interpolated between keyframes, then composed onto
    the original orientations. Positions are untouched.
    """
    if keyframe_spacing < 2:
        raise ValueError("keyframe_spacing must be >= 2")
    if max_tilt < 0:
        raise ValueError("max_tilt must be >= 0")
    t = clip.n_frames
    keys = list(range(0, t, keyframe_spacing))
    if keys[-1] != t - 1:
        keys.append(t - 1)
    tilts = {
        k: np.stack([_random_tilt(max_tilt, rng) for _ in range(2)]) for k in keys
    }
    orient = clip.wrist_orient.copy()
    for a, b in zip(keys[:-1], keys[1:]):
        for i in range(a, b + 1):
            alpha = (i - a) / (b - a) if b > a else 0.0
            for w in range(2):
                tilt = slerp(tilts[a][w], tilts[b][w], alpha)
                orient[i, w] = quat_multiply(clip.wrist_orient[i, w], tilt)
    return MotionClip(
        name=clip.name, category=clip.category, fps=clip.fps,
        joint_pos=clip.joint_pos, root_pos=clip.root_pos, root_yaw=clip.root_yaw,
        head_pos=clip.head_pos, wrist_pos=clip.wrist_pos, wrist_orient=orient,
    )


def _refresh_keypoints(clip: MotionClip, model: RobotModel) -> MotionClip:
    """Recompute FK-derived channels from the joint and root channels."""
    t = clip.n_frames
    root = clip.root_pos.copy()
    head = np.zeros((t, 3))
    wrist_pos = np.zeros((t, 2, 3))
    wrist_orient = np.zeros((t, 2, 4))
    for i in range(t):
        root[i, 2] = model.root_height(clip.joint_pos[i])
        kp = fk_keypoints(model, clip.joint_pos[i], root[i], clip.root_yaw[i])
        head[i] = kp.head
        wrist_pos[i] = kp.wrist_pos
        wrist_orient[i] = kp.wrist_orient
    return make_clip(clip.name, clip.category, clip.joint_pos, root,
                     clip.root_yaw, head, wrist_pos, wrist_orient)


def stance_height_edit(clip: MotionClip, target_head_height: float,
                       model: RobotModel | None = None) -> MotionClip:
    """Re-solve legs (and torso pitch when the legs saturate) so the head
    height ramps from the clip's initial height to the target over the first
    second and then holds; arm channels are unchanged and all keypoints are
    recomputed through FK."""
    if not 0.5 <= target_head_height <= 1.3:
        raise ValueError("target head height must be within [0.5, 1.3] m")
    model = model or default_model()
    h0 = float(clip.head_pos[0, 2])
    fps = clip.fps
    joints = clip.joint_pos.copy()
    for i in range(clip.n_frames):
        s = min(i / fps, 1.0)
        want = h0 + (target_head_height - h0) * (3 * s * s - 2 * s ** 3)
        crouch, pitch = solve_stance(model, want, float(clip.joint_pos[i, TORSO_PITCH]))
        # Keep any left/right leg differential from the source clip.
        diff = 0.5 * (clip.joint_pos[i, LEG_JOINTS[0]] - clip.joint_pos[i, LEG_JOINTS[1]])
        joints[i, LEG_JOINTS[0]] = crouch + diff
        joints[i, LEG_JOINTS[1]] = crouch - diff
        joints[i, TORSO_PITCH] = pitch
    out = MotionClip(
        name=f"{clip.name}@{target_head_height:.2f}", category=clip.category,
        fps=clip.fps, joint_pos=joints, root_pos=clip.root_pos,
        root_yaw=clip.root_yaw, head_pos=clip.head_pos,
        wrist_pos=clip.wrist_pos, wrist_orient=clip.wrist_orient,
    )
    return _refresh_keypoints(out, model)
