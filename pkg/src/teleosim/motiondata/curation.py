"""Feasibility filtering of motion clips against kinematic envelopes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..simenv.kinematics import fk_keypoints
from ..simenv.model import RobotModel, default_model
from .clip import MotionClip


@dataclass
class CurationLimits:
    max_joint_vel: float = 12.0      # rad/s (or m/s for prismatic channels)
    max_root_speed: float = 3.0      # m/s
    max_head_rate: float = 1.5       # m/s, vertical
    joint_low: np.ndarray = field(default_factory=lambda: default_model().joint_low)
    joint_high: np.ndarray = field(default_factory=lambda: default_model().joint_high)

    def __post_init__(self):
        for v in (self.max_joint_vel, self.max_root_speed, self.max_head_rate):
            if not (np.isfinite(v) and v > 0):
                raise ValueError("curation limits must be positive and finite")


@dataclass
class RejectedClip:
    clip: MotionClip
    reason: str
    frame: int


def _first_violation(clip: MotionClip, limits: CurationLimits,
                     model: RobotModel) -> tuple[str, int] | None:
    fps = clip.fps
    q = clip.joint_pos
    below = q < limits.joint_low - 1e-9
    above = q > limits.joint_high + 1e-9
    if np.any(below | above):
        frame = int(np.argwhere(below | above)[0][0])
        return "joint range", frame
    dq = np.abs(np.diff(q, axis=0)) * fps
    if np.any(dq > limits.max_joint_vel + 1e-9):
        return "max joint velocity", int(np.argwhere(dq > limits.max_joint_vel + 1e-9)[0][0])
    droot = np.linalg.norm(np.diff(clip.root_pos, axis=0), axis=1) * fps
    if np.any(droot > limits.max_root_speed + 1e-9):
        return "max root speed", int(np.argmax(droot > limits.max_root_speed + 1e-9))
    dhead = np.abs(np.diff(clip.head_pos[:, 2])) * fps
    if np.any(dhead > limits.max_head_rate + 1e-9):
        return "max head-height rate", int(np.argmax(dhead > limits.max_head_rate + 1e-9))
    reach = model.max_reach + 1e-6
    for i in range(clip.n_frames):
        kp = fk_keypoints(model, clip.joint_pos[i], clip.root_pos[i], clip.root_yaw[i])
        d = np.linalg.norm(clip.wrist_pos[i] - kp.shoulder_pos, axis=1)
        if np.any(d > reach):
            return "wrist reach", i
    return None


def curate(clips: list[MotionClip], limits: CurationLimits | None = None,
           model: RobotModel | None = None
           ) -> tuple[list[MotionClip], list[RejectedClip]]:
    """Split clips into (kept, rejected-with-reason).

    A clip is rejected iff a frame-to-frame finite difference exceeds a rate
    limit, a joint leaves its range, or a wrist leaves the reachable sphere;
    the reason names the first violated limit and frame.
    """
    limits = limits or CurationLimits()
    model = model or default_model()
    kept: list[MotionClip] = []
    rejected: list[RejectedClip] = []
    for clip in clips:
        clip.validate()
        hit = _first_violation(clip, limits, model)
        if hit is None:
            kept.append(clip)
        else:
            rejected.append(RejectedClip(clip, hit[0], hit[1]))
    return kept, rejected
