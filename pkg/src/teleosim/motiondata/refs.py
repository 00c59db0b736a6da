"""Reference tracks: clips expanded with velocities and FK-derived extras.

The environment, reward engine, and observation builders consume per-frame
RefFrame rows rather than raw clips, so velocity differencing and elbow FK
happen once per clip here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..simenv.kinematics import fk_keypoints
from ..simenv.model import RobotModel
from ..mathcore import wrap_angle
from .clip import MotionClip


@dataclass
class RefFrame:
    joint_pos: np.ndarray      # (J,)
    joint_vel: np.ndarray      # (J,), 0:2 body-frame root velocity, 2 yaw rate
    root_pos: np.ndarray       # (3,)
    root_yaw: float
    root_vel: np.ndarray       # (3,) world
    root_yaw_rate: float
    head_pos: np.ndarray       # (3,)
    wrist_pos: np.ndarray      # (2, 3)
    wrist_orient: np.ndarray   # (2, 4)
    elbow_pos: np.ndarray      # (2, 3)
    keybody_vel: np.ndarray    # (3, 3) head + wrists, world
    holding: bool = False      # past the clip end, last frame held

    @property
    def keybodies(self) -> np.ndarray:
        return np.vstack([self.head_pos, self.wrist_pos])


@dataclass
class ReferenceTrack:
    clip: MotionClip
    joint_vel: np.ndarray
    root_vel: np.ndarray
    yaw_rate: np.ndarray
    elbow_pos: np.ndarray
    keybody_vel: np.ndarray

    @property
    def n_frames(self) -> int:
        return self.clip.n_frames

    @property
    def duration(self) -> float:
        return self.clip.duration

    def at(self, i: int) -> RefFrame:
        """Row i, clamped to the final frame with the holding flag set."""
        holding = i >= self.n_frames
        i = min(max(i, 0), self.n_frames - 1)
        c = self.clip
        return RefFrame(
            joint_pos=c.joint_pos[i],
            joint_vel=self.joint_vel[i],
            root_pos=c.root_pos[i],
            root_yaw=float(c.root_yaw[i]),
            root_vel=self.root_vel[i],
            root_yaw_rate=float(self.yaw_rate[i]),
            head_pos=c.head_pos[i],
            wrist_pos=c.wrist_pos[i],
            wrist_orient=c.wrist_orient[i],
            elbow_pos=self.elbow_pos[i],
            keybody_vel=self.keybody_vel[i],
            holding=holding,
        )


def _forward_diff(arr: np.ndarray, fps: int) -> np.ndarray:
    """Forward differences with the last row held from the previous one."""
    out = np.zeros_like(arr, dtype=np.float64)
    out[:-1] = (arr[1:] - arr[:-1]) * fps
    out[-1] = out[-2] if arr.shape[0] > 1 else 0.0
    return out


def build_reference_track(clip: MotionClip, model: RobotModel) -> ReferenceTrack:
    clip.validate()
    t = clip.n_frames
    joint_vel = _forward_diff(clip.joint_pos, clip.fps)
    root_vel = _forward_diff(clip.root_pos, clip.fps)
    dyaw = np.array([
        wrap_angle(clip.root_yaw[i + 1] - clip.root_yaw[i]) for i in range(t - 1)
    ])
    yaw_rate = np.zeros(t)
    yaw_rate[:-1] = dyaw * clip.fps
    yaw_rate[-1] = yaw_rate[-2] if t > 1 else 0.0

    # Mirror the root velocity into the base pseudo-joint velocity slots in
    # the body frame so joint-velocity tracking carries a locomotion signal.
    for i in range(t):
        c, s = np.cos(clip.root_yaw[i]), np.sin(clip.root_yaw[i])
        vx, vy = root_vel[i, 0], root_vel[i, 1]
        joint_vel[i, 0] = c * vx + s * vy
        joint_vel[i, 1] = -s * vx + c * vy
        joint_vel[i, 2] = yaw_rate[i]

    elbow_pos = np.zeros((t, 2, 3))
    for i in range(t):
        kp = fk_keypoints(model, clip.joint_pos[i], clip.root_pos[i], clip.root_yaw[i])
        elbow_pos[i] = kp.elbow_pos

    keybody = np.concatenate([clip.head_pos[:, None, :], clip.wrist_pos], axis=1)
    keybody_vel = _forward_diff(keybody, clip.fps)

    return ReferenceTrack(
        clip=clip,
        joint_vel=joint_vel,
        root_vel=root_vel,
        yaw_rate=yaw_rate,
        elbow_pos=elbow_pos,
        keybody_vel=keybody_vel,
    )
