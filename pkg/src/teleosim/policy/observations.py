"""Observation construction for the privileged teacher and the deployable
student.

The teacher sees full simulator state (per-link poses and velocities from FK)
plus the episode's randomization draw. The student sees a 25-frame history of
proprioception and actions plus a task block whose global positions come only
from odometry estimates; it never receives ground-truth global pose.

Every positional quantity is expressed in the robot's yaw frame relative to
its (estimated) root, so features stay bounded along arbitrarily long
trajectories. Layouts are explicit (name, width) lists guarded by a version
string.
"""

from __future__ import annotations

import hashlib
from dataclasses import fields as dc_fields

import numpy as np

from ..mathcore import quat_canonical, quat_angle, quat_multiply, wrap_angle
from ..simenv.kinematics import state_fk
from ..simenv.model import RobotModel, NUM_JOINTS
from ..simenv.randomization import EpisodeParams

HISTORY_LEN = 25

# Env-param fields consumed by the teacher observation, in layout order.
ENV_BLOCK_FIELDS = (
    ("friction", 1),
    ("mass_scale", 1),
    ("com_offset", 3),
    ("p_gain_scale", 1),
    ("d_gain_scale", 1),
    ("rfi_fraction", 1),
    ("control_delay", 1),
    ("step_delay", 1),
)

LINK_NAMES = ("head", "elbow_l", "elbow_r", "wrist_l", "wrist_r")
PER_LINK = 13  # pos 3 + quat 4 + linear vel 3 + angular vel 3


def _layout_version(layout: tuple) -> str:
    text = ";".join(f"{name}:{size}" for name, size in layout)
    return hashlib.sha256(text.encode()).hexdigest()[:8]


TEACHER_LAYOUT = (
    ("joint_pos", NUM_JOINTS),
    ("joint_vel", NUM_JOINTS),
    ("root_height", 1),
    ("gravity_dir", 3),
    ("root_vel_body", 3),
    ("root_yaw_rate", 1),
    ("links_body", len(LINK_NAMES) * PER_LINK),
    ("task_joint_delta", NUM_JOINTS),
    ("task_keybody_delta_body", 9),
    ("task_keybody_vel_delta_body", 9),
    ("task_root_vel_delta_body", 3),
    ("task_yaw_rate_delta", 1),
    ("task_yaw_delta_sincos", 2),
    ("task_wrist_angle_delta", 2),
    ("task_ref_keybody_body", 9),
    ("task_ref_joint", NUM_JOINTS),
    ("task_ref_wrist_quat_body", 8),
    ("task_holding_flag", 1),
    ("prev_action", NUM_JOINTS),
    ("env_block", sum(size for _, size in ENV_BLOCK_FIELDS)),
)

TEACHER_LAYOUT_VERSION = _layout_version(TEACHER_LAYOUT)
TEACHER_OBS_DIM = sum(size for _, size in TEACHER_LAYOUT)

STATE_FRAME_LAYOUT = (
    ("joint_pos", NUM_JOINTS),
    ("joint_vel", NUM_JOINTS),
    ("yaw_rate", 1),
    ("gravity_dir", 3),
)
STATE_FRAME_DIM = sum(size for _, size in STATE_FRAME_LAYOUT)

STUDENT_TASK_LAYOUT = (
    ("keybody_delta_body", 9),   # odometry-estimated, the closed-loop channel
    ("ref_keybody_body", 9),
    ("ref_keybody_vel_body", 9),
    ("wrist_quat_current_body", 8),
    ("wrist_quat_ref_body", 8),
    ("head_height_current", 1),
    ("head_height_ref", 1),
    ("odom_delta", 3),
    ("stale_flag", 1),
)
STUDENT_TASK_DIM = sum(size for _, size in STUDENT_TASK_LAYOUT)
STUDENT_OBS_DIM = HISTORY_LEN * (STATE_FRAME_DIM + NUM_JOINTS) + STUDENT_TASK_DIM
STUDENT_LAYOUT_VERSION = _layout_version(
    (("history", HISTORY_LEN * (STATE_FRAME_DIM + NUM_JOINTS)),) + STUDENT_TASK_LAYOUT
)


class LayoutError(ValueError):
    """Observation layout does not match the expected field order."""


def yaw_rot2(yaw: float) -> np.ndarray:
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s], [s, c]])


def to_body(vecs: np.ndarray, yaw: float) -> np.ndarray:
    """Rotate world x/y components into the yaw frame; z passes through."""
    vecs = np.atleast_2d(np.asarray(vecs, dtype=np.float64))
    c, s = np.cos(yaw), np.sin(yaw)
    out = vecs.copy()
    out[:, 0] = c * vecs[:, 0] + s * vecs[:, 1]
    out[:, 1] = -s * vecs[:, 0] + c * vecs[:, 1]
    return out


def quat_in_yaw_frame(q: np.ndarray, yaw: float) -> np.ndarray:
    yaw_conj = np.array([np.cos(-0.5 * yaw), 0.0, 0.0, np.sin(-0.5 * yaw)])
    return quat_canonical(quat_multiply(yaw_conj, q))


def state_frame_vec(state) -> np.ndarray:
    """Proprioceptive slice of the state shared by history frames."""
    return np.concatenate([
        state.joint_pos,
        state.joint_vel,
        [state.root_ang_vel],
        state.gravity_dir,
    ])


class HistoryBuffer:
    """Fixed-size ring of the last H (state frame, action) pairs.

    Reset pre-fills every slot with the first frame so early-episode
    observations are padded by repetition.
    """

    def __init__(self, capacity: int = HISTORY_LEN):
        self.capacity = capacity
        self._frames = np.zeros((capacity, STATE_FRAME_DIM))
        self._actions = np.zeros((capacity, NUM_JOINTS))
        self._idx = 0

    def reset(self, frame: np.ndarray, action: np.ndarray | None = None) -> None:
        action = np.zeros(NUM_JOINTS) if action is None else action
        self._frames[:] = frame
        self._actions[:] = action
        self._idx = 0

    def push(self, frame: np.ndarray, action: np.ndarray) -> None:
        self._frames[self._idx] = frame
        self._actions[self._idx] = action
        self._idx = (self._idx + 1) % self.capacity

    def as_vector(self) -> np.ndarray:
        order = (np.arange(self.capacity) + self._idx) % self.capacity
        return np.concatenate([self._frames[order].ravel(),
                               self._actions[order].ravel()])


def _validate_env_params(env_params) -> None:
    names = [f.name for f in dc_fields(env_params)]
    expected = [name for name, _ in ENV_BLOCK_FIELDS]
    if names[: len(expected)] != expected:
        raise LayoutError(
            f"env params field order {names[:len(expected)]} does not match "
            f"teacher layout {TEACHER_LAYOUT_VERSION}; bump the layout version"
        )


def _link_states(model: RobotModel, state):
    """Per-link body-frame pose and velocities, plus world keybody velocities."""
    res = state_fk(model, state)
    kp = res.keypoints
    yaw = state.root_yaw
    omega_root = np.array([0.0, 0.0, state.root_ang_vel])
    qd = state.joint_vel
    positions = {
        "head": kp.head, "elbow_l": kp.elbow_pos[0], "elbow_r": kp.elbow_pos[1],
        "wrist_l": kp.wrist_pos[0], "wrist_r": kp.wrist_pos[1],
    }
    quats = {
        "head": kp.torso_orient,
        "elbow_l": kp.elbow_orient[0], "elbow_r": kp.elbow_orient[1],
        "wrist_l": kp.wrist_orient[0], "wrist_r": kp.wrist_orient[1],
    }
    jac_of = {"head": "head", "elbow_l": "wrist_l", "elbow_r": "wrist_r",
              "wrist_l": "wrist_l", "wrist_r": "wrist_r"}
    out = np.zeros(len(LINK_NAMES) * PER_LINK)
    linvels_world = {}
    for i, name in enumerate(LINK_NAMES):
        pos = positions[name]
        rel = pos - state.root_pos
        target = jac_of[name]
        linvel = (state.root_vel + np.cross(omega_root, rel)
                  + res.position_jacobian(target) @ qd)
        linvels_world[name] = linvel
        angvel = res.angular_velocity(target, qd, state.root_ang_vel)
        out[i * PER_LINK:(i + 1) * PER_LINK] = np.concatenate([
            to_body(rel, yaw)[0],
            quat_in_yaw_frame(quats[name], yaw),
            to_body(linvel, yaw)[0],
            to_body(angvel, yaw)[0],
        ])
    return out, linvels_world


def build_teacher_obs(model: RobotModel, state, ref, prev_action: np.ndarray,
                      env_params: EpisodeParams) -> np.ndarray:
    """Privileged observation: full state, reference deltas, previous action,
    and the episode randomization draw, all in the robot's yaw frame."""
    _validate_env_params(env_params)
    kp = state_fk(model, state).keypoints
    yaw = state.root_yaw
    keybodies = kp.keybodies
    ref_kb = ref.keybodies
    links, linvels = _link_states(model, state)
    kb_vel = np.vstack([linvels["head"], linvels["wrist_l"], linvels["wrist_r"]])
    wrist_angles = np.array([
        quat_angle(kp.wrist_orient[i], ref.wrist_orient[i]) for i in range(2)
    ])
    dyaw = wrap_angle(ref.root_yaw - yaw)
    blocks = [
        state.joint_pos,
        state.joint_vel,
        [state.root_pos[2]],
        state.gravity_dir,
        to_body(state.root_vel, yaw)[0],
        [state.root_ang_vel],
        links,
        ref.joint_pos - state.joint_pos,
        to_body(ref_kb - keybodies, yaw).ravel(),
        to_body(ref.keybody_vel - kb_vel, yaw).ravel(),
        to_body(ref.root_vel - state.root_vel, yaw)[0],
        [ref.root_yaw_rate - state.root_ang_vel],
        [np.sin(dyaw), np.cos(dyaw)],
        wrist_angles,
        to_body(ref_kb - state.root_pos, yaw).ravel(),
        ref.joint_pos,
        np.concatenate([quat_in_yaw_frame(q, yaw) for q in ref.wrist_orient]),
        [1.0 if ref.holding else 0.0],
        prev_action,
    ]
    env_block = []
    for name, size in ENV_BLOCK_FIELDS:
        v = np.atleast_1d(getattr(env_params, name)).astype(float)
        if v.size != size:
            raise LayoutError(f"env field {name} has size {v.size}, layout says {size}")
        env_block.append(v)
    obs = np.concatenate([np.asarray(b, dtype=np.float64).ravel() for b in blocks]
                         + env_block)
    assert obs.size == TEACHER_OBS_DIM
    return obs


def build_student_obs(history: HistoryBuffer, odom_delta: np.ndarray, ref: dict,
                      current: dict, stale: bool = False) -> np.ndarray:
    """Deployable observation.

    ref (world frame, from the operator side): {"keybody_pos": (3,3),
    "keybody_vel": (3,3), "wrist_orient": (2,4), "head_height": float}.
    current (odometry-derived only, never ground truth): {"keybody_pos":
    (3,3) estimated, "wrist_orient": (2,4), "head_height": float,
    "root_pos": (3,) estimated, "root_yaw": estimated}. Positional blocks are
    expressed in the estimated yaw frame relative to the estimated root; the
    keybody delta block is the closed-loop channel.
    """
    cur_kb = np.asarray(current["keybody_pos"], dtype=np.float64)
    ref_kb = np.asarray(ref["keybody_pos"], dtype=np.float64)
    est_root = np.asarray(current["root_pos"], dtype=np.float64)
    est_yaw = float(current["root_yaw"])
    task = np.concatenate([
        to_body(ref_kb - cur_kb, est_yaw).ravel(),
        to_body(ref_kb - est_root, est_yaw).ravel(),
        to_body(np.asarray(ref["keybody_vel"], dtype=np.float64), est_yaw).ravel(),
        np.concatenate([quat_in_yaw_frame(q, est_yaw)
                        for q in current["wrist_orient"]]),
        np.concatenate([quat_in_yaw_frame(q, est_yaw)
                        for q in ref["wrist_orient"]]),
        [float(current["head_height"])],
        [float(ref["head_height"])],
        np.asarray(odom_delta, dtype=np.float64),
        [1.0 if stale else 0.0],
    ])
    obs = np.concatenate([history.as_vector(), task])
    assert obs.size == STUDENT_OBS_DIM
    return obs
