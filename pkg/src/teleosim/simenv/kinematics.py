"""Closed-form forward kinematics of the reduced humanoid.

World frame: x forward, y left, z up. The chain per arm is
yaw -> torso pitch -> shoulder pitch (about y) -> shoulder roll (about x,
sign-mirrored so positive roll swings either arm outward) -> elbow (about y)
-> wrist roll (about the forearm axis). Arms hang along -z in the zero pose.

The numeric core lives in the accel kernels; this module shapes its outputs
and derives geometric Jacobians and revolute-axis chains from them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import accel
from .model import RobotModel, TORSO_PITCH, LEFT_ARM, RIGHT_ARM


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=np.float64)


def rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=np.float64)


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=np.float64)


@dataclass
class Keypoints:
    """FK output: world positions of the tracked bodies plus segment rotations."""

    head: np.ndarray            # (3,)
    wrist_pos: np.ndarray       # (2, 3) left, right
    wrist_orient: np.ndarray    # (2, 4) unit quats, w >= 0
    elbow_pos: np.ndarray       # (2, 3)
    elbow_orient: np.ndarray    # (2, 4) forearm segment rotation
    shoulder_pos: np.ndarray    # (2, 3)
    torso_orient: np.ndarray    # (4,) yaw + pitch composed

    @property
    def keybodies(self) -> np.ndarray:
        """(3, 3) stack of head and both wrists."""
        return np.vstack([self.head, self.wrist_pos])


@dataclass
class FKResult:
    """Keypoints plus the revolute axes needed for Jacobians and link rates.

    axes rows: torso pitch, then per arm (shoulder pitch, shoulder roll,
    elbow, wrist roll), all world-frame unit vectors.
    """

    keypoints: Keypoints
    axes: np.ndarray            # (9, 3)
    root_pos: np.ndarray
    root_yaw: float

    # (axis row, origin attr, joint index) per arm chain entry.
    ARM_AXIS_ROWS = ((1, "shoulder", 0), (2, "shoulder", 1), (3, "elbow", 2),
                     (4, "wrist", 3))

    def position_jacobian(self, target: str) -> np.ndarray:
        """d(point)/d(joints), (3, 14). target: head | wrist_l | wrist_r.

        Wrist roll spins about an axis through the wrist itself, so its
        position column is zero.
        """
        kp = self.keypoints
        jac = np.zeros((3, 14))
        if target == "head":
            jac[:, TORSO_PITCH] = np.cross(self.axes[0], kp.head - self.root_pos)
            return jac
        arm = 0 if target == "wrist_l" else 1
        idx = LEFT_ARM if arm == 0 else RIGHT_ARM
        point = kp.wrist_pos[arm]
        origins = {"shoulder": kp.shoulder_pos[arm], "elbow": kp.elbow_pos[arm],
                   "wrist": kp.wrist_pos[arm]}
        jac[:, TORSO_PITCH] = np.cross(self.axes[0], point - self.root_pos)
        base_row = 1 + 4 * arm
        for row_off, origin_name, j_off in self.ARM_AXIS_ROWS[:3]:
            jac[:, idx[j_off]] = np.cross(
                self.axes[base_row + row_off - 1], point - origins[origin_name]
            )
        return jac

    def angular_velocity(self, target: str, joint_vel: np.ndarray,
                         yaw_rate: float) -> np.ndarray:
        omega = np.array([0.0, 0.0, yaw_rate])
        omega = omega + self.axes[0] * joint_vel[TORSO_PITCH]
        if target == "head":
            return omega
        arm = 0 if target == "wrist_l" else 1
        idx = LEFT_ARM if arm == 0 else RIGHT_ARM
        base_row = 1 + 4 * arm
        for row_off, _origin, j_off in self.ARM_AXIS_ROWS:
            omega = omega + self.axes[base_row + row_off - 1] * joint_vel[idx[j_off]]
        return omega


def fk_full(model: RobotModel, joint_pos: np.ndarray, root_pos: np.ndarray,
            root_yaw: float) -> FKResult:
    q = np.ascontiguousarray(joint_pos, dtype=np.float64)
    root = np.ascontiguousarray(root_pos, dtype=np.float64)
    head, shoulders, elbows, wrists, quats, axes = accel.fk_core(
        q, root, float(root_yaw), model.torso_length, model.upper_arm_length,
        model.forearm_length, model.shoulder_half_width,
    )
    kp = Keypoints(
        head=head, wrist_pos=wrists, wrist_orient=quats[3:5],
        elbow_pos=elbows, elbow_orient=quats[1:3], shoulder_pos=shoulders,
        torso_orient=quats[0],
    )
    return FKResult(keypoints=kp, axes=axes, root_pos=root, root_yaw=float(root_yaw))


def fk_keypoints(model: RobotModel, joint_pos: np.ndarray, root_pos: np.ndarray,
                 root_yaw: float) -> Keypoints:
    """Evaluate the kinematic chain at the given joint vector and root pose."""
    return fk_full(model, joint_pos, root_pos, root_yaw).keypoints


def state_fk(model: RobotModel, state) -> FKResult:
    """FK of a simulator state, memoized on the state object."""
    cached = getattr(state, "_fk_cache", None)
    if cached is None:
        cached = fk_full(model, state.joint_pos, state.root_pos, state.root_yaw)
        state._fk_cache = cached
    return cached


def fk_jacobian(model: RobotModel, joint_pos: np.ndarray, root_pos: np.ndarray,
                root_yaw: float) -> dict[str, np.ndarray]:
    """Geometric position Jacobians d(keypoint)/d(joint), each (3, J).

    Revolute columns are axis x (point - origin); base pseudo-joints and leg
    extensions contribute nothing because the root pose is held fixed here.
    """
    res = fk_full(model, joint_pos, root_pos, root_yaw)
    return {t: res.position_jacobian(t) for t in ("head", "wrist_l", "wrist_r")}


def mat_to_quat(m: np.ndarray) -> np.ndarray:
    """Rotation matrix to unit quaternion [w, x, y, z], w >= 0."""
    out = np.empty(4)
    accel._mat_quat(np.ascontiguousarray(m, dtype=np.float64), out)
    return out


def solve_stance(model: RobotModel, head_height: float, torso_pitch: float
                 ) -> tuple[float, float]:
    """Solve (mean leg crouch, torso pitch) reaching a head height.

    Prefers the legs at the requested pitch; when the legs saturate the torso
    pitch is adjusted (bending further to go lower, straightening to go
    higher). Raises ValueError when the height is outside the reachable band.
    """
    base = model.standing_root_height
    crouch_min = model.leg_extension_min - model.leg_extension_max
    max_pitch = float(model.joint_high[TORSO_PITCH])
    sign = 1.0 if torso_pitch >= 0 else -1.0

    crouch = head_height - base - model.torso_length * np.cos(torso_pitch)
    if crouch_min <= crouch <= 0.0:
        return float(crouch), torso_pitch
    if crouch > 0.0:
        # Too high at this pitch: straighten the torso, legs fully extended.
        cos_needed = (head_height - base) / model.torso_length
        if cos_needed > 1.0 + 1e-9:
            raise ValueError(
                f"head height {head_height:.3f} m above reachable maximum"
            )
        return 0.0, sign * float(np.arccos(min(cos_needed, 1.0)))
    # Too low: legs at full crouch, pitch forward for the remainder.
    cos_needed = (head_height - base - crouch_min) / model.torso_length
    if cos_needed < np.cos(max_pitch) - 1e-9:
        raise ValueError(
            f"head height {head_height:.3f} m below reachable minimum"
        )
    return float(crouch_min), sign * float(np.arccos(min(max(cos_needed, -1.0), 1.0)))
