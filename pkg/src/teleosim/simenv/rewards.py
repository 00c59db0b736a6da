"""Per-step reward terms and their weighted aggregation.

Every term is the raw expression value; the weighted total is the exact
ordered sum of weight * term over REWARD_TERMS. Tracking terms compare
against a reference frame object carrying the fields produced by the motion
toolchain (joint targets and velocities, root pose and velocities, keybody
positions and velocities, wrist orientations, elbow positions).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mathcore import quat_angle, wrap_angle
from .kinematics import state_fk
from .model import RobotModel, LOWER_BODY, UPPER_BODY, TORSO_PITCH

REWARD_TERMS = (
    "torque",
    "torque_limits",
    "dof_pos_limits",
    "dof_vel_limits",
    "termination",
    "dof_acc",
    "dof_vel",
    "action_rate_lower",
    "action_rate_upper",
    "feet_air_time",
    "stumble",
    "slippage",
    "feet_orientation",
    "in_the_air",
    "orientation",
    "dof_pos_tracking",
    "dof_vel_tracking",
    "extend_body_pos",
    "body_pos_mr",
    "body_rotation",
    "body_velocity",
    "body_ang_velocity",
    "hand_rotation",
    "amp",
)

# Published weight column, kept verbatim as the engine default. The
# termination entry is read as -1e4 (scientific notation, as in the
# 1.25e4 stumble row).
TABLE_WEIGHTS = {
    "torque": -0.0001,
    "torque_limits": -2.0,
    "dof_pos_limits": -625.0,
    "dof_vel_limits": -50.0,
    "termination": -1.0e4,
    "dof_acc": -1.1e-5,
    "dof_vel": -0.004,
    "action_rate_lower": -1.0,
    "action_rate_upper": -0.3,
    "feet_air_time": 2500.0,
    "stumble": -1.25e4,
    "slippage": -80.0,
    "feet_orientation": -62.5,
    "in_the_air": -750.0,
    "orientation": -50.0,
    "dof_pos_tracking": 100.0,
    "dof_vel_tracking": 10.0,
    "extend_body_pos": 250.0,
    "body_pos_mr": 150.0,
    "body_rotation": 400.0,
    "body_velocity": 80.0,
    "body_ang_velocity": 8.0,
    "hand_rotation": 500.0,
    "amp": 500.0,
}


def default_reward_weights() -> dict:
    return dict(TABLE_WEIGHTS)


def training_reward_weights() -> dict:
    """Weights actually used for training runs.

    The published hand-rotation row is a squared error with a positive
    weight, which would reward orientation mismatch if optimized as printed;
    training flips its sign and keeps every other entry.
    """
    w = dict(TABLE_WEIGHTS)
    w["hand_rotation"] = -500.0
    return w


@dataclass
class RewardBreakdown:
    terms: dict
    weights: dict
    total: float

    @classmethod
    def from_terms(cls, terms: dict, weights: dict) -> "RewardBreakdown":
        total = 0.0
        for name in REWARD_TERMS:
            total += weights[name] * terms[name]
        return cls(terms=terms, weights=weights, total=total)

    def weighted(self, name: str) -> float:
        return self.weights[name] * self.terms[name]

    def as_dict(self) -> dict:
        d = {name: self.terms[name] for name in REWARD_TERMS}
        d["total"] = self.total
        return d


def compute_reward(model: RobotModel, state, prev_state, action: np.ndarray,
                   prev_action: np.ndarray, ref, amp_score: float = 0.0,
                   terminated: bool = False, weights: dict | None = None,
                   dt: float = 0.02) -> RewardBreakdown:
    """Evaluate every reward row for one transition."""
    w = TABLE_WEIGHTS if weights is None else weights
    q, qd = state.joint_pos, state.joint_vel
    tau = state.torques_applied
    terms = {}

    terms["torque"] = float(np.dot(tau, tau))
    terms["torque_limits"] = float(np.sum(np.abs(tau) > model.torque_limit))
    terms["dof_pos_limits"] = float(
        np.sum((q[3:] < model.joint_low[3:]) | (q[3:] > model.joint_high[3:]))
    )
    terms["dof_vel_limits"] = float(np.sum(np.abs(qd) > model.joint_vel_limit))
    terms["termination"] = 1.0 if terminated else 0.0
    acc = (qd - prev_state.joint_vel) / dt
    terms["dof_acc"] = float(np.dot(acc, acc))
    terms["dof_vel"] = float(np.dot(qd, qd))
    d_lower = action[list(LOWER_BODY)] - prev_action[list(LOWER_BODY)]
    d_upper = action[list(UPPER_BODY)] - prev_action[list(UPPER_BODY)]
    terms["action_rate_lower"] = float(np.dot(d_lower, d_lower))
    terms["action_rate_upper"] = float(np.dot(d_upper, d_upper))
    terms["feet_air_time"] = float(
        np.sum(np.where(state.foot_air_time_td > 0, state.foot_air_time_td - 0.3, 0.0))
    )
    terms["stumble"] = float(
        np.sum(state.foot_tangential_force > 5.0 * state.foot_normal_force)
    )
    in_contact = state.foot_normal_force >= 1.0
    terms["slippage"] = float(np.sum(state.foot_slip_speed ** 2 * in_contact))
    tilt = abs(np.sin(q[TORSO_PITCH]))
    terms["feet_orientation"] = float(tilt * np.sum(state.foot_contact))
    terms["in_the_air"] = 1.0 if np.all(state.foot_normal_force < 1.0) else 0.0
    terms["orientation"] = float(tilt)

    terms["dof_pos_tracking"] = float(
        np.exp(-0.25 * np.linalg.norm(ref.joint_pos - q))
    )
    terms["dof_vel_tracking"] = float(
        np.exp(-0.25 * np.sum((ref.joint_vel - qd) ** 2))
    )
    kp = state_fk(model, state).keypoints
    d_ext = kp.elbow_pos - ref.elbow_pos
    terms["extend_body_pos"] = float(np.exp(-0.5 * np.sum(d_ext ** 2)))
    ref_kb = np.vstack([ref.head_pos, ref.wrist_pos])
    d_kb = kp.keybodies - ref_kb
    terms["body_pos_mr"] = float(np.exp(-0.5 * np.sum(d_kb ** 2)))
    rot_err = abs(wrap_angle(state.root_yaw - ref.root_yaw)) + abs(
        q[TORSO_PITCH] - ref.joint_pos[TORSO_PITCH]
    )
    terms["body_rotation"] = float(np.exp(-0.1 * rot_err))
    terms["body_velocity"] = float(
        np.exp(-10.0 * np.linalg.norm(state.root_vel - ref.root_vel))
    )
    terms["body_ang_velocity"] = float(
        np.exp(-0.01 * abs(state.root_ang_vel - ref.root_yaw_rate))
    )
    hand_err = 0.0
    for i in range(2):
        hand_err += quat_angle(kp.wrist_orient[i], ref.wrist_orient[i]) ** 2
    terms["hand_rotation"] = hand_err / 2.0
    terms["amp"] = float(amp_score)

    return RewardBreakdown.from_terms(terms, w)
