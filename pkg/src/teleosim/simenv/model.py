"""Reduced humanoid description: joint layout, limits, gains, link geometry.

The 14-joint reduced model: three base pseudo-joints driven as velocity
targets (forward, lateral, yaw rate), two prismatic leg-extension joints
expressed as crouch displacement below full extension (so the zero pose is
standing), torso pitch, and a 4-joint arm chain per side (shoulder pitch,
shoulder roll, elbow, wrist roll). The full-scale 29-joint action space is
retained only as a config constant, not as a kinematic chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

JOINT_NAMES = (
    "drive_x",
    "drive_y",
    "yaw_rate",
    "leg_l",
    "leg_r",
    "torso_pitch",
    "l_shoulder_pitch",
    "l_shoulder_roll",
    "l_elbow",
    "l_wrist_roll",
    "r_shoulder_pitch",
    "r_shoulder_roll",
    "r_elbow",
    "r_wrist_roll",
)

NUM_JOINTS = len(JOINT_NAMES)

# Index groups.
BASE_JOINTS = slice(0, 3)
POSITIONAL_JOINTS = slice(3, NUM_JOINTS)
LEG_JOINTS = (3, 4)
TORSO_PITCH = 5
LEFT_ARM = (6, 7, 8, 9)
RIGHT_ARM = (10, 11, 12, 13)
LOWER_BODY = (0, 1, 2, 3, 4)
UPPER_BODY = tuple(range(5, NUM_JOINTS))

KEYBODY_NAMES = ("head", "wrist_l", "wrist_r")

# Action dimension of the full-scale robot, kept for config parity only.
FULL_SCALE_ACTION_DIM = 29


@dataclass(frozen=True)
class RobotModel:
    """Geometry, limits and actuation constants of the reduced humanoid."""

    torso_length: float = 0.35
    upper_arm_length: float = 0.22
    forearm_length: float = 0.20
    shoulder_half_width: float = 0.18
    leg_extension_min: float = 0.35
    leg_extension_max: float = 0.80
    ground_offset: float = 0.05
    mass: float = 30.0
    control_dt: float = 0.02

    # Base velocity dynamics: first-order lags toward the commanded values.
    base_vel_tau: float = 0.25
    yaw_rate_tau: float = 0.15
    friction_ref: float = 1.0

    # Gait abstraction.
    gait_base_freq: float = 1.5
    gait_speed_gain: float = 0.8
    double_support_fraction: float = 0.2
    walk_speed_threshold: float = 0.2

    # Shoulder roll is sign-mirrored in the kinematics so positive values
    # swing either arm outward; both sides therefore share the same limits.
    joint_low: np.ndarray = field(
        default_factory=lambda: np.array(
            [-2.5, -1.5, -2.0, -0.45, -0.45, -1.2,
             -2.5, -0.3, 0.0, -2.0, -2.5, -0.3, 0.0, -2.0]
        )
    )
    joint_high: np.ndarray = field(
        default_factory=lambda: np.array(
            [2.5, 1.5, 2.0, 0.0, 0.0, 1.2,
             2.5, 2.2, 2.4, 2.0, 2.5, 2.2, 2.4, 2.0]
        )
    )
    # Velocity limits (joints 0:3 are the base velocity states themselves).
    joint_vel_limit: np.ndarray = field(
        default_factory=lambda: np.array(
            [2.5, 1.5, 2.0, 2.0, 2.0, 8.0,
             12.0, 12.0, 12.0, 12.0, 12.0, 12.0, 12.0, 12.0]
        )
    )
    kp: np.ndarray = field(
        default_factory=lambda: np.array(
            [0.0, 0.0, 0.0, 100.0, 100.0, 80.0,
             60.0, 60.0, 60.0, 40.0, 60.0, 60.0, 60.0, 40.0]
        )
    )
    kd: np.ndarray = field(
        default_factory=lambda: np.array(
            [0.0, 0.0, 0.0, 20.0, 20.0, 18.0,
             16.0, 16.0, 16.0, 12.0, 16.0, 16.0, 16.0, 12.0]
        )
    )
    # Effective inertia per positional joint (unit-mass normalized chain).
    inertia: np.ndarray = field(
        default_factory=lambda: np.ones(NUM_JOINTS)
    )
    torque_limit: np.ndarray = field(
        default_factory=lambda: np.array(
            [1e9, 1e9, 1e9, 800.0, 800.0, 120.0,
             60.0, 60.0, 60.0, 30.0, 60.0, 60.0, 60.0, 30.0]
        )
    )

    @property
    def num_joints(self) -> int:
        return NUM_JOINTS

    @property
    def standing_root_height(self) -> float:
        return self.ground_offset + self.leg_extension_max

    @property
    def standing_head_height(self) -> float:
        return self.standing_root_height + self.torso_length

    @property
    def max_reach(self) -> float:
        return self.upper_arm_length + self.forearm_length

    def root_height(self, joint_pos: np.ndarray) -> float:
        """Kinematic root height from the leg crouch displacements."""
        return self.standing_root_height + 0.5 * (joint_pos[3] + joint_pos[4])


def default_model() -> RobotModel:
    return RobotModel()
