"""State container and the fixed-timestep stepper for the reduced humanoid.

The stepper is functional: ``step(model, state, action, params, rng)`` returns
a new state and never mutates its input. All per-episode memory the dynamics
need (delayed-action queue, gait bookkeeping) lives inside RobotState, so a
state value plus an action fully determines the next state for a given RNG
stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .. import accel
from ..mathcore import wrap_angle
from .kinematics import state_fk
from .model import (
    RobotModel,
    NUM_JOINTS,
    POSITIONAL_JOINTS,
    TORSO_PITCH,
)
from .randomization import EpisodeParams


class SimulationFault(RuntimeError):
    """Raised when integration produces a non-finite state."""


@dataclass
class RobotState:
    joint_pos: np.ndarray                  # (J,), entries 0:3 always zero
    joint_vel: np.ndarray                  # (J,), entries 0:3 are base velocities
    root_pos: np.ndarray                   # (3,) world
    root_yaw: float
    root_vel: np.ndarray                   # (3,) world
    root_ang_vel: float                    # yaw rate
    gravity_dir: np.ndarray                # (3,) unit, torso frame
    gait_phase: float
    foot_contact: np.ndarray               # (2,) 0/1 flags, left then right
    foot_normal_force: np.ndarray          # (2,) N
    foot_tangential_force: np.ndarray      # (2,) N
    foot_slip_speed: np.ndarray            # (2,) m/s while in contact
    torques_applied: np.ndarray            # (J,) N*m
    t: float = 0.0
    # Gait bookkeeping carried across steps.
    foot_liftoff_t: np.ndarray = field(default_factory=lambda: np.zeros(2))
    foot_air_time_td: np.ndarray = field(default_factory=lambda: np.zeros(2))
    # Delayed-action pipeline, oldest first.
    action_queue: tuple = ()

    def copy(self) -> "RobotState":
        return RobotState(
            joint_pos=self.joint_pos.copy(),
            joint_vel=self.joint_vel.copy(),
            root_pos=self.root_pos.copy(),
            root_yaw=self.root_yaw,
            root_vel=self.root_vel.copy(),
            root_ang_vel=self.root_ang_vel,
            gravity_dir=self.gravity_dir.copy(),
            gait_phase=self.gait_phase,
            foot_contact=self.foot_contact.copy(),
            foot_normal_force=self.foot_normal_force.copy(),
            foot_tangential_force=self.foot_tangential_force.copy(),
            foot_slip_speed=self.foot_slip_speed.copy(),
            torques_applied=self.torques_applied.copy(),
            t=self.t,
            foot_liftoff_t=self.foot_liftoff_t.copy(),
            foot_air_time_td=self.foot_air_time_td.copy(),
            action_queue=self.action_queue,
        )


def gravity_in_torso_frame(torso_pitch: float) -> np.ndarray:
    return np.array([np.sin(torso_pitch), 0.0, -np.cos(torso_pitch)])


def contact_flags(model: RobotModel, gait_phase: float, speed: float) -> np.ndarray:
    """Gait/contact rule: quasi-static below the walk threshold has both feet
    down; above it exactly one foot is down outside the double-support windows
    centered on the phase transitions."""
    if speed <= model.walk_speed_threshold:
        return np.array([1.0, 1.0])
    d4 = model.double_support_fraction / 4.0
    p = gait_phase % 1.0
    left = 1.0 if (p < 0.5 + d4 or p > 1.0 - d4) else 0.0
    right = 1.0 if (p > 0.5 - d4 or p < d4) else 0.0
    return np.array([left, right])


def initial_state(model: RobotModel, joint_pos: np.ndarray | None = None,
                  root_xy: np.ndarray | None = None, root_yaw: float = 0.0,
                  delay_steps: int = 0) -> RobotState:
    """Rest state at the given pose with a pre-filled hold-action queue."""
    q = np.zeros(NUM_JOINTS) if joint_pos is None else np.asarray(joint_pos, float).copy()
    q[0:3] = 0.0
    root = np.zeros(3)
    if root_xy is not None:
        root[0:2] = root_xy
    root[2] = model.root_height(q)
    hold = q.copy()
    return RobotState(
        joint_pos=q,
        joint_vel=np.zeros(NUM_JOINTS),
        root_pos=root,
        root_yaw=root_yaw,
        root_vel=np.zeros(3),
        root_ang_vel=0.0,
        gravity_dir=gravity_in_torso_frame(q[TORSO_PITCH]),
        gait_phase=0.0,
        foot_contact=np.array([1.0, 1.0]),
        foot_normal_force=np.full(2, 0.5 * model.mass * 9.81),
        foot_tangential_force=np.zeros(2),
        foot_slip_speed=np.zeros(2),
        torques_applied=np.zeros(NUM_JOINTS),
        t=0.0,
        action_queue=tuple(hold for _ in range(delay_steps + 1)),
    )


def delay_steps_for(params: EpisodeParams, dt: float) -> int:
    return int(round((params.control_delay + params.step_delay) / dt))


def step(model: RobotModel, state: RobotState, action: np.ndarray,
         params: EpisodeParams, rng: np.random.Generator, dt: float = 0.02
         ) -> RobotState:
    """Advance one control step.

    Pipeline: delayed action -> PD torques with RFI noise on the positional
    joints -> semi-implicit Euler -> base velocity lags with friction-scaled
    gain -> scheduled pushes -> gait phase / contact forces -> time.
    """
    action = np.asarray(action, dtype=np.float64)
    if action.shape != (NUM_JOINTS,):
        raise ValueError(f"action must have shape ({NUM_JOINTS},)")
    if not np.all(np.isfinite(action)):
        raise ValueError("action must be finite")

    delay = delay_steps_for(params, dt)
    queue = state.action_queue + (action.copy(),)
    if len(queue) > delay + 1:
        queue = queue[len(queue) - (delay + 1):]
    effective = queue[0]

    pos = state.joint_pos[POSITIONAL_JOINTS]
    vel = state.joint_vel[POSITIONAL_JOINTS]
    kp = model.kp[POSITIONAL_JOINTS] * params.p_gain_scale
    kd = model.kd[POSITIONAL_JOINTS] * params.d_gain_scale
    lim = model.torque_limit[POSITIONAL_JOINTS]
    rfi = params.rfi_fraction * lim * rng.uniform(-1.0, 1.0, lim.shape[0])
    inv_inertia = 1.0 / (model.inertia[POSITIONAL_JOINTS] * params.mass_scale)
    new_pos_j, new_vel_j, tau_j = accel.pd_joint_step(
        pos, vel, effective[POSITIONAL_JOINTS], kp, kd, inv_inertia, lim, rfi, dt
    )

    new_joint_pos = np.zeros(NUM_JOINTS)
    new_joint_pos[POSITIONAL_JOINTS] = new_pos_j
    new_joint_vel = np.zeros(NUM_JOINTS)
    new_joint_vel[POSITIONAL_JOINTS] = new_vel_j
    torques = np.zeros(NUM_JOINTS)
    torques[POSITIONAL_JOINTS] = tau_j

    # Base dynamics: first-order lag toward the commanded body-frame velocity,
    # with gain scaled down on slippery ground.
    cmd = np.clip(effective[0:3], model.joint_low[0:3], model.joint_high[0:3])
    gain = min(1.0, params.friction / model.friction_ref)
    c, s = np.cos(state.root_yaw), np.sin(state.root_yaw)
    v_cmd_world = gain * np.array([c * cmd[0] - s * cmd[1], s * cmd[0] + c * cmd[1]])
    v_xy = state.root_vel[0:2] + (v_cmd_world - state.root_vel[0:2]) * dt / model.base_vel_tau
    ang = state.root_ang_vel + (gain * cmd[2] - state.root_ang_vel) * dt / model.yaw_rate_tau

    t_new = state.t + dt
    if params.push_interval > 0:
        k_prev = int(np.floor(state.t / params.push_interval + 1e-12))
        k_new = int(np.floor(t_new / params.push_interval + 1e-12))
        if k_new > k_prev:
            phi = rng.uniform(0.0, 2.0 * np.pi)
            v_xy = v_xy + params.push_speed * np.array([np.cos(phi), np.sin(phi)])

    root_z = model.root_height(new_joint_pos)
    root_pos = np.array([
        state.root_pos[0] + v_xy[0] * dt,
        state.root_pos[1] + v_xy[1] * dt,
        root_z,
    ])
    root_vel = np.array([v_xy[0], v_xy[1], (root_z - state.root_pos[2]) / dt])
    root_yaw = wrap_angle(state.root_yaw + ang * dt)

    # Base velocity state mirrored into the pseudo-joint velocity slots
    # (body frame), so observation and reward code sees one joint vector.
    new_joint_vel[0] = c * v_xy[0] + s * v_xy[1]
    new_joint_vel[1] = -s * v_xy[0] + c * v_xy[1]
    new_joint_vel[2] = ang

    speed = float(np.hypot(v_xy[0], v_xy[1]))
    freq = model.gait_base_freq + model.gait_speed_gain * speed
    if speed > model.walk_speed_threshold:
        phase = (state.gait_phase + freq * dt) % 1.0
    else:
        phase = state.gait_phase
    contacts = contact_flags(model, phase, speed)

    n_contact = float(contacts.sum())
    weight = params.mass_scale * model.mass * 9.81
    normal = (weight / n_contact) * contacts if n_contact > 0 else np.zeros(2)
    lag = v_cmd_world - v_xy
    lag_speed = float(np.hypot(lag[0], lag[1]))
    tangential = np.where(
        contacts > 0,
        params.mass_scale * model.mass * lag_speed / model.base_vel_tau / max(n_contact, 1.0),
        0.0,
    )
    slip = np.where(contacts > 0, lag_speed, 0.0)

    # Touchdown / liftoff bookkeeping for the air-time reward.
    liftoff = state.foot_liftoff_t.copy()
    air_td = np.zeros(2)
    for i in range(2):
        was, now = state.foot_contact[i] > 0, contacts[i] > 0
        if was and not now:
            liftoff[i] = state.t
        elif now and not was:
            air_td[i] = t_new - liftoff[i]

    new_state = RobotState(
        joint_pos=new_joint_pos,
        joint_vel=new_joint_vel,
        root_pos=root_pos,
        root_yaw=root_yaw,
        root_vel=root_vel,
        root_ang_vel=ang,
        gravity_dir=gravity_in_torso_frame(new_joint_pos[TORSO_PITCH]),
        gait_phase=phase,
        foot_contact=contacts,
        foot_normal_force=normal,
        foot_tangential_force=tangential,
        foot_slip_speed=slip,
        torques_applied=torques,
        t=t_new,
        foot_liftoff_t=liftoff,
        foot_air_time_td=air_td,
        action_queue=queue,
    )
    if not (np.all(np.isfinite(new_joint_pos)) and np.all(np.isfinite(root_pos))
            and np.all(np.isfinite(new_joint_vel))):
        raise SimulationFault(
            f"non-finite state at t={t_new:.3f}: joints {new_joint_pos}, root {root_pos}"
        )
    return new_state


@dataclass
class TerminationResult:
    terminated: bool
    reason: str = ""


def check_termination(model: RobotModel, state: RobotState, ref_frame
                      ) -> TerminationResult:
    """Fall, excessive torso tilt, or tracking loss against the reference.

    ``ref_frame`` needs head_pos and wrist_pos fields; the tracking criterion
    is the mean distance over the three keybodies.
    """
    if state.root_pos[2] < 0.3:
        return TerminationResult(True, "fall")
    if abs(state.joint_pos[TORSO_PITCH]) > np.deg2rad(60.0):
        return TerminationResult(True, "tilt")
    kp = state_fk(model, state).keypoints
    ref_kb = np.vstack([ref_frame.head_pos, ref_frame.wrist_pos])
    dist = float(np.mean(np.linalg.norm(kp.keybodies - ref_kb, axis=1)))
    if dist > 1.5:
        return TerminationResult(True, "tracking")
    return TerminationResult(False)
