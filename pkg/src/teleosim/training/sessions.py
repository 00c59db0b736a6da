"""Episode sessions: the environment plus everything a policy needs around it.

A session owns one reduced-humanoid environment, a reference track, an
episode randomization draw, and the observation pipeline. The teacher session
builds privileged observations; the student session builds history-based
observations whose global positions come from a noise source (injected
diffusion during training, simulated 10 Hz odometry during evaluation and
serving, or none).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..mathcore import DriftModel, wrap_angle
from ..motiondata.refs import ReferenceTrack
from ..odometry import CorrectionTracker, OdometryProvider
from ..policy.observations import (
    HistoryBuffer,
    build_student_obs,
    build_teacher_obs,
    state_frame_vec,
)
from ..simenv.env import check_termination, initial_state, step, delay_steps_for
from ..simenv.kinematics import state_fk
from ..simenv.model import RobotModel
from ..simenv.randomization import (
    EpisodeParams,
    RandomizationConfig,
    nominal_params,
    sample_randomization,
)
from ..simenv.rewards import compute_reward, training_reward_weights
from .drift import DriftInjector


def _rot2(yaw: float) -> np.ndarray:
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s], [s, c]])


def _estimate_keypoints(true_kp: np.ndarray, true_root: np.ndarray,
                        true_yaw: float, est_root: np.ndarray,
                        est_yaw: float) -> np.ndarray:
    """Re-express body-frame keypoint offsets at an estimated global pose."""
    rel = true_kp - true_root
    r = _rot2(est_yaw - true_yaw)
    out = rel.copy()
    out[:, 0:2] = rel[:, 0:2] @ r.T
    out[:, 0] += est_root[0]
    out[:, 1] += est_root[1]
    out[:, 2] += est_root[2]
    return out


@dataclass
class EpisodeRecord:
    """Ground-truth bookkeeping of one rollout for the metric suite."""

    keybody_pos: list = field(default_factory=list)
    root_pos: list = field(default_factory=list)
    wrist_orient: list = field(default_factory=list)
    ref_index: list = field(default_factory=list)
    terminated: bool = False
    reason: str = ""

    def arrays(self):
        return (np.array(self.keybody_pos), np.array(self.root_pos),
                np.array(self.wrist_orient), np.array(self.ref_index, dtype=int))


class TeacherSession:
    """Privileged-observation episode loop for PPO teacher training."""

    def __init__(self, model: RobotModel, tracks: list[ReferenceTrack],
                 rand_cfg: RandomizationConfig | None, seed: int,
                 reward_weights: dict | None = None, dt: float = 0.02,
                 termination_grace: float = 2.0, spawn_offset: bool = True,
                 reward_scale: float = 1.0):
        self.model = model
        self.tracks = tracks
        self.rand_cfg = rand_cfg
        self.rng = np.random.default_rng(seed)
        self.dt = dt
        self.grace = termination_grace
        self.spawn_offset = spawn_offset
        self.weights = reward_weights or training_reward_weights()
        self.reward_scale = reward_scale
        self.track: ReferenceTrack | None = None
        self.params: EpisodeParams | None = None
        self.state = None
        self.frame = 0
        self.prev_action = None
        self.last_breakdown = None

    @property
    def obs_dim(self) -> int:
        from ..policy.observations import TEACHER_OBS_DIM
        return TEACHER_OBS_DIM

    def reset(self, track: ReferenceTrack | None = None,
              params: EpisodeParams | None = None) -> np.ndarray:
        self.track = track if track is not None else \
            self.tracks[int(self.rng.integers(len(self.tracks)))]
        if params is not None:
            self.params = params
        elif self.rand_cfg is not None:
            self.params = sample_randomization(self.rand_cfg, self.rng)
        else:
            self.params = nominal_params()
        ref0 = self.track.at(0)
        root_xy = ref0.root_pos[0:2].copy()
        yaw = ref0.root_yaw
        if self.spawn_offset:
            ang = self.rng.uniform(0.0, 2 * np.pi)
            root_xy = root_xy + self.params.spawn_distance * np.array(
                [np.cos(ang), np.sin(ang)]
            )
            yaw = wrap_angle(yaw + self.params.spawn_heading)
        self.state = initial_state(
            self.model, ref0.joint_pos, root_xy, yaw,
            delay_steps=delay_steps_for(self.params, self.dt),
        )
        self.frame = 0
        self.prev_action = ref0.joint_pos.copy()
        return self._obs()

    def _obs(self) -> np.ndarray:
        ref_next = self.track.at(self.frame + 1)
        return build_teacher_obs(self.model, self.state, ref_next,
                                 self.prev_action, self.params)

    def current_obs(self) -> np.ndarray:
        return self._obs()

    def step(self, action: np.ndarray, amp_score: float = 0.0):
        prev_state = self.state
        self.state = step(self.model, self.state, action, self.params,
                          self.rng, self.dt)
        self.frame += 1
        ref = self.track.at(self.frame)
        term = check_termination(self.model, self.state, ref)
        if term.terminated and term.reason == "tracking" and self.state.t < self.grace:
            term.terminated = False
        breakdown = compute_reward(
            self.model, self.state, prev_state, action, self.prev_action, ref,
            amp_score=amp_score, terminated=term.terminated,
            weights=self.weights, dt=self.dt,
        )
        self.last_breakdown = breakdown
        timeout = self.frame >= self.track.n_frames - 1
        done = term.terminated or timeout
        self.prev_action = np.asarray(action, float).copy()
        obs = self._obs()
        info = {
            "terminated": term.terminated,
            "reason": term.reason,
            "timeout": timeout,
            "prev_state": prev_state,
        }
        return obs, breakdown.total * self.reward_scale, done, info


NOISE_INJECTED = "injected"
NOISE_ODOMETRY = "odometry"
NOISE_NONE = "none"


class StudentSession:
    """History-observation episode loop for distillation and evaluation.

    noise_mode selects where the global position estimate comes from:
    "injected" evolves a diffusion deviation at the control rate (training),
    "odometry" runs 10 Hz providers for the robot and the operator reference
    with closed- or open-loop correction (evaluation, serving), "none" uses
    ground truth (debugging and held-out scoring).
    """

    def __init__(self, model: RobotModel, tracks: list[ReferenceTrack],
                 seed: int, noise_mode: str = NOISE_INJECTED,
                 drift: DriftModel | None = None,
                 operator_drift: DriftModel | None = None,
                 correction_mode: str = "closed_loop",
                 params: EpisodeParams | None = None,
                 rand_cfg: RandomizationConfig | None = None,
                 dt: float = 0.02, record: bool = False,
                 tracking_termination: bool = True):
        if noise_mode not in (NOISE_INJECTED, NOISE_ODOMETRY, NOISE_NONE):
            raise ValueError(f"unknown noise mode {noise_mode!r}")
        self.tracking_termination = tracking_termination
        self.model = model
        self.tracks = tracks
        self.rng = np.random.default_rng(seed)
        self.noise_mode = noise_mode
        self.drift = drift
        self.operator_drift = operator_drift
        self.correction_mode = correction_mode
        self.fixed_params = params
        self.rand_cfg = rand_cfg
        self.dt = dt
        self.record = record
        self.history = HistoryBuffer()
        self.track: ReferenceTrack | None = None
        self.state = None
        self.frame = 0
        self.prev_action = None
        self.injector: DriftInjector | None = None
        self.robot_odom: OdometryProvider | None = None
        self.operator_odom: OdometryProvider | None = None
        self.tracker: CorrectionTracker | None = None
        self.episode: EpisodeRecord | None = None
        self.last_correction = np.zeros(3)

    def reset(self, track: ReferenceTrack | None = None) -> np.ndarray:
        self.track = track if track is not None else \
            self.tracks[int(self.rng.integers(len(self.tracks)))]
        if self.fixed_params is not None:
            self.params = self.fixed_params
        elif self.rand_cfg is not None:
            self.params = sample_randomization(self.rand_cfg, self.rng)
        else:
            self.params = nominal_params()
        ref0 = self.track.at(0)
        self.state = initial_state(
            self.model, ref0.joint_pos, ref0.root_pos[0:2], ref0.root_yaw,
            delay_steps=delay_steps_for(self.params, self.dt),
        )
        self.frame = 0
        self.prev_action = ref0.joint_pos.copy()
        if self.noise_mode == NOISE_INJECTED and self.drift is not None:
            self.injector = DriftInjector(
                self.drift, np.random.default_rng(self.rng.integers(2**63))
            )
        if self.noise_mode == NOISE_ODOMETRY:
            self.robot_odom = OdometryProvider(
                "robot", self.drift,
                np.random.default_rng(self.rng.integers(2**63)),
            )
            self.operator_odom = OdometryProvider(
                "operator", self.operator_drift,
                np.random.default_rng(self.rng.integers(2**63)),
            )
            self.tracker = CorrectionTracker(self.correction_mode)
            self._feed_odometry()
        self.history.reset(state_frame_vec(self.state), self.prev_action)
        self.episode = EpisodeRecord() if self.record else None
        return self._obs()

    def _feed_odometry(self) -> None:
        st = self.state
        self.robot_odom.observe(st.t, st.root_pos, st.root_yaw, st.root_vel)
        ref = self.track.at(self.frame)
        self.operator_odom.observe(st.t, ref.root_pos, ref.root_yaw, ref.root_vel)

    def _current_estimates(self):
        """(fk, estimated keybodies, estimated root pose, odom delta)."""
        st = self.state
        kp = state_fk(self.model, st).keypoints
        true_kb = kp.keybodies
        ref_now = self.track.at(self.frame)
        if self.noise_mode == NOISE_INJECTED and self.injector is not None:
            dev = self.injector.deviation
            est = true_kb + dev
            est_root = st.root_pos + dev
            delta_world = ref_now.root_pos - est_root
            r = _rot2(-st.root_yaw)
            delta = np.array([*(r @ delta_world[0:2]), delta_world[2]])
            return kp, est, est_root, st.root_yaw, delta
        if self.noise_mode == NOISE_ODOMETRY:
            rob = self.robot_odom.latest(st.t)
            op = self.operator_odom.latest(st.t)
            delta, _dyaw = self.tracker.update(rob, op)
            if self.correction_mode == "closed_loop":
                est_root, est_yaw = rob.position, rob.yaw
            else:
                est_root, est_yaw = self.tracker.assumed_pose()
            est = _estimate_keypoints(true_kb, st.root_pos, st.root_yaw,
                                      est_root, est_yaw)
            return kp, est, est_root, est_yaw, delta
        delta_world = ref_now.root_pos - st.root_pos
        r = _rot2(-st.root_yaw)
        delta = np.array([*(r @ delta_world[0:2]), delta_world[2]])
        return kp, true_kb, st.root_pos, st.root_yaw, delta

    def _obs(self) -> np.ndarray:
        ref = self.track.at(self.frame + 1)
        kp, est_kb, est_root, est_yaw, delta = self._current_estimates()
        self.last_correction = delta
        obs = build_student_obs(
            self.history,
            odom_delta=delta,
            ref={
                "keybody_pos": ref.keybodies,
                "keybody_vel": ref.keybody_vel,
                "wrist_orient": ref.wrist_orient,
                "head_height": float(ref.head_pos[2]),
            },
            current={
                "keybody_pos": est_kb,
                "wrist_orient": kp.wrist_orient,
                "head_height": float(est_kb[0, 2]),
                "root_pos": est_root,
                "root_yaw": est_yaw,
            },
        )
        return obs

    def current_obs(self) -> np.ndarray:
        return self._obs()

    def teacher_obs(self) -> np.ndarray:
        """Privileged view of the same underlying state, for DAgger labels."""
        ref_next = self.track.at(self.frame + 1)
        return build_teacher_obs(self.model, self.state, ref_next,
                                 self.prev_action, self.params)

    def step(self, action: np.ndarray):
        st_prev = self.state
        self.state = step(self.model, self.state, action, self.params,
                          self.rng, self.dt)
        self.frame += 1
        if self.noise_mode == NOISE_INJECTED and self.injector is not None:
            self.injector.advance(self.state.root_vel, self.dt)
        if self.noise_mode == NOISE_ODOMETRY:
            self._feed_odometry()
        self.history.push(state_frame_vec(self.state), np.asarray(action, float))
        ref = self.track.at(self.frame)
        term = check_termination(self.model, self.state, ref)
        if term.reason == "tracking" and not self.tracking_termination:
            term.terminated = False
        timeout = self.frame >= self.track.n_frames - 1
        done = term.terminated or timeout
        if self.episode is not None:
            kp = state_fk(self.model, self.state).keypoints
            self.episode.keybody_pos.append(kp.keybodies.copy())
            self.episode.root_pos.append(self.state.root_pos.copy())
            self.episode.wrist_orient.append(kp.wrist_orient.copy())
            self.episode.ref_index.append(self.frame)
            if term.terminated:
                self.episode.terminated = True
                self.episode.reason = term.reason
        self.prev_action = np.asarray(action, float).copy()
        obs = self._obs()
        info = {"terminated": term.terminated, "reason": term.reason,
                "timeout": timeout, "prev_state": st_prev}
        return obs, done, info
