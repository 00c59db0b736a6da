"""Real-time teleoperation server.

One operator session over a WebSocket. Inbound ``target`` messages carry the
operator's head position and 6D wrist poses; the server low-passes and
envelope-clamps them into a reference stream, runs the 50 Hz loop (odometry
simulation for both sides, student observation, policy, environment step),
and emits ``state`` frames at the control rate.

The tick owns all simulation and policy state. Network ingress and egress
touch it only through bounded deques: inbound frames are drained at the top
of each tick, outbound frames are appended to a drop-oldest queue, so a
congested or absent reader never delays the simulation step.
"""

from __future__ import annotations

import asyncio
import collections
import json
import time
from dataclasses import dataclass

import numpy as np
import websockets

from ..mathcore import DriftModel, slerp, quat_normalize
from ..odometry import CorrectionTracker, OdometryProvider
from ..policy.observations import HistoryBuffer, build_student_obs, state_frame_vec
from ..simenv.env import initial_state, step
from ..simenv.kinematics import state_fk
from ..simenv.model import RobotModel, NUM_JOINTS
from ..simenv.randomization import nominal_params
from ..simenv.rewards import compute_reward, training_reward_weights
from ..training.ppo import GaussianPolicy
from .wire import (
    PROTOCOL_VERSION,
    WireError,
    decode_message,
    error_frame,
    state_frame,
)


@dataclass
class SmoothedTargets:
    head: np.ndarray
    wrist_pos: np.ndarray      # (2, 3)
    wrist_quat: np.ndarray     # (2, 4)

    def copy(self) -> "SmoothedTargets":
        return SmoothedTargets(self.head.copy(), self.wrist_pos.copy(),
                               self.wrist_quat.copy())


class LiveSession:
    """Simulation, policy, and reference-synthesis state for one operator."""

    TIME_CONSTANT = 0.1      # s, target low-pass
    HEAD_VEL_LIMIT = 1.5     # m/s
    WRIST_VEL_LIMIT = 3.0    # m/s

    def __init__(self, model: RobotModel, policy: GaussianPolicy,
                 robot_drift: DriftModel, operator_drift: DriftModel,
                 mode: str = "closed", seed: int = 0, dt: float = 0.02):
        self.model = model
        self.policy = policy
        self.dt = dt
        self.mode = mode
        self.rng = np.random.default_rng(seed)
        self.params = nominal_params()
        self.weights = training_reward_weights()
        self.state = initial_state(model)
        self.prev_action = np.zeros(NUM_JOINTS)
        self.history = HistoryBuffer()
        self.history.reset(state_frame_vec(self.state), self.prev_action)
        kp = state_fk(model, self.state).keypoints
        self.targets = SmoothedTargets(
            head=kp.head.copy(), wrist_pos=kp.wrist_pos.copy(),
            wrist_quat=kp.wrist_orient.copy(),
        )
        self.raw = self.targets.copy()
        self.prev_targets = self.targets.copy()
        self.robot_drift = robot_drift
        self.operator_drift = operator_drift
        self.robot_odom = OdometryProvider("robot", robot_drift,
                                           np.random.default_rng(seed + 1))
        self.operator_odom = OdometryProvider("operator", operator_drift,
                                              np.random.default_rng(seed + 2))
        self.tracker = CorrectionTracker(self._mode_name())
        self.paused = False
        self.seq = 0
        self.last_breakdown = None
        self.last_delta = np.zeros(3)

    def _mode_name(self) -> str:
        return "closed_loop" if self.mode == "closed" else "open_loop"

    def set_mode(self, mode: str) -> None:
        if mode != self.mode:
            self.mode = mode
            self.tracker = CorrectionTracker(self._mode_name())

    def set_drift(self, fields: dict) -> None:
        base = self.robot_drift
        merged = {
            "c_vel": fields.get("c_vel", base.c_vel),
            "c_min": fields.get("c_min", base.c_min),
            "max_deviation": fields.get("max_deviation", base.max_deviation),
            "reset_interval": fields.get("reset_interval", base.reset_interval),
        }
        self.robot_drift = DriftModel(**merged)
        self.robot_odom.drift = self.robot_drift

    def apply_target(self, msg: dict) -> None:
        self.raw.head = np.array(msg["head"])
        self.raw.wrist_pos = np.array([msg["wrist_l"]["pos"], msg["wrist_r"]["pos"]])
        self.raw.wrist_quat = np.array([
            quat_normalize(np.array(msg["wrist_l"]["quat"])),
            quat_normalize(np.array(msg["wrist_r"]["quat"])),
        ])
        self._clamp_envelope()

    def _clamp_envelope(self) -> None:
        lo, hi = 0.55, 1.28
        self.raw.head[2] = float(np.clip(self.raw.head[2], lo, hi))
        reach = self.model.max_reach + self.model.shoulder_half_width + 0.05
        for w in range(2):
            rel = self.raw.wrist_pos[w] - self.raw.head
            r = float(np.linalg.norm(rel))
            if r > reach:
                self.raw.wrist_pos[w] = self.raw.head + rel * (reach / r)

    def _smooth_targets(self) -> None:
        self.prev_targets = self.targets.copy()
        alpha = self.dt / (self.TIME_CONSTANT + self.dt)

        def approach(cur, goal, limit):
            nxt = cur + alpha * (goal - cur)
            d = nxt - cur
            n = float(np.linalg.norm(d))
            max_d = limit * self.dt
            if n > max_d:
                nxt = cur + d * (max_d / n)
            return nxt

        self.targets.head = approach(self.targets.head, self.raw.head,
                                     self.HEAD_VEL_LIMIT)
        for w in range(2):
            self.targets.wrist_pos[w] = approach(
                self.targets.wrist_pos[w], self.raw.wrist_pos[w],
                self.WRIST_VEL_LIMIT,
            )
            self.targets.wrist_quat[w] = slerp(
                self.targets.wrist_quat[w], self.raw.wrist_quat[w], alpha
            )

    def _operator_pose(self):
        root = self.targets.head - np.array([0.0, 0.0, self.model.torso_length])
        return root, 0.0

    def tick(self) -> str:
        """One 50 Hz step; returns the outbound state frame (JSON text)."""
        if not self.paused:
            self._smooth_targets()
        st = self.state
        self.robot_odom.observe(st.t, st.root_pos, st.root_yaw, st.root_vel)
        op_root, op_yaw = self._operator_pose()
        op_vel = (self.targets.head - self.prev_targets.head) / self.dt
        self.operator_odom.observe(st.t, op_root, op_yaw, op_vel)

        rob = self.robot_odom.latest(st.t)
        op = self.operator_odom.latest(st.t)
        delta, _dyaw = self.tracker.update(rob, op)
        self.last_delta = delta
        if self.mode == "closed":
            est_root, est_yaw = rob.position, rob.yaw
        else:
            est_root, est_yaw = self.tracker.assumed_pose()

        kp = state_fk(self.model, st).keypoints
        rel = kp.keybodies - st.root_pos
        c, s = np.cos(est_yaw - st.root_yaw), np.sin(est_yaw - st.root_yaw)
        est_kb = rel.copy()
        est_kb[:, 0] = c * rel[:, 0] - s * rel[:, 1]
        est_kb[:, 1] = s * rel[:, 0] + c * rel[:, 1]
        est_kb += est_root

        # The operator's own odometry deviation shifts the reference targets.
        op_dev = op.position - op_root
        ref_kb = np.vstack([self.targets.head, self.targets.wrist_pos]) + op_dev
        ref_vel = (np.vstack([self.targets.head, self.targets.wrist_pos])
                   - np.vstack([self.prev_targets.head, self.prev_targets.wrist_pos])
                   ) / self.dt
        obs = build_student_obs(
            self.history,
            odom_delta=delta,
            ref={
                "keybody_pos": ref_kb,
                "keybody_vel": ref_vel,
                "wrist_orient": self.targets.wrist_quat,
                "head_height": float(ref_kb[0, 2]),
            },
            current={
                "keybody_pos": est_kb,
                "wrist_orient": kp.wrist_orient,
                "head_height": float(est_kb[0, 2]),
                "root_pos": est_root,
                "root_yaw": est_yaw,
            },
        )
        action, routing = self._policy_action(obs)
        if not self.paused:
            prev_state = st
            self.state = step(self.model, st, action, self.params, self.rng, self.dt)
            self.history.push(state_frame_vec(self.state), action)
            ref = self._pseudo_ref(action)
            self.last_breakdown = compute_reward(
                self.model, self.state, prev_state, action, self.prev_action,
                ref, weights=self.weights, dt=self.dt,
            )
            self.prev_action = action
        return self._state_frame(routing)

    def _policy_action(self, obs: np.ndarray):
        mean, stats, _cache = self.policy.mean_cached(obs)
        routing = [] if stats is None else [
            [round(float(w), 4) for w in row] for row in stats.mean_weights
        ]
        return mean, routing

    def _pseudo_ref(self, action: np.ndarray):
        """Reference stand-in for the live reward display: targets for the
        upper body, the robot's own state elsewhere."""
        st = self.state
        kp = state_fk(self.model, st).keypoints

        class _Ref:
            pass

        ref = _Ref()
        ref.joint_pos = action.copy()
        ref.joint_pos[0:3] = 0.0
        ref.joint_vel = st.joint_vel.copy()
        ref.root_pos = st.root_pos.copy()
        ref.root_yaw = st.root_yaw
        ref.root_vel = st.root_vel.copy()
        ref.root_yaw_rate = st.root_ang_vel
        ref.head_pos = self.targets.head
        ref.wrist_pos = self.targets.wrist_pos
        ref.wrist_orient = self.targets.wrist_quat
        ref.elbow_pos = kp.elbow_pos
        ref.keybody_vel = np.zeros((3, 3))
        return ref

    def _state_frame(self, routing) -> str:
        st = self.state
        kp = state_fk(self.model, st).keypoints
        rounded = lambda a: [round(float(x), 4) for x in np.asarray(a).ravel()]
        robot = {
            "root": rounded(st.root_pos), "yaw": round(float(st.root_yaw), 4),
            "joints": rounded(st.joint_pos),
            "head": rounded(kp.head),
            "wrist_l": {"pos": rounded(kp.wrist_pos[0]),
                        "quat": rounded(kp.wrist_orient[0])},
            "wrist_r": {"pos": rounded(kp.wrist_pos[1]),
                        "quat": rounded(kp.wrist_orient[1])},
            "elbow_l": rounded(kp.elbow_pos[0]),
            "elbow_r": rounded(kp.elbow_pos[1]),
        }
        ghost = {
            "head": rounded(self.targets.head),
            "wrist_l": rounded(self.targets.wrist_pos[0]),
            "wrist_r": rounded(self.targets.wrist_pos[1]),
        }
        reward = {"total": 0.0}
        if self.last_breakdown is not None:
            reward = {"total": round(self.last_breakdown.total, 3)}
            for name in ("body_pos_mr", "hand_rotation", "dof_pos_tracking",
                         "body_velocity"):
                reward[name] = round(self.last_breakdown.terms[name], 5)
        frame = state_frame(
            seq=self.seq, t_sim=st.t, mode=self.mode, robot=robot, ghost=ghost,
            drift_vec=self.last_delta, routing=routing, reward=reward,
            contacts=st.foot_contact,
        )
        self.seq += 1
        return frame


class TeleopServer:
    """Single-session WebSocket server around a LiveSession."""

    EGRESS_CAPACITY = 32

    def __init__(self, session: LiveSession, port: int = 8765, dt: float = 0.02):
        self.session = session
        self.port = port
        self.dt = dt
        self.ingress: collections.deque = collections.deque(maxlen=64)
        self.egress: collections.deque = collections.deque(maxlen=self.EGRESS_CAPACITY)
        self.client = None
        self._server = None
        self._tasks: list[asyncio.Task] = []
        self.ticks = 0
        self.dropped_frames = 0

    async def start(self) -> int:
        self._server = await websockets.serve(self._handler, "127.0.0.1", self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        self._tasks.append(asyncio.create_task(self._tick_loop()))
        self._tasks.append(asyncio.create_task(self._egress_loop()))
        return self.port

    async def stop(self) -> None:
        for t in self._tasks:
            t.cancel()
        for t in self._tasks:
            try:
                await t
            except (asyncio.CancelledError, Exception):
                pass
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def _handler(self, websocket):
        if self.client is not None:
            await websocket.send(error_frame("busy", "another operator session is active"))
            await websocket.close()
            return
        self.client = websocket
        self.session.paused = False
        try:
            async for raw in websocket:
                try:
                    msg = decode_message(raw)
                except WireError as e:
                    await websocket.send(error_frame(e.code, str(e)))
                    if e.code == "version_mismatch":
                        break
                    continue
                self.ingress.append(msg)
        except websockets.ConnectionClosed:
            pass
        finally:
            self.client = None
            self.session.paused = True

    def _drain_ingress(self) -> None:
        while self.ingress:
            msg = self.ingress.popleft()
            if msg["type"] == "target":
                self.session.apply_target(msg)
            elif msg["type"] == "control":
                if "mode" in msg:
                    self.session.set_mode(msg["mode"])
                if "drift" in msg:
                    self.session.set_drift(msg["drift"])
                if "pause" in msg:
                    self.session.paused = msg["pause"]

    async def _tick_loop(self) -> None:
        loop = asyncio.get_running_loop()
        next_t = loop.time()
        while True:
            self._drain_ingress()
            frame = self.session.tick()
            self.ticks += 1
            if len(self.egress) == self.egress.maxlen:
                self.dropped_frames += 1
            self.egress.append(frame)
            next_t += self.dt
            delay = next_t - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                # Behind schedule: keep sim time consistent, never block.
                next_t = loop.time()
                await asyncio.sleep(0)

    async def _egress_loop(self) -> None:
        while True:
            if self.client is None or not self.egress:
                await asyncio.sleep(0.002)
                continue
            frame = self.egress.popleft()
            try:
                await self.client.send(frame)
            except websockets.ConnectionClosed:
                pass


async def serve_teleop_async(model: RobotModel, policy: GaussianPolicy,
                             robot_drift: DriftModel, operator_drift: DriftModel,
                             port: int, mode: str = "closed",
                             seed: int = 0) -> TeleopServer:
    session = LiveSession(model, policy, robot_drift, operator_drift,
                          mode=mode, seed=seed)
    server = TeleopServer(session, port=port)
    await server.start()
    return server


def serve_teleop(model: RobotModel, policy: GaussianPolicy,
                 robot_drift: DriftModel, operator_drift: DriftModel,
                 port: int = 8765, mode: str = "closed", seed: int = 0) -> None:
    """Blocking entry point: run the teleoperation service until interrupted."""

    async def _run():
        server = await serve_teleop_async(model, policy, robot_drift,
                                          operator_drift, port, mode, seed)
        print(f"teleop server listening on ws://127.0.0.1:{server.port}")
        try:
            while True:
                await asyncio.sleep(3600)
        finally:
            await server.stop()

    try:
        asyncio.run(_run())
    except KeyboardInterrupt:
        pass
