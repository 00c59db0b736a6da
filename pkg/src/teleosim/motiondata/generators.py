"""Synthetic motion generators, one per clip category.

These stand in for retargeted capture data. Each generator builds smooth
joint and root trajectories that start and end at the neutral standing pose,
then evaluates forward kinematics per frame so keypoints are exactly
consistent with the joint channels. Outputs pass curation with default
limits; randomness comes only from the caller's generator.
"""

from __future__ import annotations

import numpy as np

from ..simenv.kinematics import fk_keypoints
from ..simenv.model import RobotModel, default_model, NUM_JOINTS
from .clip import CATEGORIES, CLIP_FPS, MotionClip, make_clip

DT = 1.0 / CLIP_FPS


def _smootherstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (x * (x * 6.0 - 15.0) + 10.0)


def _envelope(ts: np.ndarray, duration: float, ramp: float) -> np.ndarray:
    """Smooth 0->1->0 activation with `ramp`-second edges."""
    up = _smootherstep(ts / ramp)
    down = _smootherstep((duration - ts) / ramp)
    return np.minimum(up, down)


def _assemble(name: str, category: str, model: RobotModel, joints: np.ndarray,
              root_xy: np.ndarray, root_yaw: np.ndarray) -> MotionClip:
    t = joints.shape[0]
    root = np.zeros((t, 3))
    root[:, 0:2] = root_xy
    root[:, 2] = [model.root_height(joints[i]) for i in range(t)]
    head = np.zeros((t, 3))
    wrist_pos = np.zeros((t, 2, 3))
    wrist_orient = np.zeros((t, 2, 4))
    for i in range(t):
        kp = fk_keypoints(model, joints[i], root[i], root_yaw[i])
        head[i] = kp.head
        wrist_pos[i] = kp.wrist_pos
        wrist_orient[i] = kp.wrist_orient
    return make_clip(name, category, joints, root, root_yaw, head, wrist_pos, wrist_orient)


def _frames(duration: float) -> np.ndarray:
    n = int(round(duration * CLIP_FPS)) + 1
    return np.arange(n) * DT


def _gen_stand(duration, rng, model):
    ts = _frames(duration)
    joints = np.zeros((ts.size, NUM_JOINTS))
    amp = rng.uniform(0.01, 0.03)
    freq = rng.uniform(0.2, 0.5)
    phase = rng.uniform(0.0, 2 * np.pi)
    sway = amp * np.sin(2 * np.pi * freq * ts + phase) * _envelope(ts, duration, 0.5)
    joints[:, 6] = sway
    joints[:, 10] = -sway
    return _assemble("stand", "stand", model, joints,
                     np.zeros((ts.size, 2)), np.zeros(ts.size))


def _walk_profile(ts, duration, speed, ramp=0.6):
    env = _envelope(ts, duration, ramp)
    vel = speed * env
    x = np.concatenate([[0.0], np.cumsum(0.5 * (vel[1:] + vel[:-1]) * DT)])
    return vel, x, env


def _gen_walk(duration, rng, model, distance=None, speed=None, heading=0.0):
    ts = _frames(duration)
    if speed is None:
        speed = rng.uniform(0.6, 1.0)
    vel, x, env = _walk_profile(ts, duration, speed)
    if distance is not None:
        scale = distance / max(x[-1], 1e-9)
        vel, x = vel * scale, x * scale
        speed *= scale
    joints = np.zeros((ts.size, NUM_JOINTS))
    stride = (1.5 + 0.8 * speed) / 2.0
    swing = 0.25 * np.sin(2 * np.pi * stride * ts) * env
    joints[:, 6] = swing
    joints[:, 10] = -swing
    joints[:, 8] = 0.15 * (1 + np.sin(2 * np.pi * stride * ts)) / 2 * env
    joints[:, 12] = 0.15 * (1 - np.sin(2 * np.pi * stride * ts)) / 2 * env
    bounce = -0.012 * (1 - np.cos(4 * np.pi * stride * ts)) * env
    joints[:, 3] = bounce
    joints[:, 4] = bounce
    root_xy = np.zeros((ts.size, 2))
    root_xy[:, 0] = x * np.cos(heading)
    root_xy[:, 1] = x * np.sin(heading)
    return _assemble("walk", "walk", model, joints, root_xy,
                     np.full(ts.size, heading))


def _gen_squat(duration, rng, model):
    ts = _frames(duration)
    depth = rng.uniform(0.25, 0.35)
    drop = depth * (1 - np.cos(2 * np.pi * ts / duration)) / 2.0
    joints = np.zeros((ts.size, NUM_JOINTS))
    joints[:, 3] = -drop
    joints[:, 4] = -drop
    # Arms forward for balance while low.
    joints[:, 6] = 0.8 * drop / max(depth, 1e-9) * 0.5
    joints[:, 10] = joints[:, 6]
    return _assemble("squat", "squat", model, joints,
                     np.zeros((ts.size, 2)), np.zeros(ts.size))


def _gen_wave(duration, rng, model):
    ts = _frames(duration)
    env = _envelope(ts, duration, 0.7)
    joints = np.zeros((ts.size, NUM_JOINTS))
    raise_amt = rng.uniform(1.2, 1.5)
    freq = rng.uniform(1.5, 2.5)
    joints[:, 11] = raise_amt * env                       # right arm out/up
    joints[:, 12] = (1.0 + 0.35 * np.sin(2 * np.pi * freq * ts)) * env
    joints[:, 13] = 0.4 * np.sin(2 * np.pi * freq * ts) * env
    return _assemble("wave", "wave", model, joints,
                     np.zeros((ts.size, 2)), np.zeros(ts.size))


def _gen_reach(duration, rng, model):
    ts = _frames(duration)
    env = _envelope(ts, duration, 0.8)
    joints = np.zeros((ts.size, NUM_JOINTS))
    pitch = rng.uniform(1.0, 1.4)
    joints[:, 6] = pitch * env
    joints[:, 8] = 0.3 * env
    joints[:, 9] = rng.uniform(-0.8, 0.8) * env
    joints[:, 5] = 0.2 * env
    return _assemble("reach", "reach", model, joints,
                     np.zeros((ts.size, 2)), np.zeros(ts.size))


def _gen_jump(duration, rng, model):
    ts = _frames(duration)
    period = rng.uniform(1.2, 1.8)
    env = _envelope(ts, duration, 0.5)
    dip = 0.5 * (1 - np.cos(2 * np.pi * ts / period))
    joints = np.zeros((ts.size, NUM_JOINTS))
    joints[:, 3] = -0.25 * dip * env
    joints[:, 4] = joints[:, 3]
    joints[:, 6] = -0.5 * dip * env
    joints[:, 10] = joints[:, 6]
    return _assemble("jump", "jump", model, joints,
                     np.zeros((ts.size, 2)), np.zeros(ts.size))


def _gen_punch(duration, rng, model):
    ts = _frames(duration)
    env = _envelope(ts, duration, 0.5)
    rate = rng.uniform(1.2, 1.8)
    cyc = 2 * np.pi * rate * ts
    joints = np.zeros((ts.size, NUM_JOINTS))
    joints[:, 6] = 1.1 * np.maximum(np.sin(cyc), 0.0) * env
    joints[:, 8] = 1.0 * np.maximum(np.sin(cyc), 0.0) * env
    joints[:, 10] = 1.1 * np.maximum(-np.sin(cyc), 0.0) * env
    joints[:, 12] = 1.0 * np.maximum(-np.sin(cyc), 0.0) * env
    joints[:, 5] = 0.1 * np.abs(np.sin(cyc)) * env
    return _assemble("punch", "punch", model, joints,
                     np.zeros((ts.size, 2)), np.zeros(ts.size))


def _gen_turn(duration, rng, model):
    ts = _frames(duration)
    total = rng.uniform(np.pi / 2, min(np.pi, 1.0 * duration))
    total *= rng.choice([-1.0, 1.0])
    yaw = total * _smootherstep(ts / duration)
    joints = np.zeros((ts.size, NUM_JOINTS))
    sway = 0.15 * np.sin(2 * np.pi * 1.5 * ts) * _envelope(ts, duration, 0.5)
    joints[:, 6] = sway
    joints[:, 10] = -sway
    return _assemble("turn", "turn", model, joints, np.zeros((ts.size, 2)), yaw)


def _gen_mixed(duration, rng, model):
    from .editing import concat_edit

    half = max(duration / 2.0, 1.0)
    a = _gen_walk(half, rng, model)
    b = _gen_squat(half, rng, model)
    clip = concat_edit(a, b, blend_window=min(25, int(half * CLIP_FPS) // 2))
    return MotionClip(
        name="mixed", category="mixed", fps=clip.fps,
        joint_pos=clip.joint_pos, root_pos=clip.root_pos, root_yaw=clip.root_yaw,
        head_pos=clip.head_pos, wrist_pos=clip.wrist_pos,
        wrist_orient=clip.wrist_orient,
    )


_GENERATORS = {
    "stand": _gen_stand,
    "walk": _gen_walk,
    "squat": _gen_squat,
    "wave": _gen_wave,
    "reach": _gen_reach,
    "jump": _gen_jump,
    "punch": _gen_punch,
    "turn": _gen_turn,
    "mixed": _gen_mixed,
}

assert set(_GENERATORS) == set(CATEGORIES)


def synth_generate(kind: str, duration: float, rng: np.random.Generator,
                   model: RobotModel | None = None) -> MotionClip:
    """Generate a clip of the requested category.

    duration is in seconds and must be at least 1; the output is frame-exact
    deterministic for a given RNG state.
    """
    if kind not in _GENERATORS:
        raise ValueError(f"unknown category {kind!r}; choose from {CATEGORIES}")
    if duration < 1.0:
        raise ValueError("duration must be at least 1 s")
    model = model or default_model()
    clip = _GENERATORS[kind](duration, rng, model)
    clip.validate()
    return clip


def walk_path_clip(distance: float, model: RobotModel | None = None,
                   speed: float = 0.9, heading: float = 0.0,
                   rng: np.random.Generator | None = None) -> MotionClip:
    """Straight walk covering an exact root displacement, for path trials."""
    model = model or default_model()
    rng = rng or np.random.default_rng(0)
    duration = max(distance / speed + 1.2, 2.0)
    return _gen_walk(duration, rng, model, distance=distance, heading=heading,
                     speed=speed)


def curved_path_clip(total_distance: float = 10.0,
                     model: RobotModel | None = None, speed: float = 0.8,
                     rng: np.random.Generator | None = None) -> MotionClip:
    """Walk along an S-shaped corridor path with two 90-degree turns.

    Three straight legs joined by rounded corners (left then right); the
    root follows the path tangent, arms swing as in the straight walk.
    """
    model = model or default_model()
    rng = rng or np.random.default_rng(0)
    radius = 0.6
    arc = np.pi * radius / 2.0
    leg = (total_distance - 2.0 * arc) / 3.0
    if leg <= 0:
        raise ValueError("total_distance too short for two rounded turns")
    duration = max(total_distance / speed + 1.2, 2.0)
    ts = _frames(duration)
    vel, u, env = _walk_profile(ts, duration, speed)
    scale = total_distance / max(u[-1], 1e-9)
    vel, u = vel * scale, u * scale

    def curvature(s: float) -> float:
        if leg <= s < leg + arc:
            return 1.0 / radius
        if 2 * leg + arc <= s < 2 * leg + 2 * arc:
            return -1.0 / radius
        return 0.0

    n = ts.size
    yaw = np.zeros(n)
    xy = np.zeros((n, 2))
    for i in range(1, n):
        du = u[i] - u[i - 1]
        yaw[i] = yaw[i - 1] + curvature(u[i - 1]) * du
        mid = 0.5 * (yaw[i] + yaw[i - 1])
        xy[i] = xy[i - 1] + du * np.array([np.cos(mid), np.sin(mid)])

    joints = np.zeros((n, NUM_JOINTS))
    stride = (1.5 + 0.8 * speed) / 2.0
    swing = 0.25 * np.sin(2 * np.pi * stride * ts) * env
    joints[:, 6] = swing
    joints[:, 10] = -swing
    return _assemble("curved_path", "walk", model, joints, xy, yaw)
