"""Quaternion and pose algebra, diffusion stepping, numerical gradients.

Quaternions are numpy arrays ``[w, x, y, z]`` (w-first). ``q`` and ``-q``
encode the same rotation; every similarity here is sign-invariant. All
functions are pure and take caller-owned RNGs where randomness is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

UNIT_TOL = 1e-9
IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def quat(w: float, x: float, y: float, z: float) -> np.ndarray:
    """Build a unit quaternion, normalizing the inputs."""
    return quat_normalize(np.array([w, x, y, z], dtype=np.float64))


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("cannot normalize near-zero quaternion")
    return q / n


def check_unit(q: np.ndarray, name: str = "quaternion") -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (4,):
        raise ValueError(f"{name} must have shape (4,), got {q.shape}")
    if abs(np.linalg.norm(q) - 1.0) > 1e-6:
        raise ValueError(f"{name} is not unit norm: |q| = {np.linalg.norm(q):.6f}")
    return q


def quat_canonical(q: np.ndarray) -> np.ndarray:
    """Flip sign so w >= 0, removing the double-cover ambiguity."""
    q = np.asarray(q, dtype=np.float64)
    return -q if q[0] < 0 else q.copy()


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate a 3-vector by the quaternion."""
    w, x, y, z = q
    u = np.array([x, y, z])
    v = np.asarray(v, dtype=np.float64)
    return v + 2.0 * np.cross(u, np.cross(u, v) + w * v)


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    n = np.linalg.norm(axis)
    if n < 1e-12:
        return IDENTITY_QUAT.copy()
    axis = axis / n
    half = 0.5 * angle
    return np.concatenate(([np.cos(half)], np.sin(half) * axis))


def yaw_quat(yaw: float) -> np.ndarray:
    return np.array([np.cos(0.5 * yaw), 0.0, 0.0, np.sin(0.5 * yaw)])


def quat_angle(qa: np.ndarray, qb: np.ndarray) -> float:
    """Geodesic angle between two rotations, sign-invariant, in [0, pi]."""
    d = abs(float(np.dot(qa, qb)))
    return 2.0 * np.arccos(min(d, 1.0))


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return float(np.pi - np.mod(np.pi - a, 2.0 * np.pi))


def slerp(q0: np.ndarray, q1: np.ndarray, t: float) -> np.ndarray:
    """Geodesic interpolation along the shortest arc.

    Flips the sign of q1 when dot(q0, q1) < 0 so the short way round is
    taken. Near-antipodal rotations (|dot| < 1e-6 after the flip, i.e. 180
    degrees apart where the arc is ambiguous) and near-identical ones fall
    back to normalized linear interpolation.
    """
    q0 = check_unit(q0, "q0")
    q1 = check_unit(q1, "q1")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must be in [0, 1], got {t}")
    dot = float(np.dot(q0, q1))
    if dot < 0.0:
        q1 = -q1
        dot = -dot
    if dot < 1e-6 or dot > 1.0 - 1e-10:
        return quat_normalize((1.0 - t) * q0 + t * q1)
    theta = np.arccos(min(dot, 1.0))
    s = np.sin(theta)
    return (np.sin((1.0 - t) * theta) * q0 + np.sin(t * theta) * q1) / s


def quat_similarity(qa: np.ndarray, qb: np.ndarray) -> float:
    """Squared inner product <qa, qb>^2: 1 iff same rotation, sign-invariant."""
    qa = check_unit(qa, "qa")
    qb = check_unit(qb, "qb")
    return float(np.dot(qa, qb)) ** 2


@dataclass(frozen=True)
class DriftModel:
    """Velocity-dependent diffusion parameters for position estimates.

    c_vel scales speed into diffusion, c_min is the floor diffusion, and the
    deviation process is clamped to max_deviation and zeroed every
    reset_interval seconds.
    """

    c_vel: float
    c_min: float
    max_deviation: float
    reset_interval: float

    def __post_init__(self):
        if self.c_vel <= 0:
            raise ValueError("c_vel must be > 0")
        if self.c_min < 0:
            raise ValueError("c_min must be >= 0")
        if self.max_deviation <= 0:
            raise ValueError("max_deviation must be > 0")
        if self.reset_interval <= 0:
            raise ValueError("reset_interval must be > 0")

    def sigma(self, vel: np.ndarray) -> float:
        """Diffusion coefficient for the current velocity."""
        return float(np.linalg.norm(vel)) / self.c_vel + self.c_min


def sde_step(
    pos: np.ndarray,
    vel: np.ndarray,
    dt: float,
    model: DriftModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """One Euler-Maruyama step of the velocity-dependent diffusion.

    pos + vel * dt + (|vel|/c_vel + c_min) * sqrt(dt) * z with z a standard
    normal 3-vector; the scalar diffusion coefficient applies to each axis.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    pos = np.asarray(pos, dtype=np.float64)
    vel = np.asarray(vel, dtype=np.float64)
    sigma = model.sigma(vel)
    z = rng.standard_normal(3)
    return pos + vel * dt + sigma * np.sqrt(dt) * z


def finite_diff_gradient(
    f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-6
) -> np.ndarray:
    """Central-difference gradient of a scalar function, one coordinate at a time."""
    if h <= 0:
        raise ValueError("h must be > 0")
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        fp = f(x + e)
        fm = f(x - e)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError(f"non-finite function value at coordinate {i}")
        grad.flat[i] = (fp - fm) / (2.0 * h)
    return grad
