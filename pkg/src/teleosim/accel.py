"""Hot numeric kernels with optional numba JIT.

Every kernel has a pure-numpy reference implementation (``*_py``). When numba
is importable and the ``TELEOSIM_NUMBA`` env var is not set to ``0``/``false``/
``off``, the exported names are the ``@njit``-compiled versions; otherwise the
numpy fallbacks are exported under the same names. Both paths are kept
importable so ``benchmarks/bench_accel.py`` can compare them directly.
"""

from __future__ import annotations

import math
import os

import numpy as np


def _numba_wanted() -> bool:
    flag = os.environ.get("TELEOSIM_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


def pd_joint_step_py(pos, vel, target, kp, kd, inv_inertia, tau_limit, rfi, dt):
    """PD torque + semi-implicit Euler step for the positional joints.

    Torque is clamped to the limit first, then perturbed by the RFI noise
    sample, so the applied torque can sit slightly outside the limit band
    (which is what the torque-limit penalty watches for).
    Returns (new_pos, new_vel, applied_torque).
    """
    tau = kp * (target - pos) - kd * vel
    tau = np.minimum(np.maximum(tau, -tau_limit), tau_limit) + rfi
    new_vel = vel + tau * inv_inertia * dt
    new_pos = pos + new_vel * dt
    return new_pos, new_vel, tau


def gae_scan_py(rewards, values, dones, last_values, gamma, lam):
    """Reverse-scan GAE advantages over (n_steps, n_envs) arrays.

    ``dones[t]`` marks that the transition at step t ended its episode, so no
    value bootstraps across it.
    """
    n_steps, n_envs = rewards.shape
    adv = np.zeros((n_steps, n_envs), dtype=np.float64)
    running = np.zeros(n_envs, dtype=np.float64)
    for t in range(n_steps - 1, -1, -1):
        if t == n_steps - 1:
            next_values = last_values
        else:
            next_values = values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_values * nonterminal - values[t]
        running = delta + gamma * lam * nonterminal * running
        adv[t] = running
    return adv


def drift_path_py(sigmas, noise, dev0, max_dev, reset_flags):
    """Evolve a clamped diffusion deviation over a pre-drawn noise path.

    sigmas: (n,) per-step diffusion coefficients (already include sqrt(dt)).
    noise: (n, 3) standard-normal draws.
    reset_flags: (n,) nonzero where the deviation resets to zero that step.
    Returns the (n, 3) deviation after each step; on reset steps the output
    is exactly zero.
    """
    n = sigmas.shape[0]
    dev = dev0.copy()
    out = np.empty((n, 3), dtype=np.float64)
    for i in range(n):
        for j in range(3):
            dev[j] += sigmas[i] * noise[i, j]
        nrm = math.sqrt(dev[0] ** 2 + dev[1] ** 2 + dev[2] ** 2)
        if nrm > max_dev:
            scale = max_dev / nrm
            for j in range(3):
                dev[j] *= scale
        if reset_flags[i]:
            for j in range(3):
                dev[j] = 0.0
        out[i, 0] = dev[0]
        out[i, 1] = dev[1]
        out[i, 2] = dev[2]
    return out


def _rot_z(a, out):
    c, s = math.cos(a), math.sin(a)
    out[0, 0] = c; out[0, 1] = -s; out[0, 2] = 0.0
    out[1, 0] = s; out[1, 1] = c;  out[1, 2] = 0.0
    out[2, 0] = 0.0; out[2, 1] = 0.0; out[2, 2] = 1.0


def _rot_y(a, out):
    c, s = math.cos(a), math.sin(a)
    out[0, 0] = c;  out[0, 1] = 0.0; out[0, 2] = s
    out[1, 0] = 0.0; out[1, 1] = 1.0; out[1, 2] = 0.0
    out[2, 0] = -s; out[2, 1] = 0.0; out[2, 2] = c


def _rot_x(a, out):
    c, s = math.cos(a), math.sin(a)
    out[0, 0] = 1.0; out[0, 1] = 0.0; out[0, 2] = 0.0
    out[1, 0] = 0.0; out[1, 1] = c; out[1, 2] = -s
    out[2, 0] = 0.0; out[2, 1] = s; out[2, 2] = c


def _mat_quat(m, out):
    t = m[0, 0] + m[1, 1] + m[2, 2]
    if t > 0.0:
        r = math.sqrt(1.0 + t)
        w = 0.5 * r
        s = 0.5 / r
        out[0] = w
        out[1] = (m[2, 1] - m[1, 2]) * s
        out[2] = (m[0, 2] - m[2, 0]) * s
        out[3] = (m[1, 0] - m[0, 1]) * s
    else:
        i = 0
        if m[1, 1] > m[0, 0]:
            i = 1
        if m[2, 2] > m[i, i]:
            i = 2
        j = (i + 1) % 3
        k = (i + 2) % 3
        r = math.sqrt(1.0 + m[i, i] - m[j, j] - m[k, k])
        s = 0.5 / r
        out[0] = (m[k, j] - m[j, k]) * s
        out[1 + i] = 0.5 * r
        out[1 + j] = (m[j, i] + m[i, j]) * s
        out[1 + k] = (m[k, i] + m[i, k]) * s
    n = math.sqrt(out[0] ** 2 + out[1] ** 2 + out[2] ** 2 + out[3] ** 2)
    sign = 1.0 if out[0] >= 0.0 else -1.0
    for a in range(4):
        out[a] = out[a] * sign / n


def fk_core_py(q, root, yaw, torso_len, upper_len, fore_len, half_width):
    """Forward kinematics of the reduced chain.

    Returns (head (3,), shoulders (2,3), elbows (2,3), wrists (2,3),
    quats (5,4): torso, elbow_l, elbow_r, wrist_l, wrist_r,
    axes (9,3): torso pitch, then per arm shoulder pitch/roll, elbow,
    wrist roll). World frame x forward, y left, z up; joint order per the
    robot model (torso pitch at 5, arm chains at 6:10 and 10:14).
    """
    rz = np.empty((3, 3))
    ry = np.empty((3, 3))
    rx = np.empty((3, 3))
    _rot_z(yaw, rz)
    _rot_y(q[5], ry)
    r_torso = rz @ ry

    head = np.empty(3)
    shoulders = np.empty((2, 3))
    elbows = np.empty((2, 3))
    wrists = np.empty((2, 3))
    quats = np.empty((5, 4))
    axes = np.empty((9, 3))

    for a in range(3):
        head[a] = root[a] + torso_len * r_torso[a, 2]
        axes[0, a] = rz[a, 1]
    _mat_quat(r_torso, quats[0])

    for arm in range(2):
        side = 1.0 if arm == 0 else -1.0
        base = 6 + 4 * arm
        for a in range(3):
            shoulders[arm, a] = (root[a] + side * half_width * r_torso[a, 1]
                                 + torso_len * r_torso[a, 2])
        _rot_y(q[base + 0], ry)
        r_sp = r_torso @ ry
        _rot_x(side * q[base + 1], rx)
        r_sr = r_sp @ rx
        for a in range(3):
            elbows[arm, a] = shoulders[arm, a] - upper_len * r_sr[a, 2]
        _rot_y(q[base + 2], ry)
        r_el = r_sr @ ry
        for a in range(3):
            wrists[arm, a] = elbows[arm, a] - fore_len * r_el[a, 2]
        _rot_z(q[base + 3], rx)
        r_wr = r_el @ rx
        _mat_quat(r_el, quats[1 + arm])
        _mat_quat(r_wr, quats[3 + arm])
        off = 1 + 4 * arm
        for a in range(3):
            axes[off + 0, a] = r_torso[a, 1]
            axes[off + 1, a] = side * r_sp[a, 0]
            axes[off + 2, a] = r_sr[a, 1]
            axes[off + 3, a] = r_el[a, 2]
    return head, shoulders, elbows, wrists, quats, axes


NUMBA_ENABLED = False
pd_joint_step_jit = None
gae_scan_jit = None
drift_path_jit = None
fk_core_jit = None

if _numba_wanted():
    try:
        from numba import njit

        _rot_z = njit(cache=True, inline="always")(_rot_z)
        _rot_y = njit(cache=True, inline="always")(_rot_y)
        _rot_x = njit(cache=True, inline="always")(_rot_x)
        _mat_quat = njit(cache=True, inline="always")(_mat_quat)
        pd_joint_step_jit = njit(cache=True)(pd_joint_step_py)
        gae_scan_jit = njit(cache=True)(gae_scan_py)
        drift_path_jit = njit(cache=True)(drift_path_py)
        fk_core_jit = njit(cache=True)(fk_core_py)
        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

if NUMBA_ENABLED:
    pd_joint_step = pd_joint_step_jit
    gae_scan = gae_scan_jit
    drift_path = drift_path_jit
    fk_core = fk_core_jit
else:
    pd_joint_step = pd_joint_step_py
    gae_scan = gae_scan_py
    drift_path = drift_path_py
    fk_core = fk_core_py
