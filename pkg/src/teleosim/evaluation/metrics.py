"""Tracking metrics over recorded rollouts.

All error metrics pool over episodes, frames, and keybodies with flat means:
MPKPE on global keypoint distances, R-MPKPE after subtracting each side's
root per frame, velocity error from central differences of keypoint
positions at the frame rate, and the hand-orientation error
1 - <q_ref, q>^2. Success requires no fall and the mean keybody distance
staying under 1.5 m.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..mathcore import quat_similarity

MM = 1000.0
TRACKING_BOUND_M = 1.5


@dataclass
class EpisodeRollout:
    """Ground-truth bookkeeping of one evaluated episode."""

    keybody_pos: np.ndarray        # (T, 3, 3) head + wrists
    root_pos: np.ndarray           # (T, 3)
    wrist_orient: np.ndarray       # (T, 2, 4)
    ref_keybody_pos: np.ndarray    # (T, 3, 3)
    ref_root_pos: np.ndarray       # (T, 3)
    ref_wrist_orient: np.ndarray   # (T, 2, 4)
    terminated: bool = False
    reason: str = ""


@dataclass
class MetricsReport:
    sr: float                      # percent
    e_mpkpe: float                 # mm
    e_r_mpkpe: float               # mm
    e_vel: float                   # mm/s
    e_hand: float                  # dimensionless in [0, 1]
    n_episodes: int
    per_episode: list = field(default_factory=list)
    config_fingerprint: str = ""

    FIELDS = ("sr", "e_mpkpe", "e_r_mpkpe", "e_vel", "e_hand", "n_episodes")

    def row(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}


def _central_diff(arr: np.ndarray, fps: float) -> np.ndarray:
    """Central differences over the time axis, one-sided at the ends."""
    out = np.zeros_like(arr, dtype=np.float64)
    if arr.shape[0] < 2:
        return out
    out[1:-1] = (arr[2:] - arr[:-2]) * (fps / 2.0)
    out[0] = (arr[1] - arr[0]) * fps
    out[-1] = (arr[-1] - arr[-2]) * fps
    return out


def _truncate(ep: EpisodeRollout) -> EpisodeRollout:
    t_roll = ep.keybody_pos.shape[0]
    t_ref = ep.ref_keybody_pos.shape[0]
    if t_roll == t_ref:
        return ep
    warnings.warn(
        f"rollout length {t_roll} != reference length {t_ref}; truncating to min",
        stacklevel=2,
    )
    t = min(t_roll, t_ref)
    return EpisodeRollout(
        keybody_pos=ep.keybody_pos[:t], root_pos=ep.root_pos[:t],
        wrist_orient=ep.wrist_orient[:t], ref_keybody_pos=ep.ref_keybody_pos[:t],
        ref_root_pos=ep.ref_root_pos[:t], ref_wrist_orient=ep.ref_wrist_orient[:t],
        terminated=ep.terminated, reason=ep.reason,
    )


def episode_success(ep: EpisodeRollout) -> bool:
    if ep.terminated:
        return False
    dist = np.linalg.norm(ep.keybody_pos - ep.ref_keybody_pos, axis=2).mean(axis=1)
    return bool(np.all(dist <= TRACKING_BOUND_M))


def compute_metrics(episodes: list[EpisodeRollout], fps: float = 50.0,
                    config_fingerprint: str = "") -> MetricsReport:
    if not episodes:
        raise ValueError("no episodes to evaluate")
    episodes = [_truncate(ep) for ep in episodes]
    successes = 0
    pos_err, rel_err, vel_err, hand_err = [], [], [], []
    per_episode = []
    for ep in episodes:
        ok = episode_success(ep)
        successes += int(ok)
        d = np.linalg.norm(ep.keybody_pos - ep.ref_keybody_pos, axis=2)
        rel = np.linalg.norm(
            (ep.keybody_pos - ep.root_pos[:, None, :])
            - (ep.ref_keybody_pos - ep.ref_root_pos[:, None, :]),
            axis=2,
        )
        v = _central_diff(ep.keybody_pos, fps)
        v_ref = _central_diff(ep.ref_keybody_pos, fps)
        dv = np.linalg.norm(v - v_ref, axis=2)
        hand = np.zeros((ep.wrist_orient.shape[0], 2))
        for t in range(ep.wrist_orient.shape[0]):
            for w in range(2):
                hand[t, w] = 1.0 - quat_similarity(
                    ep.ref_wrist_orient[t, w], ep.wrist_orient[t, w]
                )
        pos_err.append(d.ravel())
        rel_err.append(rel.ravel())
        vel_err.append(dv.ravel())
        hand_err.append(hand.ravel())
        per_episode.append({
            "success": ok,
            "reason": ep.reason,
            "mpkpe_mm": float(d.mean() * MM),
            "r_mpkpe_mm": float(rel.mean() * MM),
            "vel_mm_s": float(dv.mean() * MM),
            "hand": float(hand.mean()),
        })
    report = MetricsReport(
        sr=100.0 * successes / len(episodes),
        e_mpkpe=float(np.concatenate(pos_err).mean() * MM),
        e_r_mpkpe=float(np.concatenate(rel_err).mean() * MM),
        e_vel=float(np.concatenate(vel_err).mean() * MM),
        e_hand=float(np.concatenate(hand_err).mean()),
        n_episodes=len(episodes),
        per_episode=per_episode,
        config_fingerprint=config_fingerprint,
    )
    return report
