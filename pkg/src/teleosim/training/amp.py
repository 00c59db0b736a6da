"""Adversarial lower-body motion prior.

A small MLP discriminator scores consecutive-frame lower-body transition
features: least-squares targets +1 for reference-motion transitions, -1 for
policy transitions, with a gradient penalty on real samples. The per-
transition reward is max(0, 1 - 0.25 (D - 1)^2), always inside [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..motiondata.refs import ReferenceTrack
from ..policy.nets import Adam, MLPNet

# Per-frame lower-body features: body-frame root velocity (2), yaw rate (1),
# leg crouch (2), leg velocity (2), root height (1). Two frames per sample.
FRAME_FEATURES = 8
AMP_FEATURE_DIM = 2 * FRAME_FEATURES


def state_lower_features(state) -> np.ndarray:
    return np.array([
        state.joint_vel[0], state.joint_vel[1], state.joint_vel[2],
        state.joint_pos[3], state.joint_pos[4],
        state.joint_vel[3], state.joint_vel[4],
        state.root_pos[2],
    ])


def transition_features(prev_state, state) -> np.ndarray:
    return np.concatenate([state_lower_features(prev_state),
                           state_lower_features(state)])


def _ref_frame_features(track: ReferenceTrack, i: int) -> np.ndarray:
    ref = track.at(i)
    return np.array([
        ref.joint_vel[0], ref.joint_vel[1], ref.joint_vel[2],
        ref.joint_pos[3], ref.joint_pos[4],
        ref.joint_vel[3], ref.joint_vel[4],
        ref.root_pos[2],
    ])


def reference_features(tracks: list[ReferenceTrack], n_samples: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Sample transition features from reference tracks."""
    out = np.zeros((n_samples, AMP_FEATURE_DIM))
    for k in range(n_samples):
        track = tracks[int(rng.integers(len(tracks)))]
        i = int(rng.integers(track.n_frames - 1))
        out[k] = np.concatenate([
            _ref_frame_features(track, i), _ref_frame_features(track, i + 1)
        ])
    return out


def amp_score_from_logits(d: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - 0.25 * (d - 1.0) ** 2)


@dataclass
class AmpConfig:
    hidden: tuple = (128, 128, 128)
    lr: float = 1e-3
    grad_penalty: float = 5.0
    updates_per_iter: int = 2
    minibatch: int = 256


class AmpDiscriminator:
    def __init__(self, cfg: AmpConfig, rng: np.random.Generator,
                 feature_dim: int = AMP_FEATURE_DIM):
        self.cfg = cfg
        self.net = MLPNet([feature_dim] + list(cfg.hidden) + [1], rng)
        self.opt = Adam(self.net.params, lr=cfg.lr)

    def score(self, features: np.ndarray) -> np.ndarray:
        d = self.net.forward(np.atleast_2d(features))[:, 0]
        return amp_score_from_logits(d)

    def score_transition(self, prev_state, state) -> tuple[np.ndarray, float]:
        feats = transition_features(prev_state, state)
        return feats, float(self.score(feats)[0])


def _param_grads_at(net: MLPNet, x: np.ndarray) -> list:
    """Parameter gradients of sum(D(x)) via one forward/backward."""
    y, cache = net.forward_cached(x)
    grads, _ = net.backward(cache, np.ones((x.shape[0], 1)))
    return grads


def amp_update_and_reward(disc: AmpDiscriminator, real: np.ndarray,
                          fake: np.ndarray) -> tuple[np.ndarray, dict]:
    """Least-squares discriminator update, then per-fake-transition scores.

    Returns (amp_score per fake row, stats). The gradient penalty on real
    samples enters the parameter gradient through a central-difference
    Hessian-vector product, avoiding a second-order backward pass.
    """
    if real.shape[1] != fake.shape[1]:
        raise ValueError(
            f"feature dimensionality mismatch: real {real.shape[1]}, "
            f"fake {fake.shape[1]}"
        )
    cfg = disc.cfg
    net = disc.net
    stats = {"disc_loss": 0.0, "grad_penalty": 0.0}
    for u in range(cfg.updates_per_iter):
        take = np.arange(u * cfg.minibatch, (u + 1) * cfg.minibatch)
        r = real[take % real.shape[0]]
        f = fake[take % fake.shape[0]]
        yr, cr = net.forward_cached(r)
        yf, cf = net.forward_cached(f)
        loss = float(np.mean((yr[:, 0] - 1.0) ** 2) + np.mean((yf[:, 0] + 1.0) ** 2))
        g_r = (2.0 * (yr[:, 0] - 1.0) / r.shape[0])[:, None]
        g_f = (2.0 * (yf[:, 0] + 1.0) / f.shape[0])[:, None]
        grads_r, gin_r = net.backward(cr, g_r)
        grads_f, _ = net.backward(cf, g_f)

        # Gradient penalty lambda * mean ||d D/d x||^2 on real samples. Its
        # parameter gradient is 2 lambda * mean_b H_theta,x(D) g_b, computed
        # by central differences of grad_theta D along the input direction g.
        _, cr1 = net.forward_cached(r)
        gin = net.backward(cr1, np.ones((r.shape[0], 1)))[1]
        gp_value = float(np.mean(np.sum(gin ** 2, axis=1)))
        eps = 1e-4
        gp_plus = _param_grads_at(net, r + eps * gin)
        gp_minus = _param_grads_at(net, r - eps * gin)
        scale = cfg.grad_penalty * 2.0 / (2.0 * eps * r.shape[0])
        total = [
            gr + gf + scale * (pp - pm)
            for gr, gf, pp, pm in zip(grads_r, grads_f, gp_plus, gp_minus)
        ]
        disc.opt.step(total)
        stats["disc_loss"] += loss / cfg.updates_per_iter
        stats["grad_penalty"] += gp_value / cfg.updates_per_iter

    scores = disc.score(fake)
    return scores, stats
