"""On-policy collection and clipped-surrogate PPO updates in plain numpy.

The policy is a diagonal Gaussian over joint targets: a network produces the
mean, a free log-std vector is learned alongside it. Gradients go through the
networks' analytic backward passes; advantages come from the GAE reverse
scan in the accel kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import accel
from ..policy.moe import MoENet, balance_loss, balance_loss_grad
from ..policy.nets import Adam, MLPNet

LOG2PI = float(np.log(2.0 * np.pi))


@dataclass
class PPOConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_ratio: float = 0.2
    epochs: int = 4
    minibatch_size: int = 512
    lr: float = 3e-4
    value_lr: float = 1e-3
    entropy_coef: float = 1e-3
    n_envs: int = 16
    rollout_steps: int = 128
    iterations: int = 150
    reward_scale: float = 0.01
    balance_coef: float = 0.01
    init_log_std: float = -1.0
    log_std_bounds: tuple = (-3.0, 0.5)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0 or not 0.0 < self.gae_lambda <= 1.0:
            raise ValueError("gamma and gae_lambda must be in (0, 1]")
        if not 0.0 < self.clip_ratio <= 0.5:
            raise ValueError("clip_ratio must be in (0, 0.5]")
        if self.iterations <= 0:
            raise ValueError("iterations must be positive")


# Full-scale training constants, retained from the published setup for
# config parity; desk runs never use them.
FULL_SCALE_TEACHER = {"iterations": 1_000_000, "n_envs": 8192}
FULL_SCALE_STUDENT = {"iterations": 600_000, "n_envs": 4096}


class RunningNorm:
    """Streaming mean/std normalizer for observations."""

    def __init__(self, dim: int, clip: float = 10.0):
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.count = 1e-4
        self.clip = clip

    def update(self, x: np.ndarray) -> None:
        x = x.reshape(-1, x.shape[-1])
        bmean = x.mean(axis=0)
        bvar = x.var(axis=0)
        bcount = x.shape[0]
        delta = bmean - self.mean
        tot = self.count + bcount
        self.mean += delta * bcount / tot
        m_a = self.var * self.count
        m_b = bvar * bcount
        self.var = (m_a + m_b + delta ** 2 * self.count * bcount / tot) / tot
        self.count = tot

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return np.clip((x - self.mean) / np.sqrt(self.var + 1e-8),
                       -self.clip, self.clip)

    def state_arrays(self) -> dict:
        return {"norm_mean": self.mean, "norm_var": self.var,
                "norm_count": np.array([self.count])}

    @classmethod
    def from_arrays(cls, arrays: dict) -> "RunningNorm":
        out = cls(arrays["norm_mean"].shape[0])
        out.mean = arrays["norm_mean"].copy()
        out.var = arrays["norm_var"].copy()
        out.count = float(arrays["norm_count"][0])
        return out


class GaussianPolicy:
    """Diagonal Gaussian over actions; the net provides the mean."""

    def __init__(self, net, act_dim: int, init_log_std: float = -1.0,
                 obs_norm: RunningNorm | None = None):
        self.net = net
        self.log_std = np.full(act_dim, float(init_log_std))
        self.obs_norm = obs_norm

    @property
    def params(self) -> list:
        return self.net.params + [self.log_std]

    @property
    def is_moe(self) -> bool:
        return isinstance(self.net, MoENet)

    def normalize_obs(self, obs: np.ndarray) -> np.ndarray:
        return obs if self.obs_norm is None else self.obs_norm.normalize(obs)

    def mean_cached(self, obs: np.ndarray):
        obs = self.normalize_obs(obs)
        if self.is_moe:
            mean, stats, cache = self.net.forward_cached(obs)
        else:
            mean, cache = self.net.forward_cached(obs)
            stats = None
        return mean, stats, cache

    def mean(self, obs: np.ndarray) -> np.ndarray:
        m, _, _ = self.mean_cached(obs)
        return m

    def log_prob(self, mean: np.ndarray, actions: np.ndarray) -> np.ndarray:
        std = np.exp(self.log_std)
        z = (actions - mean) / std
        return -0.5 * (z ** 2 + LOG2PI).sum(axis=-1) - self.log_std.sum()

    def act(self, obs: np.ndarray, rng: np.random.Generator):
        mean, _, _ = self.mean_cached(obs)
        std = np.exp(self.log_std)
        noise = rng.standard_normal(mean.shape)
        actions = mean + std * noise
        return actions, self.log_prob(mean, actions), mean


@dataclass
class TrajectoryBatch:
    obs: np.ndarray        # (T, B, D)
    actions: np.ndarray    # (T, B, A)
    log_probs: np.ndarray  # (T, B)
    rewards: np.ndarray    # (T, B)
    values: np.ndarray     # (T, B)
    dones: np.ndarray      # (T, B)
    valid: np.ndarray      # (T, B) bool
    last_values: np.ndarray        # (B,)
    amp_features: np.ndarray | None = None
    episode_stats: dict = field(default_factory=dict)

    @property
    def n_transitions(self) -> int:
        return int(self.valid.sum())

    def flat(self, arr: np.ndarray) -> np.ndarray:
        mask = self.valid.reshape(-1)
        return arr.reshape(-1, *arr.shape[2:])[mask]


def collect_rollouts(sessions: list, policy: GaussianPolicy, value_net: MLPNet,
                     steps: int, amp_scorer=None, auto_reset: bool = True,
                     update_norm: bool = True) -> TrajectoryBatch:
    """Synchronous fixed-step collection across teacher sessions.

    Each session draws its action noise from its own rng, so identically
    seeded sessions produce identical trajectories. With auto_reset off, a
    finished episode stops collecting and its remaining steps are invalid.
    amp_scorer, when given, maps (prev_state, state) to (features, score);
    the weighted score is added to the stored reward.
    """
    b = len(sessions)
    if steps == 0 or b == 0:
        empty = np.zeros((0, max(b, 0)))
        return TrajectoryBatch(
            obs=np.zeros((0, b, 0)), actions=np.zeros((0, b, 0)),
            log_probs=empty, rewards=empty.copy(), values=empty.copy(),
            dones=empty.copy(), valid=np.zeros((0, b), dtype=bool),
            last_values=np.zeros(b),
        )
    obs_list = [s.reset() if s.state is None else s.current_obs() for s in sessions]
    obs_dim = obs_list[0].shape[0]
    act_dim = policy.log_std.shape[0]

    obs_buf = np.zeros((steps, b, obs_dim))
    act_buf = np.zeros((steps, b, act_dim))
    logp_buf = np.zeros((steps, b))
    rew_buf = np.zeros((steps, b))
    val_buf = np.zeros((steps, b))
    done_buf = np.zeros((steps, b))
    valid = np.zeros((steps, b), dtype=bool)
    amp_rows: list = []
    finished = np.zeros(b, dtype=bool)
    ep_returns, ep_lengths, ep_success = [], [], []
    ep_ret_acc = np.zeros(b)
    ep_len_acc = np.zeros(b, dtype=int)
    term_counts: dict = {}

    obs = np.stack(obs_list)
    for t in range(steps):
        mean, _, _ = policy.mean_cached(obs)
        values = value_net.forward(policy.normalize_obs(obs))[:, 0]
        std = np.exp(policy.log_std)
        for i, s in enumerate(sessions):
            if finished[i]:
                continue
            noise = s.rng.standard_normal(act_dim)
            action = mean[i] + std * noise
            logp = policy.log_prob(mean[i], action)
            prev_state = s.state
            new_obs, reward, done, info = s.step(action)
            if amp_scorer is not None:
                feats, score = amp_scorer(prev_state, s.state)
                amp_rows.append((t, i, feats))
                reward += s.weights["amp"] * score * s.reward_scale
            obs_buf[t, i] = obs[i]
            act_buf[t, i] = action
            logp_buf[t, i] = logp
            rew_buf[t, i] = reward
            val_buf[t, i] = values[i]
            done_buf[t, i] = float(done)
            valid[t, i] = True
            ep_ret_acc[i] += reward
            ep_len_acc[i] += 1
            if done:
                ep_returns.append(ep_ret_acc[i])
                ep_lengths.append(int(ep_len_acc[i]))
                ep_success.append(0.0 if info["terminated"] else 1.0)
                if info["terminated"]:
                    term_counts[info["reason"]] = term_counts.get(info["reason"], 0) + 1
                ep_ret_acc[i] = 0.0
                ep_len_acc[i] = 0
                if auto_reset:
                    new_obs = s.reset()
                else:
                    finished[i] = True
            obs[i] = new_obs
        if finished.all():
            break

    last_values = value_net.forward(policy.normalize_obs(obs))[:, 0]
    if update_norm and policy.obs_norm is not None and valid.any():
        policy.obs_norm.update(obs_buf[valid])

    amp_features = None
    if amp_rows:
        f_dim = amp_rows[0][2].shape[0]
        amp_features = np.zeros((steps, b, f_dim))
        for t, i, feats in amp_rows:
            amp_features[t, i] = feats
    stats = {
        "episode_returns": ep_returns,
        "episode_lengths": ep_lengths,
        "episode_success": ep_success,
        "terminations": term_counts,
    }
    return TrajectoryBatch(
        obs=obs_buf, actions=act_buf, log_probs=logp_buf, rewards=rew_buf,
        values=val_buf, dones=done_buf, valid=valid, last_values=last_values,
        amp_features=amp_features, episode_stats=stats,
    )


def compute_gae(batch: TrajectoryBatch, gamma: float, lam: float) -> tuple:
    adv = accel.gae_scan(batch.rewards, batch.values, batch.dones,
                         batch.last_values, gamma, lam)
    returns = adv + batch.values
    return adv, returns


class PPOUpdateError(RuntimeError):
    pass


def clip_gradient_mask(ratio: np.ndarray, adv: np.ndarray,
                       clip_ratio: float) -> np.ndarray:
    """Rows where the unclipped surrogate branch carries gradient: the
    clipped branch is constant in the parameters, so once the ratio moves
    past the clip in the improving direction the gradient is cut."""
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1 - clip_ratio, 1 + clip_ratio) * adv
    return (unclipped <= clipped) | np.isclose(unclipped, clipped)


def ppo_update(policy: GaussianPolicy, value_net: MLPNet, opt_policy: Adam,
               opt_value: Adam, batch: TrajectoryBatch, cfg: PPOConfig,
               rng: np.random.Generator) -> dict:
    """Clipped-surrogate update over the batch; returns loss statistics."""
    if batch.n_transitions == 0:
        raise ValueError("cannot update from an empty batch")
    adv, returns = compute_gae(batch, cfg.gamma, cfg.gae_lambda)
    obs = batch.flat(batch.obs)
    actions = batch.flat(batch.actions)
    logp_old = batch.flat(batch.log_probs)
    adv = batch.flat(adv)
    returns = batch.flat(returns)
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)

    n = obs.shape[0]
    act_dim = actions.shape[1]
    stats = {"policy_loss": 0.0, "value_loss": 0.0, "kl": 0.0,
             "clip_fraction": 0.0, "entropy": 0.0, "balance": 0.0}
    n_mb = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.minibatch_size):
            mb = order[start:start + cfg.minibatch_size]
            mean, routing, cache = policy.mean_cached(obs[mb])
            std = np.exp(policy.log_std)
            z = (actions[mb] - mean) / std
            logp = -0.5 * (z ** 2 + LOG2PI).sum(axis=1) - policy.log_std.sum()
            ratio = np.exp(logp - logp_old[mb])
            a = adv[mb]
            unclipped = ratio * a
            clipped = np.clip(ratio, 1 - cfg.clip_ratio, 1 + cfg.clip_ratio) * a
            policy_loss = -np.minimum(unclipped, clipped).mean()
            active = clip_gradient_mask(ratio, a, cfg.clip_ratio)
            coef = np.where(active, -a * ratio, 0.0) / mb.size
            if not np.all(np.isfinite(coef)):
                raise PPOUpdateError(
                    f"non-finite surrogate in epoch {epoch}, minibatch "
                    f"{start // cfg.minibatch_size}"
                )
            # dlogp/dmean = z/std ; dlogp/dlog_std = z^2 - 1.
            g_mean = coef[:, None] * (z / std)
            g_log_std = (coef[:, None] * (z ** 2 - 1.0)).sum(axis=0)
            g_log_std -= cfg.entropy_coef * np.ones(act_dim)

            gsoft_layers = None
            bal = 0.0
            if policy.is_moe and cfg.balance_coef > 0.0:
                bal = balance_loss(routing, policy.net.config.balance_eps)
                gp = balance_loss_grad(routing.mean_weights,
                                       policy.net.config.balance_eps)
                gsoft_layers = np.repeat(
                    (cfg.balance_coef * gp / mb.size)[:, None, :], mb.size, axis=1
                )
            if policy.is_moe:
                net_grads, _ = policy.net.backward(cache, g_mean, gsoft_layers)
            else:
                net_grads, _ = policy.net.backward(cache, g_mean)
            opt_policy.step(net_grads + [g_log_std])
            np.clip(policy.log_std, *cfg.log_std_bounds, out=policy.log_std)

            v, vcache = value_net.forward_cached(policy.normalize_obs(obs[mb]))
            v = v[:, 0]
            value_loss = float(np.mean((v - returns[mb]) ** 2))
            gv = (2.0 * (v - returns[mb]) / mb.size)[:, None]
            v_grads, _ = value_net.backward(vcache, gv)
            opt_value.step(v_grads)

            if not np.isfinite(policy_loss) or not np.isfinite(value_loss):
                raise PPOUpdateError(
                    f"NaN loss in epoch {epoch}, minibatch {start // cfg.minibatch_size}"
                )
            stats["policy_loss"] += float(policy_loss)
            stats["value_loss"] += value_loss
            stats["kl"] += float(np.mean(logp_old[mb] - logp))
            stats["clip_fraction"] += float(np.mean(~active))
            stats["entropy"] += float(policy.log_std.sum()
                                      + 0.5 * act_dim * (1 + LOG2PI))
            stats["balance"] += float(bal)
            n_mb += 1
    for k in stats:
        stats[k] /= max(n_mb, 1)
    return stats
