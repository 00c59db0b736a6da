"""Student distillation: DAgger with annealed teacher mixing.

The student rolls out in its own observation space (noise-injected head
position during training), the teacher is queried on the same underlying
states through its privileged observation, and the student regresses the
teacher's mean action under an aggregated-dataset MSE objective plus the
router balancing term. Plain behavior cloning (execute the teacher
throughout) stays available via the algorithm switch, as does an optional
student-side PPO fine-tune.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..mathcore import DriftModel
from ..policy.moe import MoEConfig, MoENet, balance_loss, balance_loss_grad, RoutingStats
from ..policy.nets import Adam
from ..policy.observations import STUDENT_OBS_DIM
from ..simenv.model import RobotModel, NUM_JOINTS
from ..simenv.randomization import EpisodeParams
from ..simenv.rewards import compute_reward, training_reward_weights
from .drift import DEFAULT_DRIFT
from .ppo import GaussianPolicy, PPOConfig, RunningNorm, ppo_update, collect_rollouts
from .sessions import StudentSession, NOISE_INJECTED, NOISE_NONE


@dataclass
class DistillConfig:
    iterations: int = 40
    n_envs: int = 8
    steps_per_iter: int = 200
    epochs: int = 4
    minibatch: int = 1024
    lr: float = 1e-3
    balance_coef: float = 0.02
    beta_anneal_iters: int = 20
    buffer_capacity: int = 150_000
    lr_final: float = 3e-4
    algorithm: str = "dagger"          # or "bc"
    observation_noise: bool = True
    drift: DriftModel = field(default_factory=lambda: DEFAULT_DRIFT)
    push_interval: float = 5.0         # rollout pushes, so recovery states
    push_speed: float = 1.5            # appear in the aggregated dataset
    student_ppo_finetune: bool = False
    finetune: PPOConfig | None = None

    def __post_init__(self):
        if self.algorithm not in ("dagger", "bc"):
            raise ValueError("algorithm must be 'dagger' or 'bc'")


class AggregatedBuffer:
    """FIFO-capped dataset of (student obs, teacher action) pairs."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.act = np.zeros((capacity, act_dim))
        self.size = 0
        self._next = 0

    def add(self, obs: np.ndarray, act: np.ndarray) -> None:
        for o, a in zip(obs, act):
            self.obs[self._next] = o
            self.act[self._next] = a
            self._next = (self._next + 1) % self.capacity
            self.size = min(self.size + 1, self.capacity)

    def sample(self, n: int, rng: np.random.Generator):
        idx = rng.integers(0, self.size, size=min(n, self.size))
        return self.obs[idx], self.act[idx]


def beta_schedule(iteration: int, cfg: DistillConfig) -> float:
    if cfg.algorithm == "bc":
        return 1.0
    if cfg.beta_anneal_iters <= 0:
        return 0.0
    return max(0.0, 1.0 - iteration / cfg.beta_anneal_iters)


def distill_student(teacher: GaussianPolicy, student_cfg: MoEConfig,
                    model: RobotModel, tracks, cfg: DistillConfig, seed: int,
                    log_writer=None, progress=None):
    """Returns (student GaussianPolicy, history)."""
    if student_cfg.act_dim != teacher.log_std.shape[0]:
        raise ValueError(
            f"teacher action dim {teacher.log_std.shape[0]} does not match "
            f"student config {student_cfg.act_dim}"
        )
    rng = np.random.default_rng(seed)
    net = MoENet(student_cfg, rng)
    obs_norm = RunningNorm(student_cfg.obs_dim)
    student = GaussianPolicy(net, student_cfg.act_dim, init_log_std=-2.0,
                             obs_norm=obs_norm)
    opt = Adam(net.params, lr=cfg.lr)
    buffer = AggregatedBuffer(cfg.buffer_capacity, student_cfg.obs_dim,
                              student_cfg.act_dim)
    noise_mode = NOISE_INJECTED if cfg.observation_noise else NOISE_NONE
    params = EpisodeParams(push_interval=cfg.push_interval,
                           push_speed=cfg.push_speed)
    sessions = [
        StudentSession(model, tracks, seed=seed + 500 + i, noise_mode=noise_mode,
                       drift=cfg.drift, params=params)
        for i in range(cfg.n_envs)
    ]
    history = []
    for it in range(cfg.iterations):
        beta = beta_schedule(it, cfg)
        frac = it / max(cfg.iterations - 1, 1)
        opt.lr = cfg.lr + (cfg.lr_final - cfg.lr) * frac
        obs_rows, act_rows = [], []
        for s in sessions:
            obs = s.reset() if s.state is None else s.current_obs()
            for _ in range(cfg.steps_per_iter):
                teacher_action = teacher.mean(s.teacher_obs())
                student_action = student.mean(obs)
                executed = beta * teacher_action + (1.0 - beta) * student_action
                obs_rows.append(obs)
                act_rows.append(teacher_action)
                obs, done, _info = s.step(executed)
                if done:
                    obs = s.reset()
        obs_arr = np.array(obs_rows)
        buffer.add(obs_arr, np.array(act_rows))
        obs_norm.update(obs_arr)

        mse = bal = 0.0
        n_mb = 0
        for _ in range(cfg.epochs):
            o, a = buffer.sample(cfg.minibatch, rng)
            mean, stats, cache = student.mean_cached(o)
            err = mean - a
            mse_mb = float(np.mean(err ** 2))
            gout = 2.0 * err / err.size
            gsoft = None
            bal_mb = 0.0
            if cfg.balance_coef > 0:
                bal_mb = balance_loss(stats, student_cfg.balance_eps)
                gp = balance_loss_grad(stats.mean_weights, student_cfg.balance_eps)
                gsoft = np.repeat(
                    (cfg.balance_coef * gp / o.shape[0])[:, None, :], o.shape[0], axis=1
                )
            grads, _ = net.backward(cache, gout, gsoft)
            opt.step(grads)
            mse += mse_mb
            bal += bal_mb
            n_mb += 1
        routing_p = stats.mean_weights.tolist()
        row = {
            "iteration": it, "beta": beta, "mse": mse / n_mb,
            "balance": bal / n_mb, "buffer": buffer.size,
            "routing_mean_weights": routing_p,
        }
        history.append(row)
        if log_writer is not None:
            log_writer.write(row)
        if progress is not None:
            progress(row)
    return student, history


def evaluate_distillation_mse(teacher: GaussianPolicy, student: GaussianPolicy,
                              model: RobotModel, tracks, seed: int,
                              n_states: int = 2000) -> float:
    """Mean squared action error on held-out on-policy student states with
    observation noise off and no teacher mixing."""
    session = StudentSession(model, tracks, seed=seed, noise_mode=NOISE_NONE)
    total, count = 0.0, 0
    obs = session.reset()
    while count < n_states:
        t_act = teacher.mean(session.teacher_obs())
        s_act = student.mean(obs)
        total += float(np.mean((t_act - s_act) ** 2))
        count += 1
        obs, done, _ = session.step(s_act)
        if done:
            obs = session.reset()
    return total / count


class StudentRewardSession(StudentSession):
    """Student session that also reports the tracking reward, so the student
    can be fine-tuned with PPO after distillation."""

    def __init__(self, *args, reward_scale: float = 0.01, **kwargs):
        super().__init__(*args, **kwargs)
        self.weights = training_reward_weights()
        self.reward_scale = reward_scale

    def step(self, action: np.ndarray):
        obs, done, info = super().step(action)
        ref = self.track.at(self.frame)
        breakdown = compute_reward(
            self.model, self.state, info["prev_state"], np.asarray(action, float),
            self.prev_action, ref, amp_score=0.0,
            terminated=info["terminated"], weights=self.weights, dt=self.dt,
        )
        return obs, breakdown.total * self.reward_scale, done, info


def student_ppo_finetune(student: GaussianPolicy, model: RobotModel, tracks,
                         cfg: PPOConfig, seed: int, drift: DriftModel | None = None,
                         log_writer=None) -> list[dict]:
    """Optional PPO stage on the distilled student (off by default)."""
    from ..policy.nets import MLPNet

    rng = np.random.default_rng(seed)
    value_net = MLPNet([STUDENT_OBS_DIM, 256, 128, 1], rng)
    opt_p = Adam(student.params, lr=cfg.lr)
    opt_v = Adam(value_net.params, lr=cfg.value_lr)
    sessions = [
        StudentRewardSession(model, tracks, seed=seed + 900 + i,
                             noise_mode=NOISE_INJECTED if drift else NOISE_NONE,
                             drift=drift, reward_scale=cfg.reward_scale)
        for i in range(cfg.n_envs)
    ]
    history = []
    for it in range(cfg.iterations):
        batch = collect_rollouts(sessions, student, value_net, cfg.rollout_steps)
        stats = ppo_update(student, value_net, opt_p, opt_v, batch, cfg, rng)
        row = {"iteration": it, **{k: float(v) for k, v in stats.items()}}
        history.append(row)
        if log_writer is not None:
            log_writer.write(row)
    return history
