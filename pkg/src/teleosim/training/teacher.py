"""Desk-scale PPO training of the privileged teacher."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..motiondata.generators import synth_generate
from ..motiondata.refs import ReferenceTrack, build_reference_track
from ..policy.nets import Adam, MLPNet
from ..policy.observations import TEACHER_OBS_DIM
from ..simenv.model import RobotModel, NUM_JOINTS
from ..simenv.randomization import RandomizationConfig
from .amp import AmpConfig, AmpDiscriminator, amp_update_and_reward, \
    reference_features, transition_features
from .ppo import GaussianPolicy, PPOConfig, RunningNorm, collect_rollouts, ppo_update
from .sessions import TeacherSession


@dataclass
class TeacherTrainConfig:
    ppo: PPOConfig = field(default_factory=PPOConfig)
    policy_hidden: tuple = (512, 256, 128)
    value_hidden: tuple = (256, 128)
    categories: tuple = ("stand", "walk")
    clips_per_category: int = 2
    clip_duration: float = 8.0
    termination_grace: float = 3.0
    amp_enabled: bool = False
    amp: AmpConfig = field(default_factory=AmpConfig)


def make_training_tracks(model: RobotModel, categories, clips_per_category: int,
                         duration: float, rng: np.random.Generator
                         ) -> list[ReferenceTrack]:
    tracks = []
    for cat in categories:
        for _ in range(clips_per_category):
            clip = synth_generate(cat, duration, rng, model)
            tracks.append(build_reference_track(clip, model))
    return tracks


def train_teacher(model: RobotModel, cfg: TeacherTrainConfig,
                  rand_cfg: RandomizationConfig | None, seed: int,
                  tracks: list[ReferenceTrack] | None = None,
                  log_writer=None, progress=None):
    """Returns (policy, value_net, history). History rows carry per-iteration
    losses, episode statistics, and reward-term means."""
    rng = np.random.default_rng(seed)
    if tracks is None:
        tracks = make_training_tracks(
            model, cfg.categories, cfg.clips_per_category, cfg.clip_duration, rng
        )
    ppo_cfg = cfg.ppo
    obs_norm = RunningNorm(TEACHER_OBS_DIM)
    net = MLPNet([TEACHER_OBS_DIM] + list(cfg.policy_hidden) + [NUM_JOINTS],
                 rng, out_scale=0.01)
    policy = GaussianPolicy(net, NUM_JOINTS, ppo_cfg.init_log_std, obs_norm)
    value_net = MLPNet([TEACHER_OBS_DIM] + list(cfg.value_hidden) + [1], rng)
    opt_p = Adam(policy.params, lr=ppo_cfg.lr)
    opt_v = Adam(value_net.params, lr=ppo_cfg.value_lr)

    sessions = [
        TeacherSession(model, tracks, rand_cfg, seed=seed + 1000 + i,
                       termination_grace=cfg.termination_grace,
                       reward_scale=ppo_cfg.reward_scale)
        for i in range(ppo_cfg.n_envs)
    ]
    disc = None
    amp_scorer = None
    if cfg.amp_enabled:
        disc = AmpDiscriminator(cfg.amp, rng)
        amp_scorer = disc.score_transition

    update_rng = np.random.default_rng(seed + 7)
    history = []
    for it in range(ppo_cfg.iterations):
        batch = collect_rollouts(sessions, policy, value_net,
                                 ppo_cfg.rollout_steps, amp_scorer=amp_scorer)
        if disc is not None and batch.amp_features is not None:
            fake = batch.flat(batch.amp_features)
            real = reference_features(tracks, fake.shape[0], rng)
            _, disc_stats = amp_update_and_reward(disc, real, fake)
        else:
            disc_stats = {}
        stats = ppo_update(policy, value_net, opt_p, opt_v, batch, ppo_cfg,
                           update_rng)
        ep = batch.episode_stats
        row = {
            "iteration": it,
            "mean_return": float(np.mean(ep["episode_returns"])) if ep["episode_returns"] else 0.0,
            "success_rate": float(np.mean(ep["episode_success"])) if ep["episode_success"] else 0.0,
            "episodes": len(ep["episode_returns"]),
            "terminations": ep["terminations"],
            **{k: float(v) for k, v in stats.items()},
            **{f"amp_{k}": float(v) for k, v in disc_stats.items()},
        }
        history.append(row)
        if log_writer is not None:
            log_writer.write(row)
        if progress is not None:
            progress(row)
    return policy, value_net, history


def evaluate_success_rate(policy: GaussianPolicy, model: RobotModel,
                          tracks: list[ReferenceTrack],
                          rand_cfg: RandomizationConfig | None, seed: int,
                          episodes: int = 20,
                          termination_grace: float = 2.0) -> float:
    """Deterministic-mean rollouts; fraction of episodes with no termination."""
    session = TeacherSession(model, tracks, rand_cfg, seed=seed,
                             termination_grace=termination_grace)
    successes = 0
    for k in range(episodes):
        obs = session.reset()
        done = False
        failed = False
        while not done:
            action = policy.mean(obs)
            obs, _r, done, info = session.step(action)
            failed = info["terminated"]
        successes += 0 if failed else 1
    return successes / episodes
