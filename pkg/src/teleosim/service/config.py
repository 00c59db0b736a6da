"""Run configuration: one file fully determines a run.

JSON or YAML, strict keys (unknown keys are rejected at every level), with a
content fingerprint that names run directories and stamps reports. The
full-scale constants from the published setup are kept as a preset for
config parity; desk-scale defaults are what actually runs here.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from ..mathcore import DriftModel
from ..policy.moe import MoEConfig, FULL_SCALE_TRUNK
from ..policy.observations import STUDENT_OBS_DIM
from ..simenv.model import NUM_JOINTS, FULL_SCALE_ACTION_DIM
from ..simenv.randomization import RandomizationConfig
from ..training.amp import AmpConfig
from ..training.distill import DistillConfig
from ..training.ppo import PPOConfig, FULL_SCALE_TEACHER, FULL_SCALE_STUDENT


class ConfigError(ValueError):
    pass


@dataclass
class PolicySection:
    n_layers: int = 3
    n_experts: int = 4
    top_k: int = 2
    balance_eps: float = 0.2
    trunk: tuple = (256, 128, 128, 64)
    history_len: int = 25
    router_scale: float = 0.01
    teacher_hidden: tuple = (512, 256, 128)
    value_hidden: tuple = (256, 128)

    def moe_config(self) -> MoEConfig:
        return MoEConfig(
            obs_dim=STUDENT_OBS_DIM, act_dim=NUM_JOINTS,
            n_layers=self.n_layers, n_experts=self.n_experts, top_k=self.top_k,
            balance_eps=self.balance_eps, trunk=tuple(self.trunk),
            history_len=self.history_len, router_scale=self.router_scale,
        )


@dataclass
class DriftSection:
    c_vel: float = 5.0
    c_min: float = 0.01
    max_deviation: float = 0.25
    reset_interval: float = 10.0
    operator_c_min: float = 0.005

    def robot_model(self) -> DriftModel:
        return DriftModel(self.c_vel, self.c_min, self.max_deviation,
                          self.reset_interval)

    def operator_model(self) -> DriftModel:
        return DriftModel(self.c_vel, self.operator_c_min, self.max_deviation,
                          self.reset_interval)


@dataclass
class TrainingSection:
    teacher_ppo: PPOConfig = field(default_factory=PPOConfig)
    teacher_categories: tuple = ("stand", "walk")
    clips_per_category: int = 2
    clip_duration: float = 8.0
    termination_grace: float = 3.0
    amp_enabled: bool = False
    amp: AmpConfig = field(default_factory=AmpConfig)
    distill: DistillConfig = field(default_factory=DistillConfig)


@dataclass
class ExperimentSection:
    path_trials: int = 10
    straight_distances: tuple = (3.0, 6.0, 8.9)
    curved_distance: float = 10.0
    stance_heights: tuple = (1.2, 1.1, 1.0, 0.9, 0.8, 0.7, 0.6)
    stance_trials: int = 3
    eval_episodes: int = 20


@dataclass
class RunConfig:
    seed: int = 0
    data_duration: float = 4.0
    policy: PolicySection = field(default_factory=PolicySection)
    drift: DriftSection = field(default_factory=DriftSection)
    training: TrainingSection = field(default_factory=TrainingSection)
    randomization: RandomizationConfig = field(default_factory=RandomizationConfig)
    experiments: ExperimentSection = field(default_factory=ExperimentSection)

    def fingerprint(self) -> str:
        canon = json.dumps(asdict(self), sort_keys=True, default=_json_default)
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


# Constants of the published full-scale setup, for reference and presets.
FULL_SCALE_PRESET = {
    "action_dim": FULL_SCALE_ACTION_DIM,
    "trunk": FULL_SCALE_TRUNK,
    "teacher": FULL_SCALE_TEACHER,
    "student": FULL_SCALE_STUDENT,
    "discriminator_hidden": (256, 256, 256),
    "history_len": 25,
}


def _json_default(o):
    import numpy as np

    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o)}")


_NESTED = {
    (RunConfig, "policy"): PolicySection,
    (RunConfig, "drift"): DriftSection,
    (RunConfig, "training"): TrainingSection,
    (RunConfig, "randomization"): RandomizationConfig,
    (RunConfig, "experiments"): ExperimentSection,
    (TrainingSection, "teacher_ppo"): PPOConfig,
    (TrainingSection, "amp"): AmpConfig,
    (TrainingSection, "distill"): DistillConfig,
    (DistillConfig, "drift"): DriftModel,
    (DistillConfig, "finetune"): PPOConfig,
}


def _build(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'} must be a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in {path or 'config'}; "
            f"known keys: {sorted(known)}"
        )
    kwargs = {}
    for name, value in data.items():
        sub = _NESTED.get((cls, name))
        if sub is not None and isinstance(value, dict):
            kwargs[name] = _build(sub, value, f"{path}.{name}" if path else name)
        else:
            if isinstance(value, list):
                value = tuple(value)
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid {path or 'config'}: {e}") from e


def load_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    if path.suffix in (".yaml", ".yml"):
        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text or "{}")
    return _build(RunConfig, data, "")


def default_config() -> RunConfig:
    return RunConfig()


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(
        json.dumps(asdict(cfg), sort_keys=True, indent=2, default=_json_default) + "\n"
    )
