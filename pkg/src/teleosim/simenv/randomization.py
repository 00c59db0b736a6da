"""Episode-level domain randomization: ranges, draws, and drawn parameters."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np


@dataclass(frozen=True)
class RandomizationConfig:
    """Uniform ranges sampled once per episode. Defaults follow the training
    randomization scheme of the full-scale setup; terrain is fixed flat."""

    friction: tuple = (0.6, 2.0)
    com_offset: tuple = (-0.04, 0.04)           # m, each axis
    link_mass_scale: tuple = (0.7, 1.25)
    p_gain_scale: tuple = (0.85, 1.15)
    d_gain_scale: tuple = (0.85, 1.15)
    torque_rfi_fraction: float = 0.05           # of torque limit
    control_delay: tuple = (0.0, 0.020)         # s
    step_delay: tuple = (0.0, 0.080)            # s
    spawn_distance: tuple = (0.0, 2.0)          # m
    spawn_heading_deg: tuple = (-20.0, 20.0)
    push_interval: float = 5.0                  # s
    push_speed: float = 1.5                     # m/s
    terrain: str = "flat"

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                if len(v) != 2 or v[0] > v[1]:
                    raise ValueError(f"range {f.name} must be (low, high) with low <= high")


@dataclass
class EpisodeParams:
    """One concrete draw from a RandomizationConfig.

    Field order defines the env-observation block layout; changing it must
    bump the layout version in the observation builder.
    """

    friction: float = 1.0
    mass_scale: float = 1.0
    com_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    p_gain_scale: float = 1.0
    d_gain_scale: float = 1.0
    rfi_fraction: float = 0.0
    control_delay: float = 0.0
    step_delay: float = 0.0
    spawn_distance: float = 0.0
    spawn_heading: float = 0.0
    push_interval: float = 0.0                  # 0 disables pushes
    push_speed: float = 0.0
    terrain: str = "flat"


def nominal_params() -> EpisodeParams:
    """Params with all randomization collapsed to its nominal point."""
    return EpisodeParams()


def sample_randomization(cfg: RandomizationConfig, rng: np.random.Generator
                         ) -> EpisodeParams:
    """Draw one episode's parameters, one uniform draw per configured range."""
    u = rng.uniform
    return EpisodeParams(
        friction=u(*cfg.friction),
        mass_scale=u(*cfg.link_mass_scale),
        com_offset=u(cfg.com_offset[0], cfg.com_offset[1], size=3),
        p_gain_scale=u(*cfg.p_gain_scale),
        d_gain_scale=u(*cfg.d_gain_scale),
        rfi_fraction=cfg.torque_rfi_fraction,
        control_delay=u(*cfg.control_delay),
        step_delay=u(*cfg.step_delay),
        spawn_distance=u(*cfg.spawn_distance),
        spawn_heading=np.deg2rad(u(*cfg.spawn_heading_deg)),
        push_interval=cfg.push_interval,
        push_speed=cfg.push_speed,
        terrain=cfg.terrain,
    )
