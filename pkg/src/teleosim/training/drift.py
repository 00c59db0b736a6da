"""Observation-noise injection: the clamped diffusion deviation applied to
the head estimate during training, with FK keypoints rigidly translated."""

from __future__ import annotations

import numpy as np

from ..mathcore import DriftModel

# Training defaults for the drift process. Invented plumbing constants,
# surfaced here and in the run config; not measured values.
DEFAULT_DRIFT = DriftModel(
    c_vel=5.0, c_min=0.01, max_deviation=0.25, reset_interval=10.0
)
DEFAULT_OPERATOR_DRIFT = DriftModel(
    c_vel=5.0, c_min=0.005, max_deviation=0.25, reset_interval=10.0
)


class DriftInjector:
    """Per-environment deviation state for the velocity-dependent diffusion.

    The deviation evolves by the diffusion increment only (the true motion
    carries the transport term), is clamped radially to max_deviation, and is
    zeroed exactly on the reset schedule.
    """

    def __init__(self, model: DriftModel, rng: np.random.Generator):
        self.model = model
        self.rng = rng
        self.deviation = np.zeros(3)
        self._t = 0.0
        self._last_reset = 0.0

    def reset(self) -> None:
        self.deviation = np.zeros(3)
        self._t = 0.0
        self._last_reset = 0.0

    def advance(self, velocity: np.ndarray, dt: float) -> np.ndarray:
        """One control step of the deviation process; returns the deviation."""
        sigma = self.model.sigma(velocity)
        self.deviation = self.deviation + sigma * np.sqrt(dt) * self.rng.standard_normal(3)
        nrm = float(np.linalg.norm(self.deviation))
        if nrm > self.model.max_deviation:
            self.deviation *= self.model.max_deviation / nrm
        self._t += dt
        if self._t - self._last_reset >= self.model.reset_interval - 1e-9:
            self.deviation = np.zeros(3)
            self._last_reset = self._t
        return self.deviation.copy()


def inject_observation_noise(true_head_pos: np.ndarray, true_head_vel: np.ndarray,
                             injector: DriftInjector, dt: float,
                             keypoints: np.ndarray | None = None):
    """Advance the injector and produce the noisy head position.

    When a keypoint stack is given it is rigidly translated by the same
    deviation, mirroring FK recomputed from the randomized head.
    Returns (noisy_head, noisy_keypoints | None).
    """
    dev = injector.advance(np.asarray(true_head_vel, float), dt)
    noisy_head = np.asarray(true_head_pos, float) + dev
    noisy_kp = None if keypoints is None else np.asarray(keypoints, float) + dev
    return noisy_head, noisy_kp
