"""Simulated odometry providers and the closed-loop correction signal.

Providers decimate a 50 Hz ground-truth pose stream to 10 Hz samples and
overlay a clamped velocity-dependent diffusion plus a yaw random walk scaled
by yaw change. Consumers always take the latest sample at or before their
tick time; nothing interpolates or blocks.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from .mathcore import DriftModel, wrap_angle

ODOMETRY_RATE_HZ = 10.0
SAMPLE_PERIOD = 1.0 / ODOMETRY_RATE_HZ


@dataclass(frozen=True)
class OdometrySample:
    position: np.ndarray
    yaw: float
    timestamp: float
    source: str  # "robot" | "operator"


class OdometryProvider:
    """Append-only 10 Hz sample stream built from observed true poses.

    Drift state: a 3-vector deviation evolving by the diffusion increment of
    the drift model (clamped radially, reset on schedule) and a scalar yaw
    deviation random-walking with the amount of yaw change per sample.
    """

    def __init__(self, source: str, drift: DriftModel | None,
                 rng: np.random.Generator, yaw_noise_per_rad: float = 0.01,
                 rate_hz: float = ODOMETRY_RATE_HZ):
        self.source = source
        self.drift = drift
        self.rng = rng
        self.yaw_noise_per_rad = yaw_noise_per_rad
        self.period = 1.0 / rate_hz
        self._timestamps: list[float] = []
        self._samples: list[OdometrySample] = []
        self._deviation = np.zeros(3)
        self._yaw_dev = 0.0
        self._next_t = 0.0
        self._last_true_yaw: float | None = None
        self._last_reset = 0.0

    def observe(self, t: float, position: np.ndarray, yaw: float,
                velocity: np.ndarray) -> OdometrySample | None:
        """Feed one true pose; emits a sample when t reaches the 10 Hz grid."""
        if t + 1e-9 < self._next_t:
            return None
        dt = self.period
        if self.drift is not None:
            sigma = self.drift.sigma(velocity)
            self._deviation = self._deviation + sigma * np.sqrt(dt) * self.rng.standard_normal(3)
            nrm = float(np.linalg.norm(self._deviation))
            if nrm > self.drift.max_deviation:
                self._deviation *= self.drift.max_deviation / nrm
            if t - self._last_reset >= self.drift.reset_interval - 1e-9:
                self._deviation[:] = 0.0
                self._yaw_dev = 0.0
                self._last_reset = t
            if self._last_true_yaw is not None:
                dyaw = abs(wrap_angle(yaw - self._last_true_yaw))
                if dyaw > 0:
                    self._yaw_dev += self.rng.normal(0.0, self.yaw_noise_per_rad * dyaw)
        self._last_true_yaw = yaw
        sample = OdometrySample(
            position=np.asarray(position, float) + self._deviation,
            yaw=wrap_angle(yaw + self._yaw_dev),
            timestamp=t,
            source=self.source,
        )
        self._timestamps.append(t)
        self._samples.append(sample)
        self._next_t += self.period
        return sample

    def latest(self, t: float) -> OdometrySample:
        return latest_sample(self._samples, t, self._timestamps)

    @property
    def samples(self) -> list[OdometrySample]:
        return self._samples


def simulate_odometry(timestamps: np.ndarray, positions: np.ndarray,
                      yaws: np.ndarray, drift: DriftModel | None,
                      rng: np.random.Generator, source: str = "robot",
                      rate_hz: float = ODOMETRY_RATE_HZ) -> list[OdometrySample]:
    """Run a provider over a full trajectory and return its sample stream.

    The trajectory must cover the requested span; velocities come from
    finite differences of the true positions.
    """
    timestamps = np.asarray(timestamps, float)
    if timestamps.size == 0:
        raise ValueError("empty trajectory")
    positions = np.asarray(positions, float)
    provider = OdometryProvider(source, drift, rng, rate_hz=rate_hz)
    vel = np.zeros_like(positions)
    if timestamps.size > 1:
        vel[1:] = (positions[1:] - positions[:-1]) / np.diff(timestamps)[:, None]
        vel[0] = vel[1]
    for i in range(timestamps.size):
        provider.observe(timestamps[i] - timestamps[0], positions[i],
                         float(yaws[i]), vel[i])
    return provider.samples


def latest_sample(samples: list[OdometrySample], t: float,
                  timestamps: list[float] | None = None) -> OdometrySample:
    """Most recent sample with timestamp <= t; never interpolates."""
    if timestamps is None:
        timestamps = [s.timestamp for s in samples]
    if not samples or t + 1e-12 < timestamps[0]:
        raise ValueError(f"no odometry sample at or before t={t:.3f}")
    idx = bisect.bisect_right(timestamps, t + 1e-12) - 1
    return samples[idx]


def _yaw_frame(delta_world: np.ndarray, yaw: float) -> np.ndarray:
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([
        c * delta_world[0] + s * delta_world[1],
        -s * delta_world[0] + c * delta_world[1],
        delta_world[2],
    ])


def _check_sources(robot: OdometrySample, operator: OdometrySample) -> None:
    if robot.source == operator.source:
        raise ValueError(
            f"correction needs one robot and one operator sample, got two "
            f"{robot.source!r}"
        )


class CorrectionTracker:
    """Produces the positional correction the policy consumes.

    closed_loop: the operator-minus-robot position difference, expressed in
    the robot's yaw frame, plus the yaw difference.

    open_loop: no robot position feedback after initialization. The tracker
    dead-reckons an assumed robot pose by integrating operator displacement
    increments from the robot's starting pose, so tracking slip is invisible
    and accumulates, reproducing the drift-prone baseline.
    """

    def __init__(self, mode: str = "closed_loop"):
        if mode not in ("closed_loop", "open_loop"):
            raise ValueError(f"unknown correction mode {mode!r}")
        self.mode = mode
        self._assumed_pos: np.ndarray | None = None
        self._assumed_yaw = 0.0
        self._last_op: OdometrySample | None = None

    def reset(self) -> None:
        self._assumed_pos = None
        self._last_op = None

    def update(self, robot: OdometrySample, operator: OdometrySample
               ) -> tuple[np.ndarray, float]:
        _check_sources(robot, operator)
        if self.mode == "closed_loop":
            delta = operator.position - robot.position
            return _yaw_frame(delta, robot.yaw), wrap_angle(operator.yaw - robot.yaw)
        if self._assumed_pos is None:
            self._assumed_pos = robot.position.copy()
            self._assumed_yaw = robot.yaw
        elif self._last_op is not None:
            self._assumed_pos = self._assumed_pos + (
                operator.position - self._last_op.position
            )
            self._assumed_yaw = wrap_angle(
                self._assumed_yaw + wrap_angle(operator.yaw - self._last_op.yaw)
            )
        self._last_op = operator
        delta = operator.position - self._assumed_pos
        return _yaw_frame(delta, self._assumed_yaw), wrap_angle(
            operator.yaw - self._assumed_yaw
        )

    def assumed_pose(self) -> tuple[np.ndarray, float]:
        """Robot pose estimate the current mode implies (open loop: the
        dead-reckoned pose; closed loop asserts it is unused)."""
        if self._assumed_pos is None:
            raise ValueError("tracker has not seen a sample yet")
        return self._assumed_pos.copy(), self._assumed_yaw


def correction_signal(robot: OdometrySample, operator: OdometrySample,
                      mode: str = "closed_loop",
                      tracker: CorrectionTracker | None = None
                      ) -> tuple[np.ndarray, float]:
    """Functional entry point. closed_loop is stateless; open_loop needs the
    caller to hold a CorrectionTracker across calls."""
    if mode == "closed_loop":
        _check_sources(robot, operator)
        delta = operator.position - robot.position
        return _yaw_frame(delta, robot.yaw), wrap_angle(operator.yaw - robot.yaw)
    if mode == "open_loop":
        if tracker is None:
            raise ValueError("open_loop correction needs a CorrectionTracker")
        return tracker.update(robot, operator)
    raise ValueError(f"unknown correction mode {mode!r}")
