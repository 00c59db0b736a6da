import numpy as np
import pytest

from teleosim import odometry as od
from teleosim.mathcore import DriftModel


def straight_trajectory(duration=10.0, speed=1.0, dt=0.02):
    ts = np.arange(0.0, duration + dt / 2, dt)
    pos = np.zeros((ts.size, 3))
    pos[:, 0] = speed * ts
    yaws = np.zeros(ts.size)
    return ts, pos, yaws


class TestSimulateOdometry:
    def test_zero_noise_equals_decimated_truth(self):
        ts, pos, yaws = straight_trajectory(4.0)
        samples = od.simulate_odometry(ts, pos, yaws, None,
                                       np.random.default_rng(0))
        assert all(abs(s.timestamp * 10 - round(s.timestamp * 10)) < 1e-6
                   for s in samples)
        for s in samples:
            idx = int(round(s.timestamp / 0.02))
            assert np.allclose(s.position, pos[idx])
            assert s.yaw == yaws[idx]

    def test_ten_second_span_gives_101_samples(self):
        ts, pos, yaws = straight_trajectory(10.0)
        samples = od.simulate_odometry(ts, pos, yaws, None,
                                       np.random.default_rng(0))
        assert len(samples) == 101

    def test_stationary_random_walk_increment_std(self):
        drift = DriftModel(c_vel=5.0, c_min=0.02, max_deviation=100.0,
                           reset_interval=1e9)
        ts = np.arange(0.0, 600.0, 0.02)
        pos = np.zeros((ts.size, 3))
        samples = od.simulate_odometry(ts, pos, np.zeros(ts.size), drift,
                                       np.random.default_rng(3))
        positions = np.array([s.position for s in samples])
        incs = np.diff(positions, axis=0)
        expected = drift.c_min * np.sqrt(0.1)
        assert incs.std() == pytest.approx(expected, rel=0.10)

    def test_empty_trajectory_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            od.simulate_odometry(np.array([]), np.zeros((0, 3)), np.array([]),
                                 None, np.random.default_rng(0))


class TestLatestSample:
    def make_samples(self, n=5):
        return [
            od.OdometrySample(position=np.array([float(i), 0, 0]), yaw=0.0,
                              timestamp=0.1 * i, source="robot")
            for i in range(n)
        ]

    def test_between_samples_takes_earlier(self):
        samples = self.make_samples(4)
        s = od.latest_sample(samples, 0.25)
        assert s.timestamp == pytest.approx(0.2)

    def test_exact_timestamp_returns_that_sample(self):
        samples = self.make_samples(4)
        assert od.latest_sample(samples, 0.2).timestamp == pytest.approx(0.2)

    def test_five_policy_ticks_share_one_sample(self):
        samples = self.make_samples(10)
        shared = [od.latest_sample(samples, 0.30 + 0.02 * k).timestamp
                  for k in range(5)]
        assert all(t == pytest.approx(0.3) for t in shared)
        next_tick = od.latest_sample(samples, 0.40).timestamp
        assert next_tick == pytest.approx(0.4)

    def test_before_first_sample_is_error(self):
        samples = self.make_samples(2)
        with pytest.raises(ValueError):
            od.latest_sample(samples, -0.05)

    def test_monotone_in_time(self):
        samples = self.make_samples(20)
        prev = -1.0
        for t in np.linspace(0.0, 1.9, 97):
            s = od.latest_sample(samples, float(t))
            assert s.timestamp >= prev
            prev = s.timestamp


def sample(pos, yaw, t, source):
    return od.OdometrySample(position=np.asarray(pos, float), yaw=yaw,
                             timestamp=t, source=source)


class TestCorrectionSignal:
    def test_colocated_is_zero(self):
        rob = sample([1.0, 2.0, 0.8], 0.3, 1.0, "robot")
        op = sample([1.0, 2.0, 0.8], 0.3, 1.0, "operator")
        delta, dyaw = od.correction_signal(rob, op, "closed_loop")
        assert np.allclose(delta, 0.0)
        assert dyaw == pytest.approx(0.0)

    def test_operator_ahead_along_heading(self):
        yaw = 0.7
        rob = sample([0.0, 0.0, 0.8], yaw, 1.0, "robot")
        ahead = np.array([np.cos(yaw), np.sin(yaw), 0.8])
        op = sample(ahead, yaw, 1.0, "operator")
        delta, dyaw = od.correction_signal(rob, op, "closed_loop")
        assert np.allclose(delta, [1.0, 0.0, 0.0], atol=1e-12)
        assert dyaw == pytest.approx(0.0)

    def test_closed_loop_equivariant_under_rigid_transform(self, rng):
        rob = sample(rng.uniform(-2, 2, 3), 0.4, 1.0, "robot")
        op = sample(rng.uniform(-2, 2, 3), 0.9, 1.0, "operator")
        base_delta, base_dyaw = od.correction_signal(rob, op, "closed_loop")
        ang = 1.234
        shift = np.array([5.0, -3.0, 0.7])
        c, s = np.cos(ang), np.sin(ang)
        rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
        rob2 = sample(rot @ rob.position + shift, rob.yaw + ang, 1.0, "robot")
        op2 = sample(rot @ op.position + shift, op.yaw + ang, 1.0, "operator")
        delta2, dyaw2 = od.correction_signal(rob2, op2, "closed_loop")
        assert np.allclose(delta2, base_delta, atol=1e-12)
        assert dyaw2 == pytest.approx(base_dyaw)

    def test_open_loop_ignores_robot_jump(self):
        tracker = od.CorrectionTracker("open_loop")
        op_path = [sample([0.1 * i, 0, 0], 0.0, 0.1 * i, "operator")
                   for i in range(10)]
        rob = sample([0.0, 0.0, 0.0], 0.0, 0.0, "robot")
        signals = []
        for i, op in enumerate(op_path):
            r = rob if i < 5 else sample([50.0, 0, 0], 0.0, 0.1 * i, "robot")
            delta, _ = tracker.update(r, op)
            signals.append(delta.copy())
        # the jump at i=5 leaves the signal sequence smooth
        diffs = np.diff(np.array(signals), axis=0)
        assert np.abs(diffs).max() < 0.2

    def test_perfect_tracking_makes_modes_coincide(self):
        tracker = od.CorrectionTracker("open_loop")
        for i in range(20):
            pos = np.array([0.05 * i, 0.02 * i, 0.0])
            rob = sample(pos, 0.01 * i, 0.1 * i, "robot")
            op = sample(pos, 0.01 * i, 0.1 * i, "operator")
            closed, cy = od.correction_signal(rob, op, "closed_loop")
            opened, oy = tracker.update(rob, op)
            assert np.allclose(closed, opened, atol=1e-12)
            assert cy == pytest.approx(oy)

    def test_mixed_sources_rejected(self):
        a = sample([0, 0, 0], 0.0, 0.0, "robot")
        b = sample([1, 0, 0], 0.0, 0.0, "robot")
        with pytest.raises(ValueError, match="robot"):
            od.correction_signal(a, b, "closed_loop")

    def test_open_loop_requires_tracker(self):
        a = sample([0, 0, 0], 0.0, 0.0, "robot")
        b = sample([1, 0, 0], 0.0, 0.0, "operator")
        with pytest.raises(ValueError, match="Tracker"):
            od.correction_signal(a, b, "open_loop")

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            od.CorrectionTracker("semi_loop")


class TestProvider:
    def test_emits_on_grid_and_latest_contract(self):
        provider = od.OdometryProvider("robot", None, np.random.default_rng(0))
        dt = 0.02
        for k in range(501):
            t = k * dt
            provider.observe(t, np.array([t, 0, 0]), 0.0, np.array([1.0, 0, 0]))
        assert len(provider.samples) == 101
        tick_owner = {}
        for k in range(500):
            t = k * dt
            s = provider.latest(t)
            tick_owner.setdefault(round(s.timestamp, 6), []).append(k)
        counts = [len(v) for v in tick_owner.values()]
        assert all(c == 5 for c in counts)

    def test_deviation_clamped(self):
        drift = DriftModel(c_vel=0.5, c_min=0.5, max_deviation=0.1,
                           reset_interval=1e9)
        provider = od.OdometryProvider("robot", drift, np.random.default_rng(1))
        for k in range(2000):
            t = k * 0.1
            provider.observe(t, np.zeros(3), 0.0, np.zeros(3))
        for s in provider.samples:
            assert np.linalg.norm(s.position) <= 0.1 + 1e-9
