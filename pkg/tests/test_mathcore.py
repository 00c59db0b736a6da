import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teleosim import mathcore as mc


def random_quat(rng):
    return mc.quat_normalize(rng.standard_normal(4))


class TestSlerp:
    def test_identical_endpoints(self, rng):
        q = random_quat(rng)
        assert np.allclose(mc.slerp(q, q, 0.5), q)

    def test_endpoint_identity(self, rng):
        q0, q1 = random_quat(rng), random_quat(rng)
        assert np.allclose(mc.slerp(q0, q1, 0.0), q0)
        out = mc.slerp(q0, q1, 1.0)
        assert mc.quat_angle(out, q1) < 1e-6

    def test_half_of_quarter_turn_matches_axis_angle(self):
        q0 = mc.IDENTITY_QUAT
        q1 = mc.quat_from_axis_angle([0, 0, 1], np.pi / 2)
        expected = mc.quat_from_axis_angle([0, 0, 1], np.pi / 4)
        assert np.allclose(mc.slerp(q0, q1, 0.5), expected, atol=1e-12)

    def test_constant_angular_velocity(self, rng):
        for _ in range(100):
            q0, q1 = random_quat(rng), random_quat(rng)
            total = mc.quat_angle(q0, q1)
            for t in np.linspace(0.0, 1.0, 7):
                qt = mc.slerp(q0, q1, float(t))
                assert abs(mc.quat_angle(q0, qt) - t * total) < 1e-6

    def test_result_unit_norm(self, rng):
        for _ in range(50):
            q = mc.slerp(random_quat(rng), random_quat(rng), rng.uniform())
            assert abs(np.linalg.norm(q) - 1.0) < 1e-9

    def test_near_antipodal_falls_back_to_nlerp(self):
        q0 = mc.IDENTITY_QUAT
        q1 = mc.quat_from_axis_angle([1, 0, 0], np.pi)  # dot exactly 0
        out = mc.slerp(q0, q1, 0.3)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-9

    def test_non_unit_input_rejected(self):
        with pytest.raises(ValueError):
            mc.slerp(np.array([2.0, 0, 0, 0]), mc.IDENTITY_QUAT, 0.5)

    def test_t_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            mc.slerp(mc.IDENTITY_QUAT, mc.IDENTITY_QUAT, 1.5)


class TestQuatSimilarity:
    def test_self_similarity_is_one(self, rng):
        q = random_quat(rng)
        assert mc.quat_similarity(q, q) == pytest.approx(1.0)

    def test_double_cover(self, rng):
        q = random_quat(rng)
        assert mc.quat_similarity(q, -q) == pytest.approx(1.0)

    def test_identity_vs_half_turn_is_zero(self):
        q_flip = mc.quat_from_axis_angle([1, 0, 0], np.pi)
        assert mc.quat_similarity(mc.IDENTITY_QUAT, q_flip) == pytest.approx(0.0, abs=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_symmetric_and_sign_invariant(self, seed):
        r = np.random.default_rng(seed)
        qa, qb = random_quat(r), random_quat(r)
        s = mc.quat_similarity(qa, qb)
        assert mc.quat_similarity(qb, qa) == pytest.approx(s)
        assert mc.quat_similarity(-qa, qb) == pytest.approx(s)
        assert mc.quat_similarity(qa, -qb) == pytest.approx(s)

    def test_non_unit_rejected(self):
        with pytest.raises(ValueError):
            mc.quat_similarity(np.array([0.5, 0, 0, 0]), mc.IDENTITY_QUAT)


class TestSdeStep:
    def test_zero_velocity_zero_floor_is_deterministic(self, rng):
        model = mc.DriftModel(c_vel=5.0, c_min=0.0, max_deviation=1.0,
                              reset_interval=10.0)
        pos = np.array([1.0, 2.0, 3.0])
        out = mc.sde_step(pos, np.zeros(3), 0.02, model, rng)
        assert np.array_equal(out, pos)

    def test_increment_std_matches_diffusion(self):
        model = mc.DriftModel(c_vel=5.0, c_min=0.05, max_deviation=1.0,
                              reset_interval=10.0)
        rng = np.random.default_rng(7)
        pos = np.zeros(3)
        vel = np.array([1.0, 0.0, 0.0])
        dt = 0.02
        n = 100_000
        incs = np.array([
            mc.sde_step(pos, vel, dt, model, rng) - pos - vel * dt
            for _ in range(n)
        ])
        expected = (np.linalg.norm(vel) / model.c_vel + model.c_min) * np.sqrt(dt)
        for axis in range(3):
            assert incs[:, axis].std() == pytest.approx(expected, rel=0.05)

    def test_fixed_seed_reproducible(self):
        model = mc.DriftModel(c_vel=2.0, c_min=0.01, max_deviation=1.0,
                              reset_interval=5.0)
        a = mc.sde_step(np.zeros(3), np.ones(3), 0.02, model,
                        np.random.default_rng(3))
        b = mc.sde_step(np.zeros(3), np.ones(3), 0.02, model,
                        np.random.default_rng(3))
        assert np.array_equal(a, b)

    def test_dt_must_be_positive(self, rng):
        model = mc.DriftModel(1.0, 0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            mc.sde_step(np.zeros(3), np.zeros(3), 0.0, model, rng)

    @pytest.mark.parametrize("kwargs", [
        {"c_vel": 0.0, "c_min": 0.0, "max_deviation": 1.0, "reset_interval": 1.0},
        {"c_vel": 1.0, "c_min": -0.1, "max_deviation": 1.0, "reset_interval": 1.0},
        {"c_vel": 1.0, "c_min": 0.0, "max_deviation": 0.0, "reset_interval": 1.0},
        {"c_vel": 1.0, "c_min": 0.0, "max_deviation": 1.0, "reset_interval": 0.0},
    ])
    def test_model_validation(self, kwargs):
        with pytest.raises(ValueError):
            mc.DriftModel(**kwargs)


class TestFiniteDiffGradient:
    def test_quadratic(self):
        grad = mc.finite_diff_gradient(lambda x: float(np.sum(x ** 2)),
                                       np.array([1.0, 2.0]))
        assert np.allclose(grad, [2.0, 4.0], atol=1e-6)

    def test_constant_function(self):
        grad = mc.finite_diff_gradient(lambda x: 3.0, np.ones(4))
        assert np.array_equal(grad, np.zeros(4))

    def test_sum_of_sines_at_origin(self):
        grad = mc.finite_diff_gradient(lambda x: float(np.sum(np.sin(x))),
                                       np.zeros(5))
        assert np.allclose(grad, np.ones(5), atol=1e-6)

    def test_polynomial_relative_error(self, rng):
        coeffs = rng.standard_normal(4)
        x = rng.standard_normal(4)

        def f(v):
            return float(np.sum(coeffs * v ** 3))

        grad = mc.finite_diff_gradient(f, x, 1e-6)
        exact = 3 * coeffs * x ** 2
        assert np.allclose(grad, exact, rtol=1e-6, atol=1e-9)

    def test_non_finite_names_coordinate(self):
        def f(x):
            return float(np.log(x[1]))

        with pytest.raises(ValueError, match="coordinate 1"):
            mc.finite_diff_gradient(f, np.array([1.0, 1e-7]), 1e-6)


def test_wrap_angle_range():
    for a in np.linspace(-10, 10, 101):
        w = mc.wrap_angle(a)
        assert -np.pi < w <= np.pi
        assert abs((np.cos(w) - np.cos(a))) < 1e-12


def test_quat_rotate_matches_axis_angle():
    q = mc.quat_from_axis_angle([0, 0, 1], np.pi / 2)
    v = mc.quat_rotate(q, np.array([1.0, 0.0, 0.0]))
    assert np.allclose(v, [0, 1, 0], atol=1e-12)
