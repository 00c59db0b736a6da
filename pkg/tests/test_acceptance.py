"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete. Criteria 8-12 share the session-scoped trained
policies from conftest (seeded; cached across runs under .cache/acceptance).
"""

import time

import numpy as np
import pytest

import teleosim.evaluation as ev
import teleosim.training as tr
from teleosim import mathcore as mc
from teleosim import policy as pol
from teleosim import simenv as se
from teleosim.motiondata import CATEGORIES, build_reference_track, synth_generate
from teleosim.odometry import OdometryProvider
from teleosim.policy.moe import MoEConfig, MoENet, RoutingStats
from teleosim.policy.nets import Adam, MLPNet, flatten_params, set_flat_params
from teleosim.service.config import PolicySection


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {num:02d}] {status}: {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {num}: {name} -- {detail}"


def _relative_err(a, b):
    mask = (np.abs(a) > 1e-7) | (np.abs(b) > 1e-7)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(a - b)[mask] / (np.abs(a) + np.abs(b) + 1e-9)[mask]))


def test_criterion_01_gradient_correctness():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        mlp = MLPNet([int(rng.integers(3, 7)), 8, 6,
                      int(rng.integers(2, 5))], rng)
        obs = rng.standard_normal((3, mlp.sizes[0]))
        gout = rng.standard_normal((3, mlp.sizes[-1]))
        _, cache = mlp.forward_cached(obs)
        grads, _ = mlp.backward(cache, gout)
        x0 = flatten_params(mlp.params).copy()

        def f_mlp(v, net=mlp, o=obs, g=gout):
            set_flat_params(net.params, v)
            return float(np.sum(net.forward(o) * g))

        fd = mc.finite_diff_gradient(f_mlp, x0, 1e-5)
        set_flat_params(mlp.params, x0)
        worst = max(worst, _relative_err(fd, flatten_params(grads)))

        n_experts = int(rng.integers(2, 5))
        cfg = MoEConfig(obs_dim=5, act_dim=3, n_layers=2, n_experts=n_experts,
                        top_k=min(2, n_experts), trunk=(8, 7, 5),
                        router_scale=0.5)
        moe = MoENet(cfg, rng)
        obs = rng.standard_normal((4, 5))
        gout = rng.standard_normal((4, 3))
        _, _, cache = moe.forward_cached(obs)
        grads, _ = moe.backward(cache, gout)
        x0 = flatten_params(moe.params).copy()

        def f_moe(v, net=moe, o=obs, g=gout):
            set_flat_params(net.params, v)
            out, _ = net.forward(o)
            return float(np.sum(out * g))

        fd = mc.finite_diff_gradient(f_moe, x0, 1e-5)
        set_flat_params(moe.params, x0)
        worst = max(worst, _relative_err(fd, flatten_params(grads)))
    elapsed = time.perf_counter() - t0
    _report(1, "analytic gradients match finite differences (MLP + MoE, 20 seeds)",
            worst < 1e-4 and elapsed < 60.0,
            f"worst rel err {worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_moe_routing_suite(rng):
    from teleosim.policy.moe import MoELayer

    ok = True
    details = []
    # logit-scale invariance of the selected set
    layer = MoELayer(d_in=6, d_out=5, n_experts=4, top_k=2, hidden=7, rng=rng,
                     router_scale=0.5)
    x = rng.standard_normal((64, 6))
    _, cache = layer.forward_cached(x)
    sel0 = np.sort(cache["sel"], axis=1)
    layer.router.w *= 4.2
    layer.router.b *= 4.2
    _, cache2 = layer.forward_cached(x)
    if not np.array_equal(sel0, np.sort(cache2["sel"], axis=1)):
        ok = False
        details.append("scale invariance broken")
    # renormalized weights sum to 1
    if np.abs(cache2["w_norm"].sum(axis=1) - 1.0).max() >= 1e-9:
        ok = False
        details.append("renormalized weights do not sum to 1")
    # k = N degenerate mixture equality
    full = MoELayer(d_in=6, d_out=5, n_experts=3, top_k=3, hidden=7, rng=rng,
                    router_scale=0.5)
    xi = rng.standard_normal(6)
    y, weights, sel = pol.moe_layer_forward(full, xi)
    expected = sum(weights[e] * full.experts[e].forward(xi) for e in range(3))
    if not np.allclose(y, expected, atol=1e-12):
        ok = False
        details.append("k=N mixture mismatch")
    # zero gradient to unselected experts
    cfg = MoEConfig(obs_dim=6, act_dim=3, n_layers=1, n_experts=4, top_k=2,
                    trunk=(8, 5), router_scale=0.5)
    net = MoENet(cfg, rng)
    obs = rng.standard_normal(6)
    _, _, cache = net.forward_cached(obs)
    grads, _ = net.backward(cache, np.ones(3))
    selected = set(cache["layers"][0]["sel"][0].tolist())
    idx = 2 + 2  # encoder (w, b) + router (w, b)
    for e in range(4):
        n = len(net.layers[0].experts[e].params)
        block = grads[idx:idx + n]
        nonzero = any(np.any(g != 0) for g in block)
        if (e in selected) != nonzero:
            ok = False
            details.append(f"expert {e} gradient flag wrong")
        idx += n
    _report(2, "top-k routing invariants all exact", ok, "; ".join(details))


def test_criterion_03_balance_loss():
    uniform = RoutingStats(np.full((1, 4), 0.25), np.zeros((1, 4)), 8)
    mild = RoutingStats(np.array([[0.4, 0.3, 0.2, 0.1]]), np.zeros((1, 4)), 8)
    collapsed = RoutingStats(np.array([[1.0, 0.0, 0.0, 0.0]]), np.zeros((1, 4)), 8)
    got = (
        pol.balance_loss(uniform, 0.2),
        pol.balance_loss(mild, 0.2),
        pol.balance_loss(collapsed, 0.2),
    )
    ok = got[0] == 0.0 and abs(got[1] - 0.2) < 1e-15 and abs(got[2] - 1.3) < 1e-15
    _report(3, "balance loss: uniform 0, hand-computed 0.2 and 1.3 exact", ok,
            f"got {got}")


def test_criterion_04_sde_noise_statistics():
    model = mc.DriftModel(c_vel=5.0, c_min=0.05, max_deviation=0.25,
                          reset_interval=10.0)
    rng = np.random.default_rng(11)
    t0 = time.perf_counter()
    pos = np.zeros(3)
    vel = np.array([1.2, 0.0, 0.0])
    dt = 0.02
    incs = np.array([
        mc.sde_step(pos, vel, dt, model, rng) - pos - vel * dt
        for _ in range(100_000)
    ])
    expected = model.sigma(vel) * np.sqrt(dt)
    std_ok = all(
        abs(incs[:, a].std() - expected) / expected < 0.05 for a in range(3)
    )

    # clamp over 1e6 steps via the bulk kernel (the same math the injector runs)
    from teleosim import accel
    n = 1_000_000
    sigmas = np.full(n, model.sigma(vel) * np.sqrt(dt))
    noise = rng.standard_normal((n, 3))
    resets = np.zeros(n, dtype=np.float64)
    resets[::500] = 1.0
    path = accel.drift_path(sigmas, noise, np.zeros(3), model.max_deviation, resets)
    norms = np.linalg.norm(path, axis=1)
    clamp_ok = bool(np.all(norms <= model.max_deviation + 1e-12))
    reset_ok = bool(np.all(norms[::500] == 0.0))

    inj = tr.DriftInjector(model, np.random.default_rng(5))
    inj_reset_ok = True
    for k in range(1, 1501):
        dev = inj.advance(vel, dt)
        if k % 500 == 0 and not np.array_equal(dev, np.zeros(3)):
            inj_reset_ok = False
    elapsed = time.perf_counter() - t0
    _report(4, "SDE increment std within 5%, clamp never exceeded, resets exact",
            std_ok and clamp_ok and reset_ok and inj_reset_ok and elapsed < 60,
            f"{elapsed:.1f}s")


def test_criterion_05_rate_contract():
    provider = OdometryProvider("robot", None, np.random.default_rng(0))
    dt = 0.02
    n_ticks = 500  # 10 s at 50 Hz
    for k in range(n_ticks + 1):
        t = k * dt
        provider.observe(t, np.array([t, 0.0, 0.0]), 0.0, np.array([1.0, 0, 0]))
    owners = {}
    ok = True
    for k in range(n_ticks):
        t = k * dt
        s = provider.latest(t)
        if s.timestamp > t + 1e-12:
            ok = False
        owners.setdefault(round(s.timestamp, 6), 0)
        owners[round(s.timestamp, 6)] += 1
    counts = list(owners.values())
    shares_ok = all(c == 5 for c in counts)
    _report(5, "every 50 Hz tick consumes the latest 10 Hz sample; 5 ticks share each",
            ok and shares_ok, f"{len(counts)} samples consumed")


def test_criterion_06_metric_oracle_equivalence(rng):
    from test_evaluation import brute_force_metrics, random_episode

    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        episodes = [random_episode(rng, t=int(rng.integers(4, 20)),
                                   terminated=bool(rng.integers(0, 2)))
                    for _ in range(int(rng.integers(1, 4)))]
        rep = ev.compute_metrics(episodes)
        oracle = brute_force_metrics(episodes)
        for key, val in oracle.items():
            worst = max(worst, abs(getattr(rep, key) - val))
    # constructed offset case
    ep = random_episode(rng)
    offset = np.array([0.1, 0.0, 0.0])
    shifted = ev.EpisodeRollout(
        keybody_pos=ep.ref_keybody_pos + offset, root_pos=ep.ref_root_pos + offset,
        wrist_orient=ep.ref_wrist_orient.copy(),
        ref_keybody_pos=ep.ref_keybody_pos, ref_root_pos=ep.ref_root_pos,
        ref_wrist_orient=ep.ref_wrist_orient,
    )
    rep = ev.compute_metrics([shifted])
    offset_ok = (abs(rep.e_mpkpe - 100.0) < 1e-9 and abs(rep.e_r_mpkpe) < 1e-9)
    elapsed = time.perf_counter() - t0
    _report(6, "compute_metrics equals brute-force oracle on 100 batches",
            worst < 1e-9 and offset_ok and elapsed < 60,
            f"worst abs diff {worst:.2e}, {elapsed:.1f}s")


def test_criterion_07_reward_engine(model, rng):
    from test_simenv import hold_track

    track = hold_track(model)
    ref = track.at(0)
    state = se.initial_state(model, ref.joint_pos, ref.root_pos[0:2], ref.root_yaw)
    state.joint_vel[:] = 0.0
    state.torques_applied[:] = 0.0
    bd = se.compute_reward(model, state, state.copy(), ref.joint_pos,
                           ref.joint_pos, ref)
    exps = ("dof_pos_tracking", "dof_vel_tracking", "extend_body_pos",
            "body_pos_mr", "body_rotation", "body_velocity", "body_ang_velocity")
    weights_ok = all(
        abs(bd.weighted(name) - se.TABLE_WEIGHTS[name]) < 1e-9 for name in exps
    )

    walk = build_reference_track(
        synth_generate("walk", 4.0, np.random.default_rng(3), model), model)
    linear_ok = True
    for _ in range(1000):
        i = int(rng.integers(1, walk.n_frames - 1))
        ref = walk.at(i)
        st = se.initial_state(model, rng.uniform(-0.5, 0.5, 14),
                              rng.uniform(-1, 1, 2), rng.uniform(-1, 1))
        st.joint_vel = rng.uniform(-2, 2, 14)
        st.torques_applied = rng.uniform(-30, 30, 14)
        st.foot_slip_speed = rng.uniform(0, 1, 2)
        prev = st.copy()
        prev.joint_vel = rng.uniform(-2, 2, 14)
        a, pa = rng.uniform(-1, 1, 14), rng.uniform(-1, 1, 14)
        bd = se.compute_reward(model, st, prev, a, pa, ref,
                               amp_score=float(rng.uniform()),
                               terminated=bool(rng.integers(0, 2)))
        total = 0.0
        for name in se.REWARD_TERMS:
            total += bd.weights[name] * bd.terms[name]
        if bd.total != total:
            linear_ok = False
            break
    _report(7, "zero-error state reproduces table weights; total linearity exact",
            weights_ok and linear_ok)


def test_criterion_08_training_sanity(trained_policies):
    # PPO bandit toy
    from test_training import BanditSession

    rng = np.random.default_rng(0)
    cfg = tr.PPOConfig(n_envs=8, rollout_steps=32, iterations=60,
                       minibatch_size=128, lr=5e-3, value_lr=5e-3,
                       entropy_coef=0.0, init_log_std=-0.5, reward_scale=1.0,
                       log_std_bounds=(-2.0, 0.5))
    net = MLPNet([1, 16, 1], rng, out_scale=0.01)
    bandit_policy = tr.GaussianPolicy(net, 1, cfg.init_log_std)
    value = MLPNet([1, 16, 1], rng)
    opt_p = Adam(bandit_policy.params, lr=cfg.lr)
    opt_v = Adam(value.params, lr=cfg.value_lr)
    sessions = [BanditSession(i) for i in range(cfg.n_envs)]
    for _ in range(cfg.iterations):
        batch = tr.collect_rollouts(sessions, bandit_policy, value,
                                    cfg.rollout_steps)
        tr.ppo_update(bandit_policy, value, opt_p, opt_v, batch, cfg,
                      np.random.default_rng(1))
    bandit_mean = float(bandit_policy.mean(np.zeros(1))[0])
    bandit_ok = abs(bandit_mean - 0.5) <= 0.05

    # desk-scale teacher
    tp = trained_policies
    sr = tr.evaluate_success_rate(
        tp["teacher"], tp["model"], tp["tracks"], se.RandomizationConfig(),
        seed=123, episodes=25, termination_grace=tp["teacher_grace"],
    )
    seconds = tp["meta"]["teacher_seconds"]
    time_ok = seconds < 1800.0
    _report(8, "bandit optimum within 0.05; teacher SR >= 80% within 30 min",
            bandit_ok and sr >= 0.8 and time_ok,
            f"bandit mean {bandit_mean:.3f}, SR {sr:.2f}, "
            f"trained in {seconds:.0f}s")


def test_criterion_09_distillation(trained_policies):
    tp = trained_policies
    mse = tr.evaluate_distillation_mse(
        tp["teacher"], tp["student"], tp["model"], tp["tracks"],
        seed=1234, n_states=2000,
    )
    # routing stats over held-out on-policy states
    session = tr.StudentSession(tp["model"], tp["tracks"], seed=77,
                                noise_mode=tr.NOISE_NONE)
    obs_rows = []
    obs = session.reset()
    for _ in range(1000):
        obs_rows.append(obs)
        obs, done, _ = session.step(tp["student"].mean(obs))
        if done:
            obs = session.reset()
    _, stats, _ = tp["student"].mean_cached(np.array(obs_rows))
    cfg = tp["student"].net.config
    lo = (1 - cfg.balance_eps) / cfg.n_experts - 0.05
    hi = (1 + cfg.balance_eps) / cfg.n_experts + 0.05
    p = stats.mean_weights
    band_ok = bool(np.all((p >= lo) & (p <= hi)))
    seconds = tp["meta"]["distill_seconds"]
    _report(9, "student-teacher MSE <= 5e-3; routing within the eps band +- 0.05",
            mse <= 5e-3 and band_ok and seconds < 3600.0,
            f"mse {mse:.2e}, p range [{p.min():.3f}, {p.max():.3f}], "
            f"distilled in {seconds:.0f}s")


def test_criterion_10_closed_loop_path_analog(trained_policies):
    tp = trained_policies
    t0 = time.perf_counter()
    res = ev.path_experiment(tp["student"], tp["model"], "straight", trials=10,
                             seed=0)
    closed = res.mean_error(8.9, "closed_loop")
    opened = res.mean_error(8.9, "open_loop")
    ratio = closed / opened
    a = res.errors(3.0, "closed_loop")
    b = res.errors(8.9, "closed_loop")
    t, p = ev.two_sample_t(a, b)
    elapsed = time.perf_counter() - t0
    _report(10, "closed-loop <= 0.5x open-loop at 8.9 m; no growth with distance",
            ratio <= 0.5 and p > 0.05 and elapsed < 600,
            f"closed {closed:.3f} m, open {opened:.3f} m, ratio {ratio:.3f}, "
            f"t={t:.2f} p={p:.3f}, {elapsed:.0f}s")


def test_criterion_11_stance_sweep_analog(trained_policies):
    tp = trained_policies
    base = synth_generate("stand", 4.0, np.random.default_rng(5), tp["model"])
    entries = ev.stance_sweep(tp["student"], tp["model"], base, seed=1, trials=3)
    feasible = [e for e in entries if e.feasible]
    heights = [e.height for e in entries]
    by_height = {e.height: e.report for e in feasible}
    count_ok = len(entries) == 7
    mono_ok = (1.2 in by_height and 0.6 in by_height
               and by_height[0.6].e_r_mpkpe >= by_height[1.2].e_r_mpkpe)
    _report(11, "seven-entry sweep; errors at 0.6 m >= errors at 1.2 m",
            count_ok and mono_ok,
            f"heights {heights}, R-MPKPE 1.2m {by_height[1.2].e_r_mpkpe:.1f} "
            f"vs 0.6m {by_height[0.6].e_r_mpkpe:.1f}")


def test_criterion_12_expert_activation_profile(trained_policies):
    tp = trained_policies
    rng = np.random.default_rng(3)
    tracks_by_cat = {
        c: [build_reference_track(synth_generate(c, 3.0, rng, tp["model"]),
                                  tp["model"])]
        for c in CATEGORIES
    }
    matrix, cats = ev.expert_activation_profile(tp["student"], tp["model"],
                                                tracks_by_cat, max_frames=120)
    rows_ok = bool(np.allclose(matrix.sum(axis=1), 1.0, atol=1e-6))
    untrained = tr.GaussianPolicy(
        MoENet(PolicySection().moe_config(), np.random.default_rng(0)), 14,
        obs_norm=tp["student"].obs_norm,
    )
    m_un, _ = ev.expert_activation_profile(untrained, tp["model"],
                                           tracks_by_cat, max_frames=120)
    spread_tr = ev.activation_spread(matrix)
    spread_un = ev.activation_spread(m_un)
    ratio = spread_tr / np.maximum(spread_un, 1e-9)
    spread_ok = bool(np.all(ratio >= 2.0))
    _report(12, "activation rows sum to 1; trained spread >= 2x untrained per layer",
            rows_ok and spread_ok,
            f"trained {np.round(spread_tr, 3).tolist()} vs untrained "
            f"{np.round(spread_un, 3).tolist()}")
