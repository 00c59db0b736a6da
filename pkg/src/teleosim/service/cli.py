"""Command-line pipeline: data generation, curation, editing, training,
distillation, evaluation, experiments, and the live teleoperation server.

All randomness derives from the config seed; artifacts land in a run
directory named by the config fingerprint under TELEOP_RUN_DIR (default
./runs).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from ..motiondata.clip import CATEGORIES, read_clip, write_clip
from ..motiondata.curation import CurationLimits, curate
from ..motiondata.editing import (
    augment_hand_orientation,
    concat_edit,
    stance_height_edit,
    time_scale,
)
from ..motiondata.generators import synth_generate
from ..motiondata.refs import build_reference_track
from ..simenv.model import default_model
from ..training import (
    DistillConfig,
    TeacherTrainConfig,
    TrainLogWriter,
    distill_student,
    evaluate_distillation_mse,
    evaluate_success_rate,
    load_policy,
    make_training_tracks,
    save_policy,
    train_teacher,
)
from ..evaluation import (
    compute_metrics,
    emit_report,
    expert_activation_profile,
    activation_spread,
    path_experiment,
    run_student_episode,
    stance_sweep,
    two_sample_t,
)
from .config import ConfigError, RunConfig, default_config, load_config, save_config

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _run_dir(cfg: RunConfig) -> Path:
    root = Path(os.environ.get("TELEOP_RUN_DIR", "runs"))
    d = root / cfg.fingerprint()
    d.mkdir(parents=True, exist_ok=True)
    save_config(cfg, d / "config.json")
    return d


def _load_cfg(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def _gen_data(args) -> int:
    cfg = _load_cfg(args)
    rng = np.random.default_rng(cfg.seed)
    out = Path(args.out) if args.out else _run_dir(cfg) / "data"
    out.mkdir(parents=True, exist_ok=True)
    kinds = list(CATEGORIES) if args.kinds == "all" else args.kinds.split(",")
    model = default_model()
    written = []
    for kind in kinds:
        clip = synth_generate(kind, args.duration or cfg.data_duration, rng, model)
        kept, rejected = curate([clip])
        if rejected:
            print(f"generated {kind} clip failed curation: {rejected[0].reason}",
                  file=sys.stderr)
            return EXIT_RUNTIME
        path = out / f"{kind}.clip"
        write_clip(clip, path)
        written.append(str(path))
    print(json.dumps({"written": written}))
    return EXIT_OK


def _curate(args) -> int:
    limits = CurationLimits()
    clips = [read_clip(p) for p in args.inputs]
    kept, rejected = curate(clips, limits)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for clip in kept:
        write_clip(clip, out / f"{clip.name}.clip")
    print(json.dumps({
        "kept": [c.name for c in kept],
        "rejected": [
            {"name": r.clip.name, "reason": r.reason, "frame": r.frame}
            for r in rejected
        ],
    }))
    return EXIT_OK


def _edit(args) -> int:
    cfg = _load_cfg(args)
    rng = np.random.default_rng(cfg.seed)
    model = default_model()
    if args.op == "concat":
        a, b = read_clip(args.inputs[0]), read_clip(args.inputs[1])
        clip = concat_edit(a, b, blend_window=args.window)
    elif args.op == "timescale":
        clip = time_scale(read_clip(args.inputs[0]), args.factor)
    elif args.op == "stance":
        clip = stance_height_edit(read_clip(args.inputs[0]), args.height, model)
    elif args.op == "hands":
        clip = augment_hand_orientation(read_clip(args.inputs[0]), rng,
                                        keyframe_spacing=args.spacing,
                                        max_tilt=args.tilt)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(args.op)
    write_clip(clip, args.out)
    print(json.dumps({"written": args.out, "frames": clip.n_frames}))
    return EXIT_OK


def _train_teacher(args) -> int:
    cfg = _load_cfg(args)
    run = _run_dir(cfg)
    model = default_model()
    tcfg = TeacherTrainConfig(
        ppo=cfg.training.teacher_ppo,
        policy_hidden=cfg.policy.teacher_hidden,
        value_hidden=cfg.policy.value_hidden,
        categories=cfg.training.teacher_categories,
        clips_per_category=cfg.training.clips_per_category,
        clip_duration=cfg.training.clip_duration,
        termination_grace=cfg.training.termination_grace,
        amp_enabled=cfg.training.amp_enabled,
        amp=cfg.training.amp,
    )
    out = Path(args.out) if args.out else run / "teacher.npz"
    with TrainLogWriter(run / "teacher_log.jsonl") as log:
        def progress(row):
            print(f"iter {row['iteration']} return {row['mean_return']:.1f} "
                  f"SR {row['success_rate']:.2f}")
        policy, _value, _hist = train_teacher(
            model, tcfg, cfg.randomization, cfg.seed, log_writer=log,
            progress=progress if args.verbose else None,
        )
    save_policy(policy, out, role="teacher", extra={"fingerprint": cfg.fingerprint()})
    tracks = make_training_tracks(model, tcfg.categories, 1, tcfg.clip_duration,
                                  np.random.default_rng(cfg.seed + 99))
    sr = evaluate_success_rate(policy, model, tracks, cfg.randomization,
                               seed=cfg.seed + 123,
                               episodes=cfg.experiments.eval_episodes,
                               termination_grace=tcfg.termination_grace)
    print(json.dumps({"checkpoint": str(out), "eval_success_rate": sr}))
    return EXIT_OK


def _distill(args) -> int:
    cfg = _load_cfg(args)
    run = _run_dir(cfg)
    model = default_model()
    teacher = load_policy(args.teacher or run / "teacher.npz", expect_role="teacher")
    rng = np.random.default_rng(cfg.seed + 5)
    tracks = make_training_tracks(
        model, cfg.training.teacher_categories, cfg.training.clips_per_category,
        cfg.training.clip_duration, rng,
    )
    dcfg = cfg.training.distill
    out = Path(args.out) if args.out else run / "student.npz"
    with TrainLogWriter(run / "distill_log.jsonl") as log:
        student, _hist = distill_student(
            teacher, cfg.policy.moe_config(), model, tracks, dcfg,
            seed=cfg.seed + 11, log_writer=log,
        )
    save_policy(student, out, role="student", extra={"fingerprint": cfg.fingerprint()})
    mse = evaluate_distillation_mse(teacher, student, model, tracks,
                                    seed=cfg.seed + 77, n_states=1000)
    print(json.dumps({"checkpoint": str(out), "held_out_mse": mse}))
    return EXIT_OK


def _eval(args) -> int:
    cfg = _load_cfg(args)
    run = _run_dir(cfg)
    model = default_model()
    student = load_policy(args.checkpoint, expect_role="student")
    rng = np.random.default_rng(cfg.seed + 21)
    episodes = []
    for cat in cfg.training.teacher_categories:
        clip = synth_generate(cat, cfg.training.clip_duration, rng, model)
        track = build_reference_track(clip, model)
        episodes.append(run_student_episode(
            student, model, track, seed=cfg.seed + len(episodes),
            drift=cfg.drift.robot_model(), operator_drift=cfg.drift.operator_model(),
        ))
    report = compute_metrics(episodes, config_fingerprint=cfg.fingerprint())
    path = emit_report([("eval", report)], run / "eval_report.csv", fmt="delimited")
    emit_report([("eval", report)], run / "eval_report.txt", fmt="table")
    print(json.dumps({"report": str(path), **report.row()}))
    return EXIT_OK


def _path_exp(args) -> int:
    cfg = _load_cfg(args)
    run = _run_dir(cfg)
    model = default_model()
    student = load_policy(args.checkpoint, expect_role="student")
    result = path_experiment(
        student, model, args.kind, trials=args.trials or cfg.experiments.path_trials,
        seed=cfg.seed, drift=cfg.drift.robot_model(),
        operator_drift=cfg.drift.operator_model(),
        distances=cfg.experiments.straight_distances,
    )
    summary = {"kind": args.kind, "sr": result.sr, "per_distance": {}}
    dists = (cfg.experiments.straight_distances if args.kind == "straight"
             else [cfg.experiments.curved_distance])
    for d in dists:
        summary["per_distance"][str(d)] = {
            "closed_mean_m": result.mean_error(d, "closed_loop"),
            "open_mean_m": result.mean_error(d, "open_loop"),
        }
    if args.kind == "straight":
        a = result.errors(dists[0], "closed_loop")
        b = result.errors(dists[-1], "closed_loop")
        if a.size > 1 and b.size > 1:
            t, p = two_sample_t(a, b)
            summary["t_first_vs_last"] = {"t": t, "p": p}
    (run / "path_experiment.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps(summary))
    return EXIT_OK


def _stance_sweep(args) -> int:
    cfg = _load_cfg(args)
    run = _run_dir(cfg)
    model = default_model()
    student = load_policy(args.checkpoint, expect_role="student")
    rng = np.random.default_rng(cfg.seed + 31)
    base = synth_generate("stand", cfg.training.clip_duration, rng, model)
    entries = stance_sweep(student, model, base, seed=cfg.seed,
                           heights=cfg.experiments.stance_heights,
                           trials=cfg.experiments.stance_trials,
                           drift=cfg.drift.robot_model())
    labelled = [
        (f"h={e.height:.1f}", e.report) for e in entries if e.feasible
    ]
    emit_report(labelled, run / "stance_sweep.csv", fmt="delimited")
    rows = {
        f"{e.height:.1f}": (e.report.row() if e.feasible else "infeasible")
        for e in entries
    }
    print(json.dumps(rows))
    return EXIT_OK


def _activation(args) -> int:
    cfg = _load_cfg(args)
    run = _run_dir(cfg)
    model = default_model()
    student = load_policy(args.checkpoint, expect_role="student")
    rng = np.random.default_rng(cfg.seed + 41)
    tracks_by_cat = {
        cat: [build_reference_track(
            synth_generate(cat, cfg.data_duration, rng, model), model)]
        for cat in CATEGORIES
    }
    matrix, cats = expert_activation_profile(student, model, tracks_by_cat)
    spread = activation_spread(matrix)
    out = {
        "categories": cats,
        "mean_weights": matrix.tolist(),
        "per_layer_spread": spread.tolist(),
    }
    (run / "activation.json").write_text(json.dumps(out, indent=2))
    print(json.dumps({"per_layer_spread": spread.tolist()}))
    return EXIT_OK


def _serve(args) -> int:
    cfg = _load_cfg(args)
    model = default_model()
    student = load_policy(args.checkpoint, expect_role="student")
    mode = "closed" if args.mode == "closed" else "open"
    from .server import serve_teleop

    serve_teleop(model, student, cfg.drift.robot_model(),
                 cfg.drift.operator_model(), port=args.port, mode=mode,
                 seed=cfg.seed)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="teleosim",
                                description="desk-scale whole-body teleoperation pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="run config file (json or yaml)")
        sp.add_argument("--seed", type=int, help="override the config seed")

    sp = sub.add_parser("gen-data", help="generate synthetic motion clips")
    common(sp)
    sp.add_argument("--kinds", default="all")
    sp.add_argument("--out")
    sp.add_argument("--duration", type=float)
    sp.set_defaults(fn=_gen_data)

    sp = sub.add_parser("curate", help="filter clips against feasibility limits")
    common(sp)
    sp.add_argument("inputs", nargs="+")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_curate)

    sp = sub.add_parser("edit", help="motion editing operations")
    common(sp)
    sp.add_argument("--op", required=True,
                    choices=("concat", "timescale", "stance", "hands"))
    sp.add_argument("inputs", nargs="+")
    sp.add_argument("--out", required=True)
    sp.add_argument("--window", type=int, default=10)
    sp.add_argument("--factor", type=float, default=1.0)
    sp.add_argument("--height", type=float, default=1.0)
    sp.add_argument("--spacing", type=int, default=25)
    sp.add_argument("--tilt", type=float, default=0.5)
    sp.set_defaults(fn=_edit)

    sp = sub.add_parser("train-teacher", help="PPO teacher training")
    common(sp)
    sp.add_argument("--out")
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(fn=_train_teacher)

    sp = sub.add_parser("distill", help="student distillation")
    common(sp)
    sp.add_argument("--teacher")
    sp.add_argument("--out")
    sp.set_defaults(fn=_distill)

    sp = sub.add_parser("eval", help="tracking metrics on generated clips")
    common(sp)
    sp.add_argument("--checkpoint", required=True)
    sp.set_defaults(fn=_eval)

    sp = sub.add_parser("path-exp", help="straight/curved path experiment")
    common(sp)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--kind", default="straight", choices=("straight", "curved"))
    sp.add_argument("--trials", type=int)
    sp.set_defaults(fn=_path_exp)

    sp = sub.add_parser("stance-sweep", help="tracking across stance heights")
    common(sp)
    sp.add_argument("--checkpoint", required=True)
    sp.set_defaults(fn=_stance_sweep)

    sp = sub.add_parser("activation", help="expert activation profile")
    common(sp)
    sp.add_argument("--checkpoint", required=True)
    sp.set_defaults(fn=_activation)

    sp = sub.add_parser("serve", help="live teleoperation server")
    common(sp)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--port", type=int, default=8765)
    sp.add_argument("--mode", default="closed", choices=("closed", "open"))
    sp.set_defaults(fn=_serve)

    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run_cli())
