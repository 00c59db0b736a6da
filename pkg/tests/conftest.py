import hashlib
import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

import teleosim.training as training
from teleosim.service.config import PolicySection
from teleosim.simenv import RandomizationConfig, default_model


@pytest.fixture
def model():
    return default_model()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------------------
# Trained desk-scale policies shared by the acceptance suite. Training is
# seeded and cached on disk keyed by the recipe, so repeated local runs skip
# it; a fresh checkout trains once (teacher ~10 min, student ~5 min).
# ---------------------------------------------------------------------------

ACCEPT_SEED = 0
TEACHER_RECIPE = dict(
    categories=("stand", "walk"), clips_per_category=2, clip_duration=8.0,
    iterations=150, n_envs=16, rollout_steps=128, grace=3.0, amp=False,
)
DISTILL_RECIPE = dict(
    iterations=60, n_envs=8, steps_per_iter=200, epochs=6, minibatch=1024,
    lr=1.5e-3, lr_final=3e-4, balance_coef=0.02, beta_anneal_iters=20,
)


def _recipe_key() -> str:
    payload = json.dumps({"seed": ACCEPT_SEED, "teacher": TEACHER_RECIPE,
                          "distill": DISTILL_RECIPE}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


@pytest.fixture(scope="session")
def trained_policies():
    model = default_model()
    cache_root = Path(os.environ.get("TELEOSIM_TEST_CACHE", ".cache/acceptance"))
    cache = cache_root / _recipe_key()
    cache.mkdir(parents=True, exist_ok=True)
    teacher_path = cache / "teacher.npz"
    student_path = cache / "student.npz"
    meta_path = cache / "meta.json"

    rng = np.random.default_rng(ACCEPT_SEED + 40)
    tracks = training.make_training_tracks(
        model, TEACHER_RECIPE["categories"], TEACHER_RECIPE["clips_per_category"],
        TEACHER_RECIPE["clip_duration"], np.random.default_rng(ACCEPT_SEED),
    )

    if teacher_path.exists() and student_path.exists() and meta_path.exists():
        teacher = training.load_policy(teacher_path, expect_role="teacher")
        student = training.load_policy(student_path, expect_role="student")
        meta = json.loads(meta_path.read_text())
    else:
        tcfg = training.TeacherTrainConfig(
            ppo=training.PPOConfig(
                n_envs=TEACHER_RECIPE["n_envs"],
                rollout_steps=TEACHER_RECIPE["rollout_steps"],
                iterations=TEACHER_RECIPE["iterations"],
                minibatch_size=512, lr=3e-4, value_lr=1e-3,
                entropy_coef=1e-3, init_log_std=-1.0,
            ),
            categories=TEACHER_RECIPE["categories"],
            clips_per_category=TEACHER_RECIPE["clips_per_category"],
            clip_duration=TEACHER_RECIPE["clip_duration"],
            termination_grace=TEACHER_RECIPE["grace"],
            amp_enabled=TEACHER_RECIPE["amp"],
        )
        t0 = time.perf_counter()
        teacher, _value, _hist = training.train_teacher(
            model, tcfg, RandomizationConfig(), seed=ACCEPT_SEED, tracks=tracks,
        )
        teacher_seconds = time.perf_counter() - t0

        dcfg = training.DistillConfig(**DISTILL_RECIPE)
        t0 = time.perf_counter()
        student, _hist2 = training.distill_student(
            teacher, PolicySection().moe_config(), model, tracks, dcfg,
            seed=ACCEPT_SEED + 3,
        )
        distill_seconds = time.perf_counter() - t0
        meta = {"teacher_seconds": teacher_seconds,
                "distill_seconds": distill_seconds}
        training.save_policy(teacher, teacher_path, role="teacher")
        training.save_policy(student, student_path, role="student")
        meta_path.write_text(json.dumps(meta))

    return {
        "model": model,
        "teacher": teacher,
        "student": student,
        "tracks": tracks,
        "teacher_grace": TEACHER_RECIPE["grace"],
        "meta": meta,
    }
