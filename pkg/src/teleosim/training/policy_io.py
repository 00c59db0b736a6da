"""Save and load trained Gaussian policies (net + log std + obs normalizer)."""

from __future__ import annotations

import numpy as np

from ..policy.checkpoint import checkpoint_load, checkpoint_save
from .ppo import GaussianPolicy, RunningNorm


def save_policy(policy: GaussianPolicy, path, role: str,
                extra: dict | None = None) -> None:
    aux = {"log_std": policy.log_std}
    if policy.obs_norm is not None:
        aux.update(policy.obs_norm.state_arrays())
    checkpoint_save(policy.net, path, extra={"role": role, **(extra or {})},
                    aux_arrays=aux)


def load_policy(path, expect_role: str | None = None) -> GaussianPolicy:
    net, header, aux = checkpoint_load(path)
    role = header.get("extra", {}).get("role")
    if expect_role is not None and role != expect_role:
        from ..policy.checkpoint import CheckpointError
        raise CheckpointError(f"expected a {expect_role} policy, found {role!r}")
    norm = None
    if "norm_mean" in aux:
        norm = RunningNorm.from_arrays(aux)
    log_std = aux["log_std"]
    policy = GaussianPolicy(net, log_std.shape[0], obs_norm=norm)
    policy.log_std = log_std.copy()
    return policy
