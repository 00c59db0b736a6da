"""Checkpoint files: a JSON config header plus flat parameter arrays in one
npz container. Loading validates the header before touching any weights."""

from __future__ import annotations

import json

import numpy as np

from .moe import MoEConfig, MoENet
from .nets import MLPNet

CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    pass


def _net_config(net) -> dict:
    if isinstance(net, MoENet):
        c = net.config
        return {
            "kind": "moe",
            "obs_dim": c.obs_dim, "act_dim": c.act_dim,
            "n_layers": c.n_layers, "n_experts": c.n_experts, "top_k": c.top_k,
            "balance_eps": c.balance_eps, "trunk": list(c.trunk),
            "history_len": c.history_len, "router_scale": c.router_scale,
        }
    if isinstance(net, MLPNet):
        return {"kind": "mlp", "sizes": net.sizes,
                "activate_output": net.activate_output}
    raise CheckpointError(f"cannot checkpoint object of type {type(net).__name__}")


def checkpoint_save(net, path, extra: dict | None = None, optimizer=None,
                    aux_arrays: dict | None = None) -> None:
    header = {
        "version": CHECKPOINT_VERSION,
        "net": _net_config(net),
        "extra": extra or {},
    }
    arrays = {f"param_{i}": p for i, p in enumerate(net.params)}
    if optimizer is not None:
        header["opt_t"] = optimizer.t
        for i, a in enumerate(optimizer.state_arrays()):
            arrays[f"opt_{i}"] = a
    for name, arr in (aux_arrays or {}).items():
        arrays[f"aux_{name}"] = arr
    np.savez(path, header=json.dumps(header), **arrays)


def checkpoint_load(path, expect_kind: str | None = None):
    """Returns (net, header dict, aux arrays dict). Raises CheckpointError on
    version or config mismatch; never returns a partially built net."""
    with np.load(path, allow_pickle=False) as data:
        try:
            header = json.loads(str(data["header"]))
        except KeyError as e:
            raise CheckpointError("missing checkpoint header") from e
        if header.get("version") != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"checkpoint version {header.get('version')} unsupported"
            )
        cfg = header["net"]
        if expect_kind is not None and cfg["kind"] != expect_kind:
            raise CheckpointError(
                f"expected a {expect_kind} checkpoint, found {cfg['kind']}"
            )
        rng = np.random.default_rng(0)
        if cfg["kind"] == "moe":
            net = MoENet(MoEConfig(
                obs_dim=cfg["obs_dim"], act_dim=cfg["act_dim"],
                n_layers=cfg["n_layers"], n_experts=cfg["n_experts"],
                top_k=cfg["top_k"], balance_eps=cfg["balance_eps"],
                trunk=tuple(cfg["trunk"]), history_len=cfg["history_len"],
                router_scale=cfg["router_scale"],
            ), rng)
        elif cfg["kind"] == "mlp":
            net = MLPNet(cfg["sizes"], rng, activate_output=cfg["activate_output"])
        else:
            raise CheckpointError(f"unknown net kind {cfg['kind']!r}")
        params = net.params
        loaded = []
        for i, p in enumerate(params):
            key = f"param_{i}"
            if key not in data:
                raise CheckpointError(f"missing parameter array {key}")
            arr = data[key]
            if arr.shape != p.shape:
                raise CheckpointError(
                    f"parameter {i} shape {arr.shape} does not match config {p.shape}"
                )
            loaded.append(arr)
        for p, arr in zip(params, loaded):
            p[...] = arr
        aux = {k[4:]: data[k] for k in data.files if k.startswith("aux_")}
        opt_keys = sorted(
            (k for k in data.files if k.startswith("opt_")),
            key=lambda s: int(s.split("_")[1]),
        )
        if opt_keys:
            aux["optimizer_state"] = [data[k] for k in opt_keys]
            aux["optimizer_t"] = header.get("opt_t", 0)
    return net, header, aux
