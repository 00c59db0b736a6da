"""Layered mixture-of-experts network with top-k routing.

Each layer routes its input through a linear router + softmax over N experts,
keeps the k highest-weighted experts (ties broken toward the lower index),
renormalizes their weights to sum to one, and mixes the expert outputs.
Gradients flow through the selected experts and the router (softmax plus
renormalization Jacobian); the selection itself is non-differentiable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nets import Linear, MLPNet


@dataclass(frozen=True)
class MoEConfig:
    obs_dim: int
    act_dim: int
    n_layers: int = 3
    n_experts: int = 4
    top_k: int = 2
    balance_eps: float = 0.2
    trunk: tuple = (256, 128, 128, 64)
    history_len: int = 25
    router_scale: float = 0.01

    def __post_init__(self):
        if not 1 <= self.top_k <= self.n_experts:
            raise ValueError("need 1 <= top_k <= n_experts")
        if len(self.trunk) != self.n_layers + 1:
            raise ValueError("trunk must list n_layers + 1 widths")
        if not 0.0 <= self.balance_eps < 1.0:
            raise ValueError("balance_eps must be in [0, 1)")


# Desk-scale defaults above; the full-scale trunk from the published setup.
FULL_SCALE_TRUNK = (2048, 512, 512, 256)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class RoutingStats:
    """Batch-averaged router softmax weights and top-k selection counts."""

    mean_weights: np.ndarray      # (L, N), rows sum to 1
    selection_counts: np.ndarray  # (L, N)
    batch_size: int

    def merge(self, other: "RoutingStats") -> "RoutingStats":
        n = self.batch_size + other.batch_size
        return RoutingStats(
            mean_weights=(self.mean_weights * self.batch_size
                          + other.mean_weights * other.batch_size) / n,
            selection_counts=self.selection_counts + other.selection_counts,
            batch_size=n,
        )


class MoELayer:
    def __init__(self, d_in: int, d_out: int, n_experts: int, top_k: int,
                 hidden: int, rng: np.random.Generator, router_scale: float = 0.01):
        self.n_experts = n_experts
        self.top_k = top_k
        self.router = Linear(d_in, n_experts, rng, scale=router_scale)
        self.experts = [MLPNet([d_in, hidden, d_out], rng) for _ in range(n_experts)]

    @property
    def params(self) -> list:
        out = list(self.router.params)
        for e in self.experts:
            out.extend(e.params)
        return out

    def forward_cached(self, x: np.ndarray):
        b = x.shape[0]
        logits = self.router.forward(x)
        soft = softmax(logits)
        # Stable sort on the negated weights: ties resolve to the lower index.
        order = np.argsort(-soft, axis=1, kind="stable")
        sel = order[:, : self.top_k]
        w_sel = np.take_along_axis(soft, sel, axis=1)
        s = w_sel.sum(axis=1, keepdims=True)
        w_norm = w_sel / s

        d_out = self.experts[0].sizes[-1]
        y = np.zeros((b, d_out))
        eout = np.zeros((b, self.top_k, d_out))
        expert_caches = {}
        for e in range(self.n_experts):
            rows, slots = np.where(sel == e)
            if rows.size == 0:
                continue
            out_e, cache_e = self.experts[e].forward_cached(x[rows])
            if not np.all(np.isfinite(out_e)):
                raise FloatingPointError(f"non-finite activation in expert {e}")
            eout[rows, slots] = out_e
            expert_caches[e] = (rows, slots, cache_e)
            y[rows] += w_norm[rows, slots, None] * out_e
        cache = {
            "x": x, "soft": soft, "sel": sel, "w_sel": w_sel, "w_norm": w_norm,
            "s": s, "eout": eout, "expert_caches": expert_caches,
        }
        return y, cache

    def backward(self, cache: dict, gout: np.ndarray, gsoft: np.ndarray | None = None):
        """Returns (grads aligned with .params, input gradient).

        gsoft, when given, is an extra dL/d(softmax weights) term (the
        balancing loss path), applied before the softmax Jacobian.
        """
        x, soft = cache["x"], cache["soft"]
        sel, w_norm, s = cache["sel"], cache["w_norm"], cache["s"]
        b = x.shape[0]
        gin = np.zeros_like(x)

        # Through the mixture weights: dL/dw_norm then the renormalization.
        g_wnorm = np.einsum("bd,bkd->bk", gout, cache["eout"])
        inner = (g_wnorm * w_norm).sum(axis=1, keepdims=True)
        g_wsel = (g_wnorm - inner) / s
        g_soft = np.zeros((b, self.n_experts))
        np.put_along_axis(g_soft, sel, g_wsel, axis=1)
        if gsoft is not None:
            g_soft = g_soft + gsoft
        # Softmax Jacobian into router logits.
        g_logits = soft * (g_soft - (g_soft * soft).sum(axis=1, keepdims=True))
        (g_rw, g_rb), gin_router = self.router.backward(x, g_logits)
        gin += gin_router

        grads: list = [g_rw, g_rb]
        for e in range(self.n_experts):
            if e in cache["expert_caches"]:
                rows, slots, cache_e = cache["expert_caches"][e]
                g_e = w_norm[rows, slots, None] * gout[rows]
                expert_grads, gin_e = self.experts[e].backward(cache_e, g_e)
                gin[rows] += gin_e
                grads.extend(expert_grads)
            else:
                grads.extend([np.zeros_like(p) for p in self.experts[e].params])
        return grads, gin


class MoENet:
    """Encoder -> L mixture layers -> linear action head."""

    def __init__(self, config: MoEConfig, rng: np.random.Generator):
        self.config = config
        t = config.trunk
        self.encoder = MLPNet([config.obs_dim, t[0]], rng, activate_output=True)
        self.layers = [
            MoELayer(t[i], t[i + 1], config.n_experts, config.top_k,
                     hidden=t[i], rng=rng, router_scale=config.router_scale)
            for i in range(config.n_layers)
        ]
        self.head = MLPNet([t[-1], config.act_dim], rng, out_scale=0.01)

    @property
    def params(self) -> list:
        out = list(self.encoder.params)
        for layer in self.layers:
            out.extend(layer.params)
        out.extend(self.head.params)
        return out

    def forward(self, obs: np.ndarray):
        y, stats, _ = self.forward_cached(obs)
        return y, stats

    def forward_cached(self, obs: np.ndarray):
        obs = np.asarray(obs, dtype=np.float64)
        squeeze = obs.ndim == 1
        h = obs[None, :] if squeeze else obs
        b = h.shape[0]
        h, enc_cache = self.encoder.forward_cached(h)
        layer_caches = []
        mean_w = np.zeros((len(self.layers), self.layers[0].n_experts))
        counts = np.zeros_like(mean_w)
        for li, layer in enumerate(self.layers):
            h, cache = layer.forward_cached(h)
            layer_caches.append(cache)
            mean_w[li] = cache["soft"].mean(axis=0)
            for e in range(layer.n_experts):
                counts[li, e] = np.count_nonzero(cache["sel"] == e)
        y, head_cache = self.head.forward_cached(h)
        stats = RoutingStats(mean_weights=mean_w, selection_counts=counts, batch_size=b)
        cache = {
            "enc": enc_cache, "layers": layer_caches, "head": head_cache,
            "squeeze": squeeze,
        }
        return (y[0] if squeeze else y), stats, cache

    def backward(self, cache: dict, gout: np.ndarray,
                 gsoft_layers: np.ndarray | None = None):
        """gsoft_layers: optional (L, B, N) extra gradient on router softmax."""
        g = np.asarray(gout, dtype=np.float64)
        if cache["squeeze"]:
            g = g[None, :]
        head_grads, g = self.head.backward(cache["head"], g)
        layer_grads: list = []
        for li in range(len(self.layers) - 1, -1, -1):
            gsoft = None if gsoft_layers is None else gsoft_layers[li]
            grads_l, g = self.layers[li].backward(cache["layers"][li], g, gsoft)
            layer_grads = grads_l + layer_grads
        enc_grads, gin = self.encoder.backward(cache["enc"], g)
        if cache["squeeze"]:
            gin = gin[0]
        return enc_grads + layer_grads + head_grads, gin


def moe_layer_forward(layer: MoELayer, x: np.ndarray):
    """Single-input layer evaluation: (output, softmax weights, selected)."""
    x = np.asarray(x, dtype=np.float64)
    y, cache = layer.forward_cached(x[None, :])
    return y[0], cache["soft"][0], cache["sel"][0]


def moe_forward(net: MoENet, obs: np.ndarray):
    """Action and routing stats for one observation or a batch."""
    return net.forward(obs)


def balance_loss(stats: RoutingStats, eps: float, variant: str = "symmetric") -> float:
    """Band loss on the expected activation probabilities.

    symmetric: sum of max(p - (1+eps)/N, 0) + max((1-eps)/N - p, 0), zero iff
    every p sits inside the band. verbatim: keeps the printed min(.., 0)
    second term, which subtracts for over-used experts instead.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must be in [0, 1)")
    if stats.batch_size < 1:
        raise ValueError("stats must cover at least one sample")
    p = stats.mean_weights
    n = p.shape[1]
    hi = (1.0 + eps) / n
    lo = (1.0 - eps) / n
    over = np.maximum(p - hi, 0.0)
    if variant == "symmetric":
        under = np.maximum(lo - p, 0.0)
    elif variant == "verbatim":
        under = np.minimum(lo - p, 0.0)
    else:
        raise ValueError(f"unknown balance loss variant {variant!r}")
    return float(np.sum(over + under))


def balance_loss_grad(mean_weights: np.ndarray, eps: float,
                      variant: str = "symmetric") -> np.ndarray:
    """d(balance_loss)/d(mean weight), shape (L, N)."""
    n = mean_weights.shape[1]
    hi = (1.0 + eps) / n
    lo = (1.0 - eps) / n
    g = np.where(mean_weights > hi, 1.0, 0.0)
    if variant == "symmetric":
        g = g - np.where(mean_weights < lo, 1.0, 0.0)
    elif variant == "verbatim":
        g = g - np.where(mean_weights > lo, 1.0, 0.0)
    else:
        raise ValueError(f"unknown balance loss variant {variant!r}")
    return g
