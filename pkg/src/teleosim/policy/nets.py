"""Plain-numpy feed-forward networks with analytic backpropagation.

Forward passes accept a single observation vector or a (batch, dim) matrix.
``forward_cached`` returns the cache that ``backward`` consumes; parameters
are exposed as a flat, ordered list of arrays shared with the optimizer.
"""

from __future__ import annotations

import numpy as np


def elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, y + 1.0)


class Linear:
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator,
                 scale: float | None = None):
        std = np.sqrt(2.0 / n_in) if scale is None else scale
        self.w = rng.normal(0.0, std, size=(n_out, n_in))
        self.b = np.zeros(n_out)

    def forward(self, x: np.ndarray) -> np.ndarray:
        return x @ self.w.T + self.b

    def backward(self, x: np.ndarray, gout: np.ndarray):
        gw = gout.T @ x
        gb = gout.sum(axis=0)
        gin = gout @ self.w
        return [gw, gb], gin

    @property
    def params(self) -> list:
        return [self.w, self.b]


class MLPNet:
    """Fully-connected net, ELU between layers, linear output by default."""

    def __init__(self, sizes: list[int], rng: np.random.Generator,
                 activate_output: bool = False, out_scale: float | None = None):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(sizes)
        self.activate_output = activate_output
        self.layers = []
        for i in range(len(sizes) - 1):
            last = i == len(sizes) - 2
            scale = out_scale if (last and out_scale is not None) else None
            self.layers.append(Linear(sizes[i], sizes[i + 1], rng, scale=scale))

    @property
    def params(self) -> list:
        out = []
        for layer in self.layers:
            out.extend(layer.params)
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cached(x)
        return y

    def forward_cached(self, x: np.ndarray):
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        inputs, preacts = [], []
        for i, layer in enumerate(self.layers):
            inputs.append(h)
            z = layer.forward(h)
            preacts.append(z)
            if i < len(self.layers) - 1 or self.activate_output:
                h = elu(z)
            else:
                h = z
        if not np.all(np.isfinite(h)):
            raise FloatingPointError("non-finite activation in MLP forward")
        y = h[0] if squeeze else h
        return y, {"inputs": inputs, "preacts": preacts, "squeeze": squeeze}

    def backward(self, cache: dict, gout: np.ndarray):
        """Gradients for all parameters plus the input gradient."""
        g = np.asarray(gout, dtype=np.float64)
        if cache["squeeze"]:
            g = g[None, :]
        grads: list = [None] * (2 * len(self.layers))
        for i in range(len(self.layers) - 1, -1, -1):
            if i < len(self.layers) - 1 or self.activate_output:
                z = cache["preacts"][i]
                g = g * elu_grad(z, elu(z))
            (gw, gb), g = self.layers[i].backward(cache["inputs"][i], g)
            grads[2 * i] = gw
            grads[2 * i + 1] = gb
        gin = g[0] if cache["squeeze"] else g
        return grads, gin


class Adam:
    """Adam over a referenced parameter list; updates happen in place."""

    def __init__(self, params: list, lr: float = 3e-4, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)

    def state_arrays(self) -> list:
        return self.m + self.v

    def load_state(self, arrays: list, t: int) -> None:
        n = len(self.m)
        if len(arrays) != 2 * n:
            raise ValueError("optimizer state length mismatch")
        for dst, src in zip(self.m + self.v, arrays):
            dst[...] = src
        self.t = t


def flatten_params(params: list) -> np.ndarray:
    return np.concatenate([p.ravel() for p in params])


def set_flat_params(params: list, flat: np.ndarray) -> None:
    i = 0
    for p in params:
        p[...] = flat[i:i + p.size].reshape(p.shape)
        i += p.size
    if i != flat.size:
        raise ValueError("flat parameter size mismatch")
