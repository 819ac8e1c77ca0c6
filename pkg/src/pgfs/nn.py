"""Dense feed-forward networks with exact manual backpropagation.

Everything is float64 numpy: small multilayer perceptrons where analytic
gradients must match finite differences tightly and training runs must be
bit-reproducible across save/load.  ``backward`` is the pure Jacobian
transpose — loss scaling (batch means) belongs to the caller, which passes
an already-scaled upstream gradient.
"""
from __future__ import annotations

import numpy as np

__all__ = ["Adam", "DenseNet", "polyak_update"]

_ACTIVATIONS = ("relu", "tanh", "linear")


def _he_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


class DenseNet:
    """Affine layers with per-layer activations (hidden ReLU by default).

    ``dims`` lists layer widths input-first, e.g. ``[1024, 256, 128, 35]``;
    ``out_act`` is the final activation (``linear`` for logits and critic
    values, ``tanh`` for bounded actions).
    """

    def __init__(
        self,
        dims: list[int],
        rng: np.random.Generator,
        hidden_act: str = "relu",
        out_act: str = "linear",
    ):
        if len(dims) < 2:
            raise ValueError("need at least input and output widths")
        if hidden_act not in _ACTIVATIONS or out_act not in _ACTIVATIONS:
            raise ValueError(f"activations must be one of {_ACTIVATIONS}")
        self.dims = list(dims)
        self.activations = [hidden_act] * (len(dims) - 2) + [out_act]
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            self.weights.append(_he_uniform(rng, fan_in, fan_out))
            self.biases.append(np.zeros(fan_out))

    # -- parameter plumbing -------------------------------------------------
    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[np.ndarray]:
        """Live views, interleaved [W0, b0, W1, b1, ...]."""
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "DenseNet":
        dup = object.__new__(DenseNet)
        dup.dims = list(self.dims)
        dup.activations = list(self.activations)
        dup.weights = [w.copy() for w in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        return dup

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat(self, flat: np.ndarray) -> None:
        pos = 0
        for p in self.parameters():
            nxt = pos + p.size
            p[...] = flat[pos:nxt].reshape(p.shape)
            pos = nxt
        if pos != flat.size:
            raise ValueError(f"flat vector has {flat.size} entries, need {pos}")

    # -- forward / backward --------------------------------------------------
    @staticmethod
    def _act(name: str, z: np.ndarray) -> np.ndarray:
        if name == "relu":
            return np.maximum(z, 0.0)
        if name == "tanh":
            return np.tanh(z)
        return z

    @staticmethod
    def _act_grad(name: str, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        if name == "relu":
            return (z > 0.0).astype(np.float64)
        if name == "tanh":
            return 1.0 - y * y
        return np.ones_like(z)

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cache(x)
        return y

    def forward_cache(self, x: np.ndarray):
        """Returns (output, cache) with cache holding every layer input and
        pre-activation for the backward pass.  1-D inputs are treated as a
        single row and squeezed on output."""
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        inputs: list[np.ndarray] = []
        pres: list[np.ndarray] = []
        outs: list[np.ndarray] = []
        for w, b, act in zip(self.weights, self.biases, self.activations):
            inputs.append(h)
            z = h @ w.T + b
            pres.append(z)
            h = self._act(act, z)
            outs.append(h)
        cache = (inputs, pres, outs, squeeze)
        return (h[0] if squeeze else h), cache

    def backward(self, cache, dy: np.ndarray):
        """Jacobian-transpose product: upstream dy (same shape as the output)
        to (dx, grads) with grads interleaved like :meth:`parameters`."""
        inputs, pres, outs, squeeze = cache
        g = np.asarray(dy, dtype=np.float64)
        if squeeze:
            g = g[None, :]
        grads: list[np.ndarray] = [None] * (2 * self.n_layers)
        for i in range(self.n_layers - 1, -1, -1):
            g = g * self._act_grad(self.activations[i], pres[i], outs[i])
            grads[2 * i] = g.T @ inputs[i]
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ self.weights[i]
        return (g[0] if squeeze else g), grads


class Adam:
    """Standard bias-corrected Adam over a fixed parameter list."""

    def __init__(
        self,
        params: list[np.ndarray],
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ValueError("parameter/gradient count mismatch")
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


def polyak_update(target: DenseNet, live: DenseNet, tau: float) -> None:
    """theta_target <- tau * theta_live + (1 - tau) * theta_target."""
    for tp, lp in zip(target.parameters(), live.parameters()):
        tp *= 1.0 - tau
        tp += tau * lp
