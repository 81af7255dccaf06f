"""Small dense network on a flat parameter vector with hand-rolled gradients.

tanh hidden layers, linear output, mean-squared-error loss. The flat layout
is, per layer, the weight matrix in row-major order followed by the bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_WIDTHS = (1, 32, 32, 1)


def param_count(widths: tuple[int, ...]) -> int:
    return sum(widths[i + 1] * widths[i] + widths[i + 1] for i in range(len(widths) - 1))


@dataclass
class NetParams:
    flat: np.ndarray
    widths: tuple[int, ...] = DEFAULT_WIDTHS

    def __post_init__(self):
        self.flat = np.asarray(self.flat, dtype=float)
        if self.flat.shape != (param_count(self.widths),):
            raise ValueError("flat length inconsistent with layer widths")

    def copy(self) -> "NetParams":
        return NetParams(self.flat.copy(), self.widths)

    def layers(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(W, b) views into the flat vector, one pair per layer."""
        out = []
        pos = 0
        for i in range(len(self.widths) - 1):
            fan_in, fan_out = self.widths[i], self.widths[i + 1]
            W = self.flat[pos : pos + fan_out * fan_in].reshape(fan_out, fan_in)
            pos += fan_out * fan_in
            b = self.flat[pos : pos + fan_out]
            pos += fan_out
            out.append((W, b))
        return out


def init_params(
    widths: tuple[int, ...] = DEFAULT_WIDTHS, rng: np.random.Generator | None = None
) -> NetParams:
    rng = rng or np.random.default_rng(0)
    chunks = []
    for i in range(len(widths) - 1):
        fan_in, fan_out = widths[i], widths[i + 1]
        chunks.append(rng.standard_normal(fan_out * fan_in) / np.sqrt(fan_in))
        chunks.append(np.zeros(fan_out))
    return NetParams(np.concatenate(chunks), tuple(widths))


def _forward(params: NetParams, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    a = np.asarray(x, dtype=float).reshape(-1, 1)
    acts = [a]
    layers = params.layers()
    for W, b in layers[:-1]:
        a = np.tanh(a @ W.T + b)
        acts.append(a)
    W, b = layers[-1]
    out = a @ W.T + b
    acts.append(out)
    return out, acts


def net_forward(params: NetParams, x) -> np.ndarray | float:
    """Evaluate the network; scalar in, scalar out."""
    scalar = np.isscalar(x) or np.ndim(x) == 0
    out, _ = _forward(params, np.atleast_1d(np.asarray(x, dtype=float)))
    return float(out[0, 0]) if scalar else out[:, 0]


def loss_and_grad(params: NetParams, x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """MSE over the points and its exact gradient in the flat layout."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("loss needs at least one point")
    out, acts = _forward(params, x)
    resid = out - y.reshape(-1, 1)
    n = x.size
    loss = float((resid**2).mean())

    layers = params.layers()
    grads: list[np.ndarray] = [np.empty(0)] * len(layers)
    delta = 2.0 * resid / n  # d loss / d output
    for li in range(len(layers) - 1, -1, -1):
        W, _ = layers[li]
        a_prev = acts[li]
        gW = delta.T @ a_prev
        gb = delta.sum(axis=0)
        grads[li] = np.concatenate([gW.ravel(), gb])
        if li > 0:
            da = delta @ W
            delta = da * (1.0 - acts[li] ** 2)  # tanh'
    return loss, np.concatenate(grads)


def inner_adapt(params: NetParams, x: np.ndarray, y: np.ndarray, lr: float, steps: int) -> NetParams:
    """Plain gradient descent on one dataset, starting from params."""
    flat = params.flat.copy()
    for _ in range(steps):
        _, g = loss_and_grad(NetParams(flat, params.widths), x, y)
        flat = flat - lr * g
    return NetParams(flat, params.widths)
