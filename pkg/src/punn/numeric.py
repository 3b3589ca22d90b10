"""Dense numeric substrate: seeded RNG, MLP forward/backward, Adam, finite differences.

All arithmetic is float64. Randomness comes from numpy's PCG64 generator, so a
seed fully determines initialization, batch order and trained parameters within
this implementation (cross-language bitwise equality is not a goal).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ShapeError


# Named substreams of a run seed. Keeping initialization and batch shuffling on
# distinct streams avoids feeding the same raw draws to both.
INIT_STREAM = 0
SHUFFLE_STREAM = 1


def make_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    """Seeded PCG64 generator; identical (seed, stream) gives an identical stream."""
    if stream is None:
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


def softplus(x):
    """log(1 + e^x), overflow-safe."""
    return np.logaddexp(0.0, x)


def softplus_inv(y):
    """Inverse of softplus for y > 0."""
    y = np.asarray(y, dtype=float)
    return y + np.log(-np.expm1(-y))


def dsoftplus(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))


# ---------------------------------------------------------------------------
# MLP with ReLU hidden layers and a linear output layer.
# Parameters live in a single flat float64 vector; `MlpShape` maps between the
# flat vector and per-layer weight/bias views.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MlpShape:
    dims: tuple  # (d_in, h1, ..., d_out)

    @property
    def n_layers(self) -> int:
        return len(self.dims) - 1

    def param_count(self) -> int:
        return sum(o * i + o for i, o in zip(self.dims[:-1], self.dims[1:]))

    def views(self, flat: np.ndarray):
        """Split a flat parameter vector into [(W, b), ...] array views."""
        if flat.shape != (self.param_count(),):
            raise ShapeError(
                f"expected {self.param_count()} parameters, got {flat.shape}")
        out, pos = [], 0
        for i, o in zip(self.dims[:-1], self.dims[1:]):
            w = flat[pos:pos + o * i].reshape(o, i)
            pos += o * i
            b = flat[pos:pos + o]
            pos += o
            out.append((w, b))
        return out


def mlp_init(shape: MlpShape, rng: np.random.Generator) -> np.ndarray:
    """Glorot-uniform weights, zero biases, as one flat vector."""
    flat = np.zeros(shape.param_count())
    for w, _ in shape.views(flat):
        fan_in, fan_out = w.shape[1], w.shape[0]
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        w[:] = rng.uniform(-bound, bound, size=w.shape)
    return flat


def mlp_forward(shape: MlpShape, flat: np.ndarray, x: np.ndarray):
    """Forward pass over a batch.

    x is (n, d_in); hidden layers apply max(0, .), the last layer is linear.
    Returns (output (n, d_out), cache) where the cache keeps the
    post-activation of every layer for the backward pass.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != shape.dims[0]:
        raise ShapeError(f"input dim {x.shape[1]} != expected {shape.dims[0]}")
    layers = shape.views(flat)
    acts = [x]
    h = x
    for li, (w, b) in enumerate(layers):
        z = h @ w.T + b
        h = z if li == len(layers) - 1 else np.maximum(z, 0.0)
        acts.append(h)
    return h, acts


def mlp_backward(shape: MlpShape, flat: np.ndarray, cache, upstream: np.ndarray):
    """Gradients of sum(upstream * output) w.r.t. parameters and input.

    `cache` must come from a matching mlp_forward call. The ReLU subgradient
    at exactly 0 is 0. Returns (flat parameter gradient, dx of shape (n, d_in)).
    """
    layers = shape.views(flat)
    acts = cache
    if len(acts) != len(layers) + 1 or acts[-1].shape[1] != shape.dims[-1]:
        raise ShapeError("cache does not match this MLP")
    grad = np.zeros_like(flat)
    gviews = shape.views(grad)
    delta = np.atleast_2d(np.asarray(upstream, dtype=float))
    for li in range(len(layers) - 1, -1, -1):
        w, _ = layers[li]
        gw, gb = gviews[li]
        if li != len(layers) - 1:
            delta = delta * (acts[li + 1] > 0.0)
        gw += delta.T @ acts[li]
        gb += delta.sum(axis=0)
        delta = delta @ w
    return grad, delta


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray = field(default=None)  # type: ignore[assignment]
    v: np.ndarray = field(default=None)  # type: ignore[assignment]


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """One bias-corrected Adam update; mutates `state`, returns new params."""
    grads = np.asarray(grads, dtype=float)
    if grads.shape != params.shape:
        raise ShapeError("params and grads differ in length")
    if not np.all(np.isfinite(grads)):
        raise NumericError("non-finite gradient entry in adam_step")
    if state.m is None:
        state.m = np.zeros_like(params)
        state.v = np.zeros_like(params)
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


# ---------------------------------------------------------------------------
# Finite differences (test oracle; keep independent of analytic code paths)
# ---------------------------------------------------------------------------

def finite_diff_grad(f, params: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient estimate of a scalar function."""
    if h <= 0:
        raise ValueError("h must be positive")
    params = np.asarray(params, dtype=float)
    grad = np.zeros_like(params)
    for i in range(params.size):
        step = np.zeros_like(params)
        step.flat[i] = h
        fp = f(params + step)
        fm = f(params - step)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NumericError(f"non-finite function value at coordinate {i}")
        grad.flat[i] = (fp - fm) / (2.0 * h)
    return grad


def max_rel_err(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    """max_i |a_i - n_i| / max(|a_i|, |n_i|, floor)."""
    a = np.asarray(analytic, dtype=float).ravel()
    n = np.asarray(numeric, dtype=float).ravel()
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom)) if a.size else 0.0
