"""Recursive partition construction, class aggregation, prediction and NLL loss.

With gates g_1..g_{k-1} the partition functions are

    h_1 = g_1,
    h_i = (prod_{j<i} (1 - g_j)) g_i,   i = 2..k-1,
    h_k = prod_{j<k} (1 - g_j),

which sum to 1 with every h_i >= 0 for any gate values in [0, 1]. Class
probabilities aggregate partitions through a surjective map pi.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError
from .gates import GateSpec, gate_eval, gate_grad


@dataclass
class PartitionModel:
    gates: list  # k-1 GateSpec, ordered
    classes: int
    pi: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if len(self.gates) < 1:
            raise ConfigError("a partition model needs at least one gate (k >= 2)")
        if self.pi is None:
            self.pi = np.arange(self.k)
        self.pi = np.asarray(self.pi, dtype=int)
        if self.pi.shape != (self.k,):
            raise ConfigError(f"pi must have length k={self.k}")
        if set(self.pi.tolist()) != set(range(self.classes)):
            raise ConfigError("pi must map partitions onto all classes")

    @property
    def k(self) -> int:
        return len(self.gates) + 1

    @property
    def dim(self) -> int:
        return self.gates[0].dim

    def param_count(self) -> int:
        return int(sum(g.params.size for g in self.gates))

    def get_params(self) -> np.ndarray:
        return np.concatenate([g.params for g in self.gates])

    def set_params(self, flat: np.ndarray) -> None:
        pos = 0
        for g in self.gates:
            g.params = np.asarray(flat[pos:pos + g.params.size], dtype=float)
            pos += g.params.size
        if pos != flat.size:
            raise ShapeError("flat parameter vector does not match model")


@dataclass
class LossConfig:
    eps: float = 1e-10

    def __post_init__(self):
        if self.eps <= 0:
            raise ConfigError("loss eps must be positive")


def stick_breaking_partitions(g: np.ndarray) -> np.ndarray:
    """Map gate values (n, k-1) to partition values (n, k)."""
    g = np.atleast_2d(np.asarray(g, dtype=float))
    n, km1 = g.shape
    h = np.empty((n, km1 + 1))
    rest = np.ones(n)
    for j in range(km1):
        h[:, j] = rest * g[:, j]
        rest = rest * (1.0 - g[:, j])
    h[:, km1] = rest
    return h


def partition_forward(model: PartitionModel, x: np.ndarray):
    """Evaluate all partitions on a batch; returns (h (n, k), gate caches)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    gvals, caches = [], []
    for spec in model.gates:
        v, cache = gate_eval(spec, x)
        gvals.append(v)
        caches.append(cache)
    g = np.stack(gvals, axis=1)
    return stick_breaking_partitions(g), (g, caches)


def class_probs(h: np.ndarray, pi: np.ndarray, classes: int) -> np.ndarray:
    """Aggregate partition values (n, k) into class probabilities (n, C)."""
    h = np.atleast_2d(np.asarray(h, dtype=float))
    p = np.zeros((h.shape[0], classes))
    for i, c in enumerate(np.asarray(pi, dtype=int)):
        p[:, c] += h[:, i]
    return p


def predict(model: PartitionModel, x: np.ndarray):
    """Predicted class per input (argmax, ties to the lowest index) and probs."""
    h, _ = partition_forward(model, x)
    p = class_probs(h, model.pi, model.classes)
    return np.argmax(p, axis=1), p


def stick_breaking_check(g: np.ndarray, m: int) -> float:
    """|sum_{j<=m} h_j - (1 - prod_{j<=m} (1-g_j))| for gate values g."""
    g = np.asarray(g, dtype=float)
    if not 1 <= m <= g.size:
        raise ShapeError("m must be in [1, len(g)]")
    h = stick_breaking_partitions(g[None, :])[0]
    lhs = float(np.sum(h[:m]))
    rhs = 1.0 - float(np.prod(1.0 - g[:m]))
    return abs(lhs - rhs)


def nll_loss(model: PartitionModel, x: np.ndarray, y: np.ndarray,
             cfg: LossConfig = LossConfig()):
    """Mean stabilized negative log-likelihood and per-gate parameter gradients.

    loss = -mean_n log(p_{y_n}(x_n) + eps). Gradients with respect to the gate
    values use prefix/suffix products of (1 - g_j), never a division, so they
    stay finite when some gate saturates at 1.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=int)
    n = x.shape[0]
    if n == 0:
        raise ShapeError("empty batch")
    if y.shape != (n,):
        raise ShapeError("labels do not match batch")
    if y.min() < 0 or y.max() >= model.classes:
        raise ShapeError("label outside [0, classes)")

    h, (g, caches) = partition_forward(model, x)
    p = class_probs(h, model.pi, model.classes)
    p_y = p[np.arange(n), y]
    loss = float(-np.mean(np.log(p_y + cfg.eps)))

    # dL/dh_i = -[pi(i) = y_n] / (p_y + eps) / n
    k = model.k
    sel = (np.asarray(model.pi)[None, :] == y[:, None]).astype(float)
    u = -sel / ((p_y + cfg.eps) * n)[:, None]  # (n, k)

    # prefix products P_j = prod_{l<=j} (1-g_l), P_0 = 1
    one_minus = 1.0 - g
    prefix = np.ones((n, k))
    np.cumprod(one_minus, axis=1, out=prefix[:, 1:])

    # backward suffix recursion: R_j = u_{j+1} g_{j+1} + (1-g_{j+1}) R_{j+1},
    # R_{k-1} = u_k; then dL/dg_j = P_{j-1} (u_j - R_j).
    grads = [None] * (k - 1)
    R = u[:, k - 1].copy()
    for j in range(k - 2, -1, -1):
        dg = prefix[:, j] * (u[:, j] - R)
        grads[j] = gate_grad(model.gates[j], x, caches[j], dg)
        if j > 0:
            R = u[:, j] * g[:, j] + one_minus[:, j] * R
    return loss, grads
