"""Constructive density machinery: gamma recursion, exact reconstruction,
logit targets and a desk-scale fit of gate-argument networks to those targets.

Given a continuous probability map p sampled on a grid, the recursion

    gamma_1 = p_1,   gamma_i = p_i / sum_{j>=i} p_j   (i = 2..k-1)

produces gate targets whose stick-breaking partitions reproduce p exactly.
Feeding phi_i = logit(gamma_i) as regression targets for each gate argument
network then demonstrates, numerically, that sigmoid-gated partitions can
approximate any interior probability map on the grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, NumericError
from .gates import mlp_gate
from .numeric import AdamState, MlpShape, adam_step, make_rng, mlp_backward, mlp_forward
from .partition import PartitionModel, partition_forward, stick_breaking_partitions

GAMMA_CLIP = 1e-9


@dataclass
class ProbabilityMapGrid:
    """A probability map sampled on an axis-aligned grid in R^d."""
    box: np.ndarray        # (d, 2) lower/upper bounds
    resolution: tuple      # points per axis
    points: np.ndarray     # (m, d)
    values: np.ndarray     # (m, k), strictly interior rows summing to 1

    @property
    def k(self) -> int:
        return self.values.shape[1]


def grid_points(box, resolution) -> np.ndarray:
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    axes = [np.linspace(lo, hi, r) for (lo, hi), r in zip(box, resolution)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def probability_map_grid(box, resolution, fn) -> ProbabilityMapGrid:
    """Sample fn (points (m, d) -> (m, k)) on the grid and validate interiority."""
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    pts = grid_points(box, resolution)
    vals = np.asarray(fn(pts), dtype=float)
    if vals.ndim != 2 or vals.shape[0] != pts.shape[0]:
        raise ConfigError("probability map must return (m, k) values")
    if np.any(vals <= 0.0):
        raise DomainError("probability map must be strictly interior to the simplex")
    if np.max(np.abs(vals.sum(axis=1) - 1.0)) > 1e-12:
        raise DomainError("probability map rows must sum to 1")
    return ProbabilityMapGrid(box, tuple(resolution), pts, vals)


def gamma_from_pmap(values: np.ndarray) -> np.ndarray:
    """Gate targets gamma (m, k-1) from interior simplex values (m, k)."""
    p = np.atleast_2d(np.asarray(values, dtype=float))
    if np.any(p <= 0.0):
        raise DomainError("map not in the relative interior: nonpositive entry")
    k = p.shape[1]
    tail = np.cumsum(p[:, ::-1], axis=1)[:, ::-1]  # tail[:, i] = sum_{j>=i} p_j
    gamma = np.empty((p.shape[0], k - 1))
    gamma[:, 0] = p[:, 0]
    for i in range(1, k - 1):
        if np.any(tail[:, i] <= 0.0):
            raise DomainError("map not in the relative interior: zero tail sum")
        gamma[:, i] = p[:, i] / tail[:, i]
    return gamma


def exact_reconstruct(gamma: np.ndarray) -> np.ndarray:
    """Partition values obtained by using gamma directly as gate values."""
    gamma = np.atleast_2d(np.asarray(gamma, dtype=float))
    return stick_breaking_partitions(gamma)


class ClampCounter:
    """Counts gamma values pushed off the simplex boundary before the logit."""

    def __init__(self):
        self.count = 0


def phi_targets(gamma: np.ndarray, activation: str = "sigmoid",
                clamp_counter: ClampCounter | None = None) -> np.ndarray:
    """Inverse-activation targets phi = logit(gamma) for sigmoid gates."""
    if activation != "sigmoid":
        raise ConfigError("only the strictly monotone sigmoid is supported")
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma <= 0.0) or np.any(gamma >= 1.0):
        raise DomainError("gamma must lie strictly in (0, 1)")
    clipped = np.clip(gamma, GAMMA_CLIP, 1.0 - GAMMA_CLIP)
    if clamp_counter is not None:
        clamp_counter.count += int(np.sum(clipped != gamma))
    return np.log(clipped / (1.0 - clipped))


@dataclass
class DensityFitReport:
    sup_error: float
    per_gate_sup: list
    phi_fit_sup: list
    clamped: int
    epochs: int
    hidden: list
    loss_history: list = field(default_factory=list)


def fit_density_demo(pmap: ProbabilityMapGrid, hidden=(16,), epochs: int = 2000,
                     lr: float = 0.01, seed: int = 0):
    """Fit each gate argument network to its phi target by least squares.

    Returns (PartitionModel with the fitted sigmoid MLP gates, DensityFitReport
    with the resulting sup-norm partition error on the grid).
    """
    rng = make_rng(seed)
    counter = ClampCounter()
    gamma = gamma_from_pmap(pmap.values)
    phi = phi_targets(gamma, clamp_counter=counter)
    d = pmap.points.shape[1]
    gates, phi_sup = [], []
    m = pmap.points.shape[0]
    for i in range(pmap.k - 1):
        shape = MlpShape((d, *hidden, 1))
        params = _fit_regression(shape, pmap.points, phi[:, i], epochs, lr, rng)
        gate = mlp_gate(d, list(hidden), "sigmoid", rng)
        gate.params = params
        gates.append(gate)
        out, _ = mlp_forward(shape, params, pmap.points)
        phi_sup.append(float(np.max(np.abs(out[:, 0] - phi[:, i]))))
    model = PartitionModel(gates, classes=pmap.k)
    h, _ = partition_forward(model, pmap.points)
    per_gate = np.max(np.abs(h - pmap.values), axis=0)
    report = DensityFitReport(float(per_gate.max()), per_gate.tolist(), phi_sup,
                              counter.count, epochs, list(hidden))
    return model, report


def _fit_regression(shape: MlpShape, x: np.ndarray, target: np.ndarray,
                    epochs: int, lr: float, rng: np.random.Generator) -> np.ndarray:
    """Full-batch Adam on mean squared error against a scalar target."""
    from .numeric import mlp_init
    params = mlp_init(shape, rng)
    adam = AdamState(lr=lr)
    n = x.shape[0]
    for _ in range(epochs):
        out, cache = mlp_forward(shape, params, x)
        resid = out[:, 0] - target
        if not np.all(np.isfinite(resid)):
            raise NumericError("density fit diverged (non-finite residual)")
        grad, _ = mlp_backward(shape, params, cache, (2.0 / n) * resid[:, None])
        params = adam_step(adam, params, grad)
    return params


def convergence_report(pmap: ProbabilityMapGrid, widths, epochs: int = 2000,
                       lr: float = 0.01, seed: int = 0) -> str:
    """Grid error versus hidden width, as structured text for the plot layer."""
    lines = ["hidden_width\tsup_error\tclamped"]
    for w in widths:
        _, rep = fit_density_demo(pmap, hidden=(w,), epochs=epochs, lr=lr, seed=seed)
        lines.append(f"{w}\t{rep.sup_error:.6e}\t{rep.clamped}")
    return "\n".join(lines)
