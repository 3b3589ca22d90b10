"""Mini-batch training loop, evaluation, multi-seed aggregation, grid export."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError, ShapeError
from .numeric import SHUFFLE_STREAM, AdamState, adam_step, make_rng
from .partition import LossConfig, PartitionModel, class_probs, nll_loss, partition_forward
from .data import Dataset


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 64
    lr: float = 0.01
    seed: int = 42
    eps: float = 1e-10
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")


@dataclass
class RunMetrics:
    train_accuracy: float
    test_accuracy: float
    loss_history: list
    wall_seconds: float
    param_count: int
    seed: int = 0


class PunnClassifier:
    """Trainable wrapper around a PartitionModel."""

    def __init__(self, model: PartitionModel):
        self.model = model
        self.classes = model.classes
        self.dim = model.dim

    def param_count(self) -> int:
        return self.model.param_count()

    def get_params(self) -> np.ndarray:
        return self.model.get_params()

    def set_params(self, flat: np.ndarray) -> None:
        self.model.set_params(flat)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        h, _ = partition_forward(self.model, x)
        return class_probs(h, self.model.pi, self.classes)

    def predict(self, x: np.ndarray):
        p = self.predict_proba(x)
        return np.argmax(p, axis=1), p

    def loss_and_grad(self, x: np.ndarray, y: np.ndarray, eps: float = 1e-10):
        loss, grads = nll_loss(self.model, x, y, LossConfig(eps))
        return loss, np.concatenate(grads)


def train(clf, ds: Dataset, cfg: TrainConfig, test: Dataset | None = None):
    """Train a classifier (PunnClassifier or SoftmaxMlp) with Adam.

    One seeded permutation per epoch; the last incomplete batch is kept.
    Deterministic: (classifier init, dataset, config) fixes the result.
    """
    if ds.features.shape[1] != clf.dim:
        raise ShapeError("dataset dimension does not match the model")
    rng = make_rng(cfg.seed, SHUFFLE_STREAM)
    adam = AdamState(lr=cfg.lr)
    params = clf.get_params()
    n = ds.n
    history = []
    t0 = time.perf_counter()
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grad = clf.loss_and_grad(ds.features[idx], ds.labels[idx], cfg.eps)
            if not np.isfinite(loss):
                raise NumericError(
                    f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size}")
            params = adam_step(adam, params, grad)
            clf.set_params(params)
            epoch_loss += loss * idx.size
        history.append(epoch_loss / n)
    wall = time.perf_counter() - t0
    train_acc, _ = evaluate(clf, ds)
    test_acc = float("nan")
    if test is not None:
        test_acc, _ = evaluate(clf, test)
    return clf, RunMetrics(train_acc, test_acc, history, wall,
                           clf.param_count(), cfg.seed)


def evaluate(clf, ds: Dataset):
    """Accuracy and a row-normalized confusion matrix."""
    if ds.n == 0:
        raise ShapeError("cannot evaluate on an empty dataset")
    pred, _ = clf.predict(ds.features)
    acc = float(np.mean(pred == ds.labels))
    c = clf.classes
    confusion = np.zeros((c, c))
    for t, p in zip(ds.labels, pred):
        confusion[t, p] += 1.0
    row = confusion.sum(axis=1, keepdims=True)
    normalized = np.divide(confusion, row, out=np.zeros_like(confusion),
                           where=row > 0)
    return acc, normalized


def multi_seed(run_fn, seeds):
    """Run `run_fn(seed) -> RunMetrics` per seed; report mean and population std."""
    if len(seeds) == 0:
        raise ConfigError("at least one seed required")
    runs = [run_fn(s) for s in seeds]
    summary = {}
    for name in ("train_accuracy", "test_accuracy", "param_count"):
        vals = np.array([getattr(r, name) for r in runs], dtype=float)
        summary[name] = (float(vals.mean()), float(vals.std()))
    return runs, summary


def grid_eval(model: PartitionModel, bounds, resolution: int):
    """Dense 2-D evaluation: points, partition values and predicted classes.

    bounds is ((x1_min, x1_max), (x2_min, x2_max)); returns (points (r^2, 2),
    h (r^2, k), classes (r^2,)) in row-major order over the grid.
    """
    if model.dim != 2:
        raise ShapeError("grid_eval supports 2-D models only")
    (x1_min, x1_max), (x2_min, x2_max) = bounds
    xs = np.linspace(x1_min, x1_max, resolution)
    ys = np.linspace(x2_min, x2_max, resolution)
    g1, g2 = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([g1.ravel(), g2.ravel()], axis=1)
    h, _ = partition_forward(model, pts)
    p = class_probs(h, model.pi, model.classes)
    return pts, h, np.argmax(p, axis=1)
