"""Datasets: synthetic generators, CSV and MNIST ingestion, standardization, splits."""
from __future__ import annotations

import csv
import gzip
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ParseError, SplitError
from .numeric import make_rng

SYNTHETIC_KINDS = ("moons", "circles", "xor", "helix", "rings")


@dataclass
class Dataset:
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray    # (n,) int
    feature_names: list = field(default_factory=list)
    class_names: list = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def classes(self) -> int:
        return int(self.labels.max()) + 1 if self.n else 0


@dataclass
class StandardizationStats:
    mean: np.ndarray
    std: np.ndarray  # zero-variance features recorded as 1

    def apply(self, ds: Dataset) -> Dataset:
        return Dataset((ds.features - self.mean) / self.std, ds.labels,
                       ds.feature_names, ds.class_names)


# ---------------------------------------------------------------------------
# Synthetic generators
# ---------------------------------------------------------------------------

def make_synthetic(kind: str, n: int = 1000, noise: float = 0.1,
                   seed: int = 0) -> Dataset:
    """Seeded 2-D toy datasets; label counts are balanced to within one."""
    if n < 2:
        raise ConfigError("n must be >= 2")
    if noise < 0:
        raise ConfigError("noise must be >= 0")
    if kind == "moons":
        from sklearn.datasets import make_moons
        x, y = make_moons(n_samples=n, noise=noise, random_state=seed)
        return Dataset(x, y, class_names=["moon0", "moon1"])
    if kind == "circles":
        from sklearn.datasets import make_circles
        x, y = make_circles(n_samples=n, noise=noise, factor=0.5,
                            random_state=seed)
        return Dataset(x, y, class_names=["outer", "inner"])
    rng = make_rng(seed)
    if kind == "xor":
        # alternating cluster order keeps labels balanced for any n
        centers = np.array([(-1, -1), (1, -1), (1, 1), (-1, 1)], dtype=float)
        cluster_label = np.array([0, 1, 0, 1])
        idx = np.arange(n) % 4
        x = centers[idx] + noise * rng.normal(size=(n, 2))
        return Dataset(x, cluster_label[idx])
    if kind == "helix":
        y = np.arange(n) % 2
        t = rng.uniform(0.0, 4.0 * np.pi, size=n)
        phase = np.where(y == 0, 0.0, np.pi)
        x = np.stack([t * np.cos(t + phase), t * np.sin(t + phase)], axis=1)
        x += noise * rng.normal(size=(n, 2))
        return Dataset(x, y)
    if kind == "rings":
        # class c occupies the annulus [c, c + 0.6] before noise
        y = np.arange(n) % 3
        r = y + rng.uniform(0.0, 0.6, size=n)
        ang = rng.uniform(0.0, 2.0 * np.pi, size=n)
        x = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
        x += noise * rng.normal(size=(n, 2))
        return Dataset(x, y)
    raise ConfigError(f"unknown synthetic dataset {kind!r}")


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def load_csv(path: str, label_column=-1, header: bool = False) -> Dataset:
    """Rectangular numeric CSV with one label column (values may be strings).

    Class encoding follows first-appearance order. `label_column` is an index
    or, with header=True, a column name.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ParseError(f"{path}: empty file")
    names = None
    if header:
        names = rows[0]
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path}: header but no data rows")
    width = len(rows[0])
    if isinstance(label_column, str):
        if names is None or label_column not in names:
            raise ParseError(f"{path}: unknown label column {label_column!r}")
        label_idx = names.index(label_column)
    else:
        label_idx = label_column % width
        if not 0 <= label_idx < width:
            raise ParseError(f"{path}: label column {label_column} out of range")

    feats, raw_labels = [], []
    for ri, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"{path}: ragged row {ri} ({len(row)} != {width} cells)")
        vals = []
        for ci, cell in enumerate(row):
            if ci == label_idx:
                raw_labels.append(cell.strip())
                continue
            try:
                vals.append(float(cell))
            except ValueError:
                raise ParseError(f"{path}: non-numeric cell at row {ri}, column {ci}: {cell!r}")
        feats.append(vals)

    class_names = []
    labels = []
    for lbl in raw_labels:
        if lbl not in class_names:
            class_names.append(lbl)
        labels.append(class_names.index(lbl))
    feature_names = ([nm for i, nm in enumerate(names) if i != label_idx]
                     if names else [])
    return Dataset(np.asarray(feats, dtype=float), np.asarray(labels, dtype=int),
                   feature_names, class_names)


def save_csv(ds: Dataset, path: str) -> None:
    """Feature columns followed by the label column, no header."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for x, y in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in x] + [int(y)])


# ---------------------------------------------------------------------------
# Standardization and splitting
# ---------------------------------------------------------------------------

def standardize(train: Dataset, others=()):
    """Zero-mean unit-variance transform fitted on `train` only.

    Uses the population standard deviation; zero-variance features keep their
    values (std recorded as 1). Returns (train', [others'], stats).
    """
    if train.n == 0:
        raise ConfigError("cannot standardize an empty training set")
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    stats = StandardizationStats(mean, std)
    return stats.apply(train), [stats.apply(d) for d in others], stats


def stratified_split(ds: Dataset, test_fraction: float, seed: int = 0):
    """Disjoint stratified (train, test) split; deterministic per seed."""
    if not 0.0 <= test_fraction < 1.0:
        raise ConfigError("test_fraction must be in [0, 1)")
    rng = make_rng(seed)
    labels = ds.labels
    class_ids = np.unique(labels)
    counts = {c: int(np.sum(labels == c)) for c in class_ids}
    for c, cnt in counts.items():
        if cnt < 2:
            raise SplitError(f"class {c} has a single sample; cannot split")
    target_total = int(round(test_fraction * ds.n))
    base = {c: int(round(test_fraction * cnt)) for c, cnt in counts.items()}
    # nudge per-class counts so the total matches the global fraction
    diff = target_total - sum(base.values())
    frac_part = sorted(class_ids,
                       key=lambda c: test_fraction * counts[c] - base[c],
                       reverse=diff > 0)
    i = 0
    while diff != 0 and i < len(frac_part):
        c = frac_part[i]
        step = 1 if diff > 0 else -1
        if 0 <= base[c] + step <= counts[c]:
            base[c] += step
            diff -= step
        i += 1
    test_idx = []
    for c in class_ids:
        members = np.flatnonzero(labels == c)
        perm = rng.permutation(members.size)
        test_idx.extend(members[perm[:base[c]]].tolist())
    test_mask = np.zeros(ds.n, dtype=bool)
    test_mask[test_idx] = True
    train = Dataset(ds.features[~test_mask], labels[~test_mask],
                    ds.feature_names, ds.class_names)
    test = Dataset(ds.features[test_mask], labels[test_mask],
                   ds.feature_names, ds.class_names)
    return train, test


# ---------------------------------------------------------------------------
# MNIST (IDX binary format)
# ---------------------------------------------------------------------------

_IDX_IMAGES_MAGIC = 0x00000803
_IDX_LABELS_MAGIC = 0x00000801


def _idx_open(path: str):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_idx_images(path: str) -> np.ndarray:
    with _idx_open(path) as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise ParseError(f"{path}: truncated IDX header")
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != _IDX_IMAGES_MAGIC:
            raise ParseError(f"{path}: bad image magic 0x{magic:08x}")
        buf = fh.read(count * rows * cols)
        if len(buf) != count * rows * cols:
            raise ParseError(f"{path}: truncated image data")
        return np.frombuffer(buf, dtype=np.uint8).reshape(count, rows * cols).astype(float)


def _read_idx_labels(path: str) -> np.ndarray:
    with _idx_open(path) as fh:
        header = fh.read(8)
        if len(header) != 8:
            raise ParseError(f"{path}: truncated IDX header")
        magic, count = struct.unpack(">II", header)
        if magic != _IDX_LABELS_MAGIC:
            raise ParseError(f"{path}: bad label magic 0x{magic:08x}")
        buf = fh.read(count)
        if len(buf) != count:
            raise ParseError(f"{path}: truncated label data")
        return np.frombuffer(buf, dtype=np.uint8).astype(int)


def load_mnist(directory: str):
    """Load the standard four IDX files (optionally gzipped) from a directory."""
    def find(stem):
        for name in (stem, stem + ".gz"):
            p = os.path.join(directory, name)
            if os.path.exists(p):
                return p
        raise ParseError(f"missing MNIST file {stem} in {directory}")

    train = Dataset(_read_idx_images(find("train-images-idx3-ubyte")),
                    _read_idx_labels(find("train-labels-idx1-ubyte")))
    test = Dataset(_read_idx_images(find("t10k-images-idx3-ubyte")),
                   _read_idx_labels(find("t10k-labels-idx1-ubyte")))
    return train, test


# ---------------------------------------------------------------------------
# Bundled tabular benchmarks (shipped with scikit-learn, loaded offline)
# ---------------------------------------------------------------------------

def load_builtin(name: str) -> Dataset:
    """Iris, Wine, Breast Cancer and 8x8 Digits from the local sklearn copies."""
    from sklearn import datasets as skd
    loaders = {"iris": skd.load_iris, "wine": skd.load_wine,
               "breast_cancer": skd.load_breast_cancer, "digits": skd.load_digits}
    if name not in loaders:
        raise ConfigError(f"unknown builtin dataset {name!r}")
    bunch = loaders[name]()
    target_names = [str(t) for t in getattr(bunch, "target_names", [])]
    feature_names = [str(f) for f in getattr(bunch, "feature_names", [])]
    return Dataset(np.asarray(bunch.data, dtype=float),
                   np.asarray(bunch.target, dtype=int),
                   feature_names, target_names)
