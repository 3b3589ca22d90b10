import gzip
import struct

import numpy as np
import pytest

from punn.data import (Dataset, load_builtin, load_csv, load_mnist,
                       make_synthetic, save_csv, standardize, stratified_split)
from punn.errors import ConfigError, ParseError, SplitError


# ---------------------------------------------------------------------------
# Synthetic generators
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind,classes", [("moons", 2), ("circles", 2),
                                          ("xor", 2), ("helix", 2), ("rings", 3)])
def test_synthetic_shapes_and_balance(kind, classes):
    ds = make_synthetic(kind, n=300, noise=0.1, seed=7)
    assert ds.features.shape == (300, 2)
    assert ds.labels.shape == (300,)
    assert ds.classes == classes
    counts = np.bincount(ds.labels, minlength=classes)
    assert counts.max() - counts.min() <= 1


def test_synthetic_determinism():
    a = make_synthetic("moons", n=100, seed=3)
    b = make_synthetic("moons", n=100, seed=3)
    c = make_synthetic("moons", n=100, seed=4)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    assert not np.array_equal(a.features, c.features)


def test_xor_clusters_noise_free():
    ds = make_synthetic("xor", n=8, noise=0.0, seed=0)
    # opposite-quadrant clusters share a label
    for x, y in zip(ds.features, ds.labels):
        assert y == (0 if x[0] * x[1] > 0 else 1)


def test_rings_radii_noise_free():
    ds = make_synthetic("rings", n=300, noise=0.0, seed=0)
    r = np.linalg.norm(ds.features, axis=1)
    for c in range(3):
        rc = r[ds.labels == c]
        assert np.all(rc >= c - 1e-12)
        assert np.all(rc <= c + 0.6 + 1e-12)


def test_synthetic_rejects_bad_args():
    with pytest.raises(ConfigError):
        make_synthetic("nope")
    with pytest.raises(ConfigError):
        make_synthetic("moons", n=1)
    with pytest.raises(ConfigError):
        make_synthetic("moons", noise=-0.1)


# ---------------------------------------------------------------------------
# CSV round trip and errors
# ---------------------------------------------------------------------------

def test_csv_round_trip(tmp_path):
    ds = make_synthetic("moons", n=50, seed=1)
    path = tmp_path / "moons.csv"
    save_csv(ds, str(path))
    back = load_csv(str(path))
    assert np.array_equal(back.features, ds.features)  # repr floats: bitwise
    # label codes follow first appearance; the names round-trip
    names = np.array([back.class_names[c] for c in back.labels])
    assert np.array_equal(names, ds.labels.astype(str))


def test_csv_string_labels_first_appearance(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("1.0,2.0,cat\n3.0,4.0,dog\n5.0,6.0,cat\n")
    ds = load_csv(str(path))
    assert ds.class_names == ["cat", "dog"]
    assert ds.labels.tolist() == [0, 1, 0]


def test_csv_header_and_named_label_column(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a,b,label\n1,2,0\n3,4,1\n")
    ds = load_csv(str(path), label_column="label", header=True)
    assert ds.feature_names == ["a", "b"]
    assert ds.features.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_csv_errors(tmp_path):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2,0\n1,2\n")
    with pytest.raises(ParseError, match="ragged row 1"):
        load_csv(str(ragged))
    bad = tmp_path / "bad.csv"
    bad.write_text("1,x,0\n")
    with pytest.raises(ParseError, match="row 0, column 1"):
        load_csv(str(bad))
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ParseError):
        load_csv(str(empty))


# ---------------------------------------------------------------------------
# Standardization and splits
# ---------------------------------------------------------------------------

def test_standardize_population_std():
    train = Dataset(np.array([[0.0, 5.0], [2.0, 5.0], [4.0, 5.0]]), [0, 1, 0])
    out, _, stats = standardize(train)
    assert np.allclose(stats.mean, [2.0, 5.0])
    assert np.allclose(stats.std, [np.sqrt(8.0 / 3.0), 1.0])  # zero-var -> 1
    assert np.allclose(out.features.mean(axis=0), 0.0, atol=1e-15)
    assert np.allclose(out.features[:, 1], 0.0)


def test_standardize_stats_fit_on_train_only():
    train = Dataset(np.array([[0.0], [2.0]]), [0, 1])
    other = Dataset(np.array([[100.0]]), [0])
    _, [other_s], _ = standardize(train, [other])
    assert other_s.features[0, 0] == pytest.approx((100.0 - 1.0) / 1.0)


def test_stratified_split_counts_and_disjointness():
    ds = make_synthetic("rings", n=300, seed=2)
    train, test = stratified_split(ds, 0.25, seed=5)
    assert train.n + test.n == ds.n
    assert test.n == 75
    for c in range(3):
        frac = np.sum(test.labels == c) / np.sum(ds.labels == c)
        assert abs(frac - 0.25) < 0.02
    # disjoint: every original row appears exactly once across the two halves
    allrows = np.concatenate([train.features, test.features])
    assert np.array_equal(np.sort(allrows, axis=0), np.sort(ds.features, axis=0))


def test_stratified_split_determinism_and_errors():
    ds = make_synthetic("moons", n=100, seed=0)
    a1, _ = stratified_split(ds, 0.2, seed=9)
    a2, _ = stratified_split(ds, 0.2, seed=9)
    assert np.array_equal(a1.features, a2.features)
    with pytest.raises(ConfigError):
        stratified_split(ds, 1.0)
    singleton = Dataset(np.zeros((3, 2)), [0, 0, 1])
    with pytest.raises(SplitError):
        stratified_split(singleton, 0.5)


# ---------------------------------------------------------------------------
# MNIST IDX parsing
# ---------------------------------------------------------------------------

def _write_idx(tmp_path, images, labels, gz=False):
    n, rows, cols = images.shape
    img = struct.pack(">IIII", 0x803, n, rows, cols) + images.astype(np.uint8).tobytes()
    lab = struct.pack(">II", 0x801, n) + labels.astype(np.uint8).tobytes()
    opener = gzip.open if gz else open
    suffix = ".gz" if gz else ""
    for stem, blob in [("train-images-idx3-ubyte", img),
                       ("train-labels-idx1-ubyte", lab),
                       ("t10k-images-idx3-ubyte", img),
                       ("t10k-labels-idx1-ubyte", lab)]:
        with opener(str(tmp_path / (stem + suffix)), "wb") as fh:
            fh.write(blob)


@pytest.mark.parametrize("gz", [False, True])
def test_mnist_idx_round_trip(tmp_path, gz):
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(5, 4, 3), dtype=np.uint8)
    labels = np.array([0, 1, 2, 9, 5], dtype=np.uint8)
    _write_idx(tmp_path, images, labels, gz=gz)
    train, test = load_mnist(str(tmp_path))
    assert train.features.shape == (5, 12)
    assert np.array_equal(train.features, images.reshape(5, 12).astype(float))
    assert np.array_equal(train.labels, labels)
    assert np.array_equal(test.labels, labels)


def test_mnist_idx_errors(tmp_path):
    images = np.zeros((2, 2, 2), dtype=np.uint8)
    labels = np.zeros(2, dtype=np.uint8)
    _write_idx(tmp_path, images, labels)
    # corrupt the magic of the train images file
    p = tmp_path / "train-images-idx3-ubyte"
    blob = bytearray(p.read_bytes())
    blob[3] = 0x99
    p.write_bytes(bytes(blob))
    with pytest.raises(ParseError, match="magic"):
        load_mnist(str(tmp_path))
    # truncation
    p.write_bytes(struct.pack(">IIII", 0x803, 2, 2, 2) + b"\x00")
    with pytest.raises(ParseError, match="truncated"):
        load_mnist(str(tmp_path))
    with pytest.raises(ParseError, match="missing"):
        load_mnist(str(tmp_path / "nowhere"))


# ---------------------------------------------------------------------------
# Bundled tabular benchmarks
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name,n,d,c", [("iris", 150, 4, 3), ("wine", 178, 13, 3),
                                        ("breast_cancer", 569, 30, 2)])
def test_builtin_datasets(name, n, d, c):
    ds = load_builtin(name)
    assert (ds.n, ds.dim, ds.classes) == (n, d, c)


def test_builtin_unknown():
    with pytest.raises(ConfigError):
        load_builtin("titanic")
