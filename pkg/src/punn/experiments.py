"""Config-driven experiments: build datasets and models, train, export results.

A config is a nested mapping (YAML on disk) with sections:

  name:    label used in result records (optional)
  dataset: {kind: moons|circles|xor|helix|rings, n, noise, seed?}
           | {builtin: iris|wine|breast_cancer|digits}
           | {path: file.csv, label_column, header}
           | {mnist_dir: DIR, train_subset?}
  model:   {type: mlp, hidden: [...]}
           | {type: punn, gate: mlp|radial|ellipsoid|shell|fourier_shell|
              harmonic_shell, activation, hidden, partitions?, pi?, degree?,
              fourier_terms?, init?: {strategy, radius_scale, sharpness}}
  train:   {epochs, batch_size, lr, eps, shuffle}
  test_fraction: 0.2
  seeds:   [42, ...]
  export:  {grid: {bounds: [[lo,hi],[lo,hi]], resolution}, model: bool}

Unless dataset.seed is given, the run seed drives dataset generation, the
split, model initialization and batch order, so one seed fixes the whole run.
"""
from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .baseline import SoftmaxMlp
from .data import (Dataset, load_builtin, load_csv, load_mnist, make_synthetic,
                   standardize, stratified_split)
from .errors import ConfigError, ShapeError
from .gates import (ellipsoid_gate, fourier_shell_gate, harmonic_shell_gate,
                    mlp_gate, radial_gate, shell_gate, ACTIVATIONS,
                    PARAMETERIZATIONS)
from .numeric import INIT_STREAM, make_rng
from .partition import PartitionModel
from .training import PunnClassifier, TrainConfig, train

GATE_KINDS = PARAMETERIZATIONS


def load_config(path: str) -> dict:
    import yaml
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return doc


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def validate_config(cfg: dict) -> dict:
    """Field-level validation; returns the config with defaults filled in."""
    cfg = dict(cfg)
    errors = []
    ds = cfg.get("dataset")
    if not isinstance(ds, dict):
        errors.append("dataset: section missing or not a mapping")
        ds = {}
    if not any(key in ds for key in ("kind", "builtin", "path", "mnist_dir")):
        errors.append("dataset: needs one of kind/builtin/path/mnist_dir")
    if "path" in ds and not os.path.exists(ds["path"]):
        errors.append(f"dataset.path: file not found: {ds['path']}")
    if "mnist_dir" in ds and not os.path.isdir(ds["mnist_dir"]):
        errors.append(f"dataset.mnist_dir: directory not found: {ds['mnist_dir']}")

    m = cfg.get("model")
    if not isinstance(m, dict):
        errors.append("model: section missing or not a mapping")
        m = {}
    mtype = m.get("type", "punn")
    if mtype not in ("punn", "mlp"):
        errors.append(f"model.type: must be punn or mlp, got {mtype!r}")
    if mtype == "punn":
        if m.get("gate", "mlp") not in GATE_KINDS:
            errors.append(f"model.gate: unknown parameterization {m.get('gate')!r}")
        if m.get("activation", "sigmoid") not in ACTIVATIONS:
            errors.append(f"model.activation: unknown activation {m.get('activation')!r}")

    tr = cfg.setdefault("train", {})
    if not isinstance(tr, dict):
        errors.append("train: must be a mapping")
        tr = {}
    if tr.get("epochs", 200) < 1:
        errors.append("train.epochs: must be >= 1")
    if tr.get("lr", 0.01) <= 0:
        errors.append("train.lr: must be positive")
    if tr.get("batch_size", 64) < 1:
        errors.append("train.batch_size: must be >= 1")

    seeds = cfg.setdefault("seeds", [42])
    if not isinstance(seeds, list) or not seeds:
        errors.append("seeds: must be a non-empty list")
    frac = cfg.setdefault("test_fraction", 0.2)
    if not 0.0 <= frac < 1.0:
        errors.append("test_fraction: must be in [0, 1)")
    if errors:
        raise ConfigError("invalid config:\n  " + "\n  ".join(errors))
    return cfg


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_dataset(cfg: dict, seed: int):
    """Materialize (train, test, stats) for one run seed."""
    ds = cfg["dataset"]
    frac = cfg.get("test_fraction", 0.2)
    data_seed = ds.get("seed", seed)
    if "kind" in ds:
        full = make_synthetic(ds["kind"], ds.get("n", 1000),
                              ds.get("noise", 0.1), data_seed)
        label = ds["kind"]
    elif "builtin" in ds:
        full = load_builtin(ds["builtin"])
        label = ds["builtin"]
    elif "path" in ds:
        full = load_csv(ds["path"], ds.get("label_column", -1),
                        ds.get("header", False))
        label = os.path.basename(ds["path"])
    elif "mnist_dir" in ds:
        train_ds, test_ds = load_mnist(ds["mnist_dir"])
        subset = ds.get("train_subset")
        if subset:
            train_ds = Dataset(train_ds.features[:subset], train_ds.labels[:subset])
        train_ds, (test_ds,), stats = standardize(train_ds, [test_ds])
        return train_ds, test_ds, stats, "mnist"
    else:
        raise ConfigError("dataset: nothing to load")
    train_ds, test_ds = stratified_split(full, frac, data_seed)
    train_ds, (test_ds,), stats = standardize(train_ds, [test_ds])
    return train_ds, test_ds, stats, label


def default_pi(partitions: int, classes: int) -> np.ndarray:
    return np.arange(partitions) % classes


def _class_anchor(x: np.ndarray, strategy: str, rng) -> np.ndarray:
    if strategy == "class_point":
        return x[rng.integers(x.shape[0])] + 0.05 * rng.normal(size=x.shape[1])
    return x.mean(axis=0)


def _shape_gate(kind: str, activation: str, cls_pts: np.ndarray,
                all_pts: np.ndarray, init: dict, rng, meta: dict):
    strategy = init.get("strategy", "class_mean")
    radius_scale = init.get("radius_scale", 1.0)
    sharpness = init.get("sharpness", 4.0)
    d = all_pts.shape[1]
    if kind == "radial":
        c = _class_anchor(cls_pts, strategy, rng)
        r = radius_scale * float(np.sqrt(np.mean(np.sum((cls_pts - c) ** 2, axis=1))))
        return radial_gate(c, max(r, 0.05), sharpness)
    if kind == "ellipsoid":
        c = _class_anchor(cls_pts, strategy, rng)
        var = cls_pts.var(axis=0) + 1e-3
        return ellipsoid_gate(c, 1.0 / (2.0 * radius_scale ** 2 * var), sharpness, 0.0)
    if kind == "shell":
        c = all_pts.mean(axis=0)  # shells share the global center
        dist = np.linalg.norm(cls_pts - c, axis=1)
        r1 = max(float(np.quantile(dist, 0.1)) - 0.1, 0.002)
        r2 = float(np.quantile(dist, 0.9)) + 0.1
        return shell_gate(c, r1, max(r2, r1 + 0.05),
                          init.get("sharpness", 1.0), activation)
    if kind == "fourier_shell":
        c = _class_anchor(cls_pts, strategy, rng)
        dist = np.linalg.norm(cls_pts - c, axis=1)
        coeffs = np.zeros(2 * meta.get("fourier_terms", 5) + 1)
        coeffs[0] = radius_scale * (float(np.quantile(dist, 0.9)) + 0.1)
        return fourier_shell_gate(c, 0.01, coeffs, init.get("sharpness", 1.0),
                                  meta.get("include_inner", True), activation)
    if kind == "harmonic_shell":
        c = _class_anchor(cls_pts, strategy, rng)
        r = radius_scale * 1.5 * float(
            np.sqrt(np.mean(np.sum((cls_pts - c) ** 2, axis=1))))
        return harmonic_shell_gate(c, meta.get("degree", 0), radius=max(r, 0.05),
                                   sharpness=sharpness, activation=activation)
    raise ConfigError(f"unknown gate parameterization {kind!r}")


def build_model(mcfg: dict, train_ds: Dataset, seed: int):
    """Instantiate a classifier for a standardized training set."""
    rng = make_rng(seed, INIT_STREAM)
    classes = train_ds.classes
    d = train_ds.dim
    if mcfg.get("type", "punn") == "mlp":
        return SoftmaxMlp(d, mcfg.get("hidden", [32, 32]), classes, rng)
    k = mcfg.get("partitions", classes)
    if k < classes:
        raise ConfigError(f"model.partitions: k={k} < classes={classes}")
    pi = np.asarray(mcfg["pi"], dtype=int) if "pi" in mcfg else default_pi(k, classes)
    kind = mcfg.get("gate", "mlp")
    activation = mcfg.get("activation", "sigmoid")
    init = mcfg.get("init", {})
    meta = {"degree": mcfg.get("degree", 0),
            "fourier_terms": mcfg.get("fourier_terms", 5),
            "include_inner": mcfg.get("include_inner", True)}
    gates = []
    for i in range(k - 1):
        if kind == "mlp":
            gates.append(mlp_gate(d, mcfg.get("hidden", [32, 32]), activation, rng))
        else:
            cls_pts = train_ds.features[train_ds.labels == pi[i]]
            if cls_pts.shape[0] == 0:
                raise ConfigError(f"model.pi: class {pi[i]} absent from training data")
            gates.append(_shape_gate(kind, activation, cls_pts,
                                     train_ds.features, init, rng, meta))
    return PunnClassifier(PartitionModel(gates, classes, pi))


def model_label(mcfg: dict) -> str:
    if mcfg.get("type", "punn") == "mlp":
        return "mlp"
    kind = mcfg.get("gate", "mlp")
    if kind == "mlp":
        return f"punn-{mcfg.get('activation', 'sigmoid')}"
    return f"punn-{kind}"


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def run_single(cfg: dict, seed: int):
    """One seeded run; returns (classifier, stats, record dict)."""
    train_ds, test_ds, stats, ds_label = build_dataset(cfg, seed)
    clf = build_model(cfg.get("model", {}), train_ds, seed)
    tr = cfg.get("train", {})
    tcfg = TrainConfig(epochs=tr.get("epochs", 200),
                       batch_size=tr.get("batch_size", 64),
                       lr=tr.get("lr", 0.01), seed=seed,
                       eps=tr.get("eps", 1e-10),
                       shuffle=tr.get("shuffle", True))
    clf, metrics = train(clf, train_ds, tcfg, test_ds)
    record = {
        "dataset": ds_label,
        "model": cfg.get("name", model_label(cfg.get("model", {}))),
        "seed": seed,
        "params": metrics.param_count,
        "train_acc": metrics.train_accuracy,
        "test_acc": metrics.test_accuracy,
        "epochs": tcfg.epochs,
        "wall_ms": metrics.wall_seconds * 1000.0,
        "final_loss": metrics.loss_history[-1],
        "config_hash": config_hash(cfg),
    }
    return clf, stats, record


def run_experiment(cfg: dict, output_dir: str | None = None):
    """All seeds of a validated config; optionally write artifacts."""
    cfg = validate_config(cfg)
    records = []
    out = output_dir or cfg.get("output_dir")
    if out:
        os.makedirs(out, exist_ok=True)
    for seed in cfg["seeds"]:
        clf, stats, record = run_single(cfg, seed)
        records.append(record)
        if out:
            export = cfg.get("export", {})
            base = f"{record['dataset']}_{record['model']}_seed{seed}"
            if export.get("model", False):
                from .model_io import save_model
                save_model(os.path.join(out, base + ".model.json"), clf, stats,
                           {"config_hash": record["config_hash"], "seed": seed})
            if "grid" in export:
                gspec = export["grid"]
                if isinstance(clf, PunnClassifier):
                    write_grid_csv(os.path.join(out, base + ".grid.csv"),
                                   clf.model, gspec.get("bounds", [[-3, 3], [-3, 3]]),
                                   gspec.get("resolution", 200))
    if out:
        with open(os.path.join(out, "metrics.jsonl"), "a", encoding="utf-8") as fh:
            for r in records:
                fh.write(json.dumps(r) + "\n")
    return records


def write_grid_csv(path: str, model: PartitionModel, bounds, resolution: int) -> None:
    """Row-major CSV grid: x1, x2, h_1..h_k, predicted class."""
    from .training import grid_eval
    pts, h, classes = grid_eval(model, bounds, resolution)
    k = h.shape[1]
    header = "x1,x2," + ",".join(f"h_{i + 1}" for i in range(k)) + ",class"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row_pt, row_h, c in zip(pts, h, classes):
            fh.write(",".join([repr(float(row_pt[0])), repr(float(row_pt[1]))]
                              + [repr(float(v)) for v in row_h] + [str(int(c))]) + "\n")


# ---------------------------------------------------------------------------
# Hierarchical decision trace
# ---------------------------------------------------------------------------

def explain_decision(clf: PunnClassifier, x: np.ndarray) -> dict:
    """Per-gate acceptance values and the remaining probability mass."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != clf.dim:
        raise ShapeError(f"input dim {x.shape[1]} != model dim {clf.dim}")
    model = clf.model
    from .gates import gate_eval
    steps = []
    mass = 1.0
    h = []
    for i, gate in enumerate(model.gates):
        g, _ = gate_eval(gate, x)
        g = float(g[0])
        h_i = mass * g
        steps.append({"gate": i + 1, "class": int(model.pi[i]), "acceptance": g,
                      "mass_before": mass, "h": h_i,
                      "mass_after": mass * (1.0 - g)})
        h.append(h_i)
        mass *= (1.0 - g)
    h.append(mass)
    probs = np.zeros(model.classes)
    for i, c in enumerate(model.pi):
        probs[c] += h[i]
    return {"steps": steps, "h": h, "class_probs": probs.tolist(),
            "prediction": int(np.argmax(probs))}


# ---------------------------------------------------------------------------
# Ablation sweeps
# ---------------------------------------------------------------------------

def ablate(cfg: dict, sweep: str, values):
    """Partition-count or harmonics-degree sweep over the config's seeds."""
    cfg = validate_config(cfg)
    rows = []
    for v in values:
        variant = json.loads(json.dumps(cfg))  # deep copy
        if sweep == "partitions":
            variant["model"]["partitions"] = int(v)
            variant["model"].pop("pi", None)
        elif sweep == "degree":
            variant["model"]["degree"] = int(v)
        else:
            raise ConfigError(f"unknown sweep {sweep!r} (partitions|degree)")
        records = [run_single(variant, s)[2] for s in variant["seeds"]]
        accs = np.array([r["test_acc"] for r in records])
        rows.append({"sweep": sweep, "value": int(v),
                     "mean_test_acc": float(accs.mean()),
                     "std_test_acc": float(accs.std()),
                     "params": records[0]["params"],
                     "seeds": variant["seeds"]})
    return rows
