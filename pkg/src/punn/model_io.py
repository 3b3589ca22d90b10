"""Versioned JSON model files with a bitwise-exact parameter round trip."""
from __future__ import annotations

import json

import numpy as np

from .baseline import SoftmaxMlp
from .data import StandardizationStats
from .errors import ParseError
from .gates import GateSpec
from .partition import PartitionModel
from .training import PunnClassifier

FORMAT_VERSION = 1


def _gate_doc(g: GateSpec) -> dict:
    return {"activation": g.activation, "kind": g.kind, "dim": g.dim,
            "meta": g.meta, "params": g.params.tolist()}


def save_model(path: str, clf, stats: StandardizationStats | None = None,
               provenance: dict | None = None) -> None:
    """Serialize a PunnClassifier or SoftmaxMlp plus standardization stats."""
    if isinstance(clf, PunnClassifier):
        model = {"type": "punn", "classes": clf.model.classes,
                 "pi": clf.model.pi.tolist(),
                 "gates": [_gate_doc(g) for g in clf.model.gates]}
    elif isinstance(clf, SoftmaxMlp):
        model = {"type": "baseline", "dim": clf.dim,
                 "hidden": list(clf.shape.dims[1:-1]), "classes": clf.classes,
                 "params": clf.params.tolist()}
    else:
        raise TypeError(f"cannot serialize {type(clf).__name__}")
    doc = {"format_version": FORMAT_VERSION, "model": model,
           "standardization": None if stats is None else
           {"mean": stats.mean.tolist(), "std": stats.std.tolist()},
           "provenance": provenance or {}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)


def load_model(path: str):
    """Returns (classifier, StandardizationStats or None, provenance dict)."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: cannot read model file: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ParseError(f"{path}: not a model file")
    if doc["format_version"] != FORMAT_VERSION:
        raise ParseError(
            f"{path}: unsupported format version {doc['format_version']!r} "
            f"(this build reads version {FORMAT_VERSION})")
    try:
        m = doc["model"]
        if m["type"] == "punn":
            gates = [GateSpec(g["activation"], g["kind"], int(g["dim"]),
                              np.asarray(g["params"], dtype=float), dict(g["meta"]))
                     for g in m["gates"]]
            clf = PunnClassifier(PartitionModel(gates, int(m["classes"]),
                                                np.asarray(m["pi"], dtype=int)))
        elif m["type"] == "baseline":
            clf = SoftmaxMlp(int(m["dim"]), list(m["hidden"]), int(m["classes"]))
            clf.set_params(np.asarray(m["params"], dtype=float))
        else:
            raise ParseError(f"{path}: unknown model type {m['type']!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed model file: {exc}") from exc
    stats = None
    if doc.get("standardization") is not None:
        s = doc["standardization"]
        stats = StandardizationStats(np.asarray(s["mean"], dtype=float),
                                     np.asarray(s["std"], dtype=float))
    return clf, stats, doc.get("provenance", {})
