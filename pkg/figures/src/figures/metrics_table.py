"""Markdown result tables from metrics JSONL exports."""

from __future__ import annotations

import json
from collections import defaultdict
from collections.abc import Iterable
from statistics import mean, stdev


def _load_records(paths: Iterable[str]) -> list[dict]:
    records = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
    return records


def _cell(accs: list[float]) -> str:
    m = 100.0 * mean(accs)
    if len(accs) > 1:
        return f"{m:.1f} ± {100.0 * stdev(accs):.1f}"
    return f"{m:.1f}"


def render_metrics_table(paths: Iterable[str] | str) -> str:
    """Datasets-by-models markdown table of test accuracy (%), mean ± std.

    Accepts one or more metrics JSONL paths; rows and columns keep first
    appearance order. Raises ValueError when no records are found.
    """
    if isinstance(paths, str):
        paths = [paths]
    records = _load_records(paths)
    if not records:
        raise ValueError("no metrics records found")
    datasets, models = [], []
    accs: dict[tuple[str, str], list[float]] = defaultdict(list)
    for r in records:
        ds, model = str(r["dataset"]), str(r["model"])
        if ds not in datasets:
            datasets.append(ds)
        if model not in models:
            models.append(model)
        accs[(ds, model)].append(float(r["test_acc"]))
    lines = ["| Dataset | " + " | ".join(models) + " |",
             "|---" * (len(models) + 1) + "|"]
    for ds in datasets:
        cells = [_cell(accs[(ds, m)]) if (ds, m) in accs else "—"
                 for m in models]
        lines.append(f"| {ds} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
