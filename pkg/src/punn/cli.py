"""Command-line experiment runner.

Verbs:
  run           train/evaluate per a YAML config; writes metrics.jsonl etc.
  explain       hierarchical accept/reject trace for one input
  export-grid   dense 2-D grid CSV (x1, x2, h_1..h_k, class) from a model file
  density-demo  fit sigmoid gates to a target probability map on a grid
  ablate        partition-count or harmonics-degree sweep

Exit codes: 0 ok, 2 invalid config/arguments, 3 numeric failure, 1 other error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ConfigError, NumericError, PunnError
from .experiments import ablate, explain_decision, load_config, run_experiment, write_grid_csv


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    records = run_experiment(cfg, args.output)
    for r in records:
        print(json.dumps(r))
    return 0


def _cmd_explain(args) -> int:
    from .model_io import load_model
    from .training import PunnClassifier
    clf, stats, _ = load_model(args.model)
    if not isinstance(clf, PunnClassifier):
        raise ConfigError("explain requires a partition model file")
    x = np.array([float(v) for v in args.input.split(",")])
    if stats is not None and not args.no_standardize:
        x = (x - stats.mean) / stats.std
    trace = explain_decision(clf, x)
    for s in trace["steps"]:
        print(f"gate {s['gate']} (class {s['class']}): accept {s['acceptance']:.6f}"
              f" of mass {s['mass_before']:.6f} -> h={s['h']:.6f},"
              f" remaining {s['mass_after']:.6f}")
    print(f"residual partition h_{len(trace['h'])}: {trace['h'][-1]:.6f}")
    probs = ", ".join(f"P({c})={p:.6f}" for c, p in enumerate(trace["class_probs"]))
    print(probs)
    print(f"prediction: class {trace['prediction']}")
    return 0


def _cmd_export_grid(args) -> int:
    from .model_io import load_model
    from .training import PunnClassifier
    clf, _, _ = load_model(args.model)
    if not isinstance(clf, PunnClassifier):
        raise ConfigError("export-grid requires a partition model file")
    bounds = [[args.x1_min, args.x1_max], [args.x2_min, args.x2_max]]
    write_grid_csv(args.out, clf.model, bounds, args.resolution)
    print(f"wrote {args.resolution ** 2} rows to {args.out}")
    return 0


def _cmd_density_demo(args) -> int:
    from .constructive import convergence_report, probability_map_grid

    def target(pts):
        p1 = 1.0 / (1.0 + np.exp(-args.slope * pts[:, 0]))
        p1 = np.clip(p1, 1e-6, 1.0 - 1e-6)
        return np.stack([p1, 1.0 - p1], axis=1)

    pmap = probability_map_grid([[-1, 1], [-1, 1]],
                                (args.resolution, args.resolution), target)
    widths = [int(w) for w in args.widths.split(",")]
    report = convergence_report(pmap, widths, epochs=args.epochs, seed=args.seed)
    print(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report + "\n")
    return 0


def _cmd_ablate(args) -> int:
    cfg = load_config(args.config)
    values = [int(v) for v in args.values.split(",")]
    rows = ablate(cfg, args.sweep, values)
    for r in rows:
        print(json.dumps(r))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for r in rows:
                fh.write(json.dumps(r) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="punn", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", help="run a config-driven experiment")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="output directory for artifacts")
    r.set_defaults(fn=_cmd_run)

    e = sub.add_parser("explain", help="hierarchical decision trace")
    e.add_argument("model", help="model file")
    e.add_argument("input", help="comma-separated raw feature values")
    e.add_argument("--no-standardize", action="store_true")
    e.set_defaults(fn=_cmd_explain)

    g = sub.add_parser("export-grid", help="export partition values on a grid")
    g.add_argument("model")
    g.add_argument("out")
    g.add_argument("--x1-min", type=float, default=-3.0)
    g.add_argument("--x1-max", type=float, default=3.0)
    g.add_argument("--x2-min", type=float, default=-3.0)
    g.add_argument("--x2-max", type=float, default=3.0)
    g.add_argument("--resolution", type=int, default=200)
    g.set_defaults(fn=_cmd_export_grid)

    d = sub.add_parser("density-demo", help="constructive approximation demo")
    d.add_argument("--widths", default="2,4,8,16")
    d.add_argument("--epochs", type=int, default=2000)
    d.add_argument("--resolution", type=int, default=40)
    d.add_argument("--slope", type=float, default=3.0)
    d.add_argument("--seed", type=int, default=42)
    d.add_argument("--out")
    d.set_defaults(fn=_cmd_density_demo)

    a = sub.add_parser("ablate", help="partitions or harmonics-degree sweep")
    a.add_argument("config")
    a.add_argument("--sweep", choices=["partitions", "degree"], required=True)
    a.add_argument("--values", required=True, help="comma-separated values")
    a.add_argument("--out")
    a.set_defaults(fn=_cmd_ablate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except PunnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
