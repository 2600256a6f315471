"""Command-line front end.

Exit status is 0 on success, 2 for usage errors (bad flags, invalid
parameters, missing inputs) and 1 for runtime failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bounds as B
from .corrupt import PATTERNS, CorruptionSpec, audit_budget, inject
from .distances import DistanceMatrix
from .estimate import distance_matrix
from .evaluate import rf_distance, splits
from .exceptions import LatentTreeError, ParameterError
from .experiment import ExperimentConfig, run_experiment
from .io import read_data, read_json, write_data, write_json
from .model import GroundTruthModel, make_homogeneous_params, sample
from .reconstruct import LEARNERS, RgConfig
from .tree import ARCHETYPES, LatentTree, build_archetype

ALGO_ALIASES = {"rg": "rg", "rrg": "rg", "nj": "nj", "rnj": "nj", "snj": "snj", "rsnj": "snj",
                "clrg": "clrg", "rclrg": "clrg"}
# the r-prefixed names estimate distances robustly unless --plain is given
ROBUST_ALGOS = {"rrg", "rnj", "rsnj", "rclrg"}


class UsageError(Exception):
    pass


def even_n1(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"n1 must be an integer, got {text!r}")
    if v < 0 or v % 2:
        raise argparse.ArgumentTypeError(f"n1 must be an even non-negative integer (got {v}): the budget is n1/2 per column")
    return v


def _need(*paths):
    for p in paths:
        if p is not None and not Path(p).exists():
            raise UsageError(f"input file not found: {p}")


def _load_tree(path) -> LatentTree:
    doc = read_json(path)
    if "tree" in doc:
        doc = doc["tree"]
    return LatentTree.from_dict(doc)


def _load_distances(path) -> DistanceMatrix:
    if str(path).endswith(".json"):
        return DistanceMatrix.from_dict(read_json(path))
    return DistanceMatrix.from_text(Path(path).read_text())


def cmd_generate(a):
    tree = build_archetype(a.archetype, diameter=a.diameter, m=a.m, d_max=a.d_max)
    model = GroundTruthModel(tree, make_homogeneous_params(a.l_max, a.rho_edge, a.alpha), tree.root)
    write_json(a.model_out, model.to_dict())
    if a.data_out:
        X = sample(model, a.n, seed=a.seed)
        write_data(a.data_out, X, model.observed, a.l_max)


def cmd_corrupt(a):
    _need(a.data, a.model, a.alt_model)
    model = GroundTruthModel.from_dict(read_json(a.model)) if a.model else None
    l_max = a.l_max or (model.params.l_max if model else None)
    X, labels, l_max = read_data(a.data, l_max)
    alt = GroundTruthModel.from_dict(read_json(a.alt_model)) if a.alt_model else None
    spec = CorruptionSpec(a.pattern, a.n1, a.amplitude, alt, a.seed)
    Y = inject(X, spec, l_max=l_max, model=model)
    write_data(a.out, Y, labels, l_max)
    if a.audit:
        audit = audit_budget(X, Y)
        audit.pop("rows")
        audit.update(pattern=a.pattern, n1=a.n1, budget_per_column=a.n1 // 2)
        write_json(a.audit, audit)


def cmd_learn(a):
    if (a.distances is None) == (a.data is None):
        raise UsageError("give exactly one of --distances or --data")
    _need(a.distances, a.data)
    name = ALGO_ALIASES[a.algo]
    l_max = a.l_max or 1
    if a.distances:
        D = _load_distances(a.distances)
    else:
        X, labels, l_max = read_data(a.data, a.l_max)
        robust = a.robust if a.robust is not None else a.algo in ROBUST_ALGOS
        n1 = a.n1 if robust else 0
        D = distance_matrix(X, n1=n1, l_max=l_max, labels=labels)
        if a.distances_out:
            write_json(a.distances_out, D.to_dict())
    if name in ("rg", "clrg"):
        learned = LEARNERS[name](D, RgConfig(a.epsilon, a.tau, a.max_iterations), l_max=l_max)
    else:
        learned = LEARNERS[name](D)
    write_json(a.out, learned.to_dict())
    if learned.is_binary:
        nwk = a.newick or str(Path(a.out).with_suffix(".nwk"))
        Path(nwk).write_text(learned.to_newick() + "\n")


def cmd_eval(a):
    _need(a.tree, a.truth)
    learned = _load_tree(a.tree)
    truth = _load_tree(a.truth)
    rf = rf_distance(learned, truth)
    out = {"rf": rf, "exact": rf == 0, "learned_splits": len(splits(learned)), "true_splits": len(splits(truth))}
    if a.out:
        write_json(a.out, out)
    else:
        print(json.dumps(out, sort_keys=True))


def cmd_experiment(a):
    _need(a.config)
    doc = read_json(a.config)
    if os.environ.get("EXPERIMENT_SEED"):
        try:
            doc["base_seed"] = int(os.environ["EXPERIMENT_SEED"])
        except ValueError:
            raise UsageError("EXPERIMENT_SEED must be an integer")
    cfg = ExperimentConfig.from_dict(doc)
    outputs = dict(cfg.outputs)
    csv_path = a.csv or outputs.get("csv")
    summary_path = a.summary or outputs.get("summary")
    if not csv_path:
        raise UsageError("no CSV output: pass --csv or set outputs.csv in the config")
    report = run_experiment(cfg, jobs=a.jobs)
    Path(csv_path).write_text(report.to_csv())
    if summary_path:
        summary = report.summary()
        summary["config"] = cfg.to_dict()
        write_json(summary_path, summary)


_EXTRA_KEYS = ("delta", "x", "layer")


def cmd_bounds(a):
    _need(a.params)
    doc = dict(read_json(a.params)) if a.params else {}
    for item in a.set or []:
        key, _, value = item.partition("=")
        if not _:
            raise UsageError(f"--set expects key=value, got {item!r}")
        doc[key] = float(value) if any(ch in value for ch in ".eE") else int(value)
    extras = {k: doc.pop(k) for k in _EXTRA_KEYS if k in doc}
    p = B.BoundParams.from_dict(doc)
    out = {"params": p.to_dict(), "sample_complexity": {}}
    for alg in ([a.algorithm] if a.algorithm else B.ALGORITHMS):
        try:
            out["sample_complexity"][alg] = B.sample_complexity(alg, p)
        except ParameterError as exc:
            if a.algorithm:
                raise
            out["sample_complexity"][alg] = {"skipped": str(exc)}
    if p.V_obs and p.rho_min and p.rho_max and p.V_obs >= 2:
        out["snj_gap_g"] = B.snj_gap_g(p.V_obs, p.rho_min, p.rho_max)
    if "delta" in extras and p.V_obs and p.rho_max and p.l_max:
        out["fano_lower_bound"] = B.fano_lower_bound(p.V_obs, p.rho_max, p.l_max, float(extras["delta"]))
    if "x" in extras:
        x = float(extras["x"])
        out["tail_f"] = B.tail_f(x, p)
        if "layer" in extras:
            out["tail_h"] = B.tail_h(x, int(extras["layer"]), p)
    write_json(a.out, out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="latenttree", description="Robust latent tree structure learning.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build an archetype model and sample data")
    g.add_argument("--archetype", choices=ARCHETYPES, required=True)
    g.add_argument("--diameter", type=int)
    g.add_argument("--m", type=int, default=3)
    g.add_argument("--d-max", type=int)
    g.add_argument("--l-max", type=int, default=1)
    g.add_argument("--rho-edge", type=float, default=0.24)
    g.add_argument("--alpha", type=float, default=1.0)
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--model-out", required=True)
    g.add_argument("--data-out", help=".csv for text, anything else for binary")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("corrupt", help="inject corruption into a data file")
    c.add_argument("--data", required=True)
    c.add_argument("--pattern", choices=PATTERNS, required=True)
    c.add_argument("--n1", type=even_n1, required=True)
    c.add_argument("--amplitude", type=float, default=60.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--model", help="clean model JSON (needed for model-based patterns)")
    c.add_argument("--alt-model")
    c.add_argument("--l-max", type=int)
    c.add_argument("--out", required=True)
    c.add_argument("--audit", help="write the budget audit JSON here")
    c.set_defaults(func=cmd_corrupt)

    lrn = sub.add_parser("learn", help="learn a tree from distances or data")
    lrn.add_argument("--algo", choices=sorted(ALGO_ALIASES), required=True)
    lrn.add_argument("--distances", help="DistanceMatrix JSON or whitespace text matrix")
    lrn.add_argument("--data")
    lrn.add_argument("--n1", type=even_n1, default=0)
    lrn.add_argument("--l-max", type=int, help="per-node dimension (CSV headers carry it)")
    grp = lrn.add_mutually_exclusive_group()
    grp.add_argument("--robust", dest="robust", action="store_true", default=None)
    grp.add_argument("--plain", dest="robust", action="store_false")
    lrn.add_argument("--epsilon", type=float)
    lrn.add_argument("--tau", type=float)
    lrn.add_argument("--max-iterations", type=int, default=10_000)
    lrn.add_argument("--out", required=True)
    lrn.add_argument("--newick")
    lrn.add_argument("--distances-out")
    lrn.set_defaults(func=cmd_learn)

    e = sub.add_parser("eval", help="Robinson-Foulds distance between two trees")
    e.add_argument("--tree", required=True, help="learned tree or model JSON")
    e.add_argument("--truth", required=True, help="model or tree JSON")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("experiment", help="run a seeded experiment from a JSON config")
    x.add_argument("--config", required=True)
    x.add_argument("--csv")
    x.add_argument("--summary")
    x.add_argument("--jobs", type=int, default=1)
    x.set_defaults(func=cmd_experiment)

    b = sub.add_parser("bounds", help="evaluate sample-complexity and converse bounds")
    b.add_argument("--params", help="JSON with bound parameters (plus optional delta, x, layer)")
    b.add_argument("--set", action="append", metavar="KEY=VALUE")
    b.add_argument("--algorithm", choices=B.ALGORITHMS)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bounds)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (UsageError, ParameterError) as exc:
        print(f"latenttree {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (LatentTreeError, OSError, ValueError, KeyError) as exc:
        print(f"latenttree {args.command}: failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
