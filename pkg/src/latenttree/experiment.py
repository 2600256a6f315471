"""Seeded Monte-Carlo comparison of robust and plain learners."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .corrupt import CorruptionSpec, inject
from .estimate import distance_matrix
from .evaluate import error_rate, rf_distance, worst_case_rf
from .exceptions import LatentTreeError, ParameterError
from .model import GroundTruthModel, make_homogeneous_params, sample
from .reconstruct import LEARNERS, RgConfig
from .tree import ARCHETYPES, build_archetype

# The corruption seed of a trial is its sample seed XOR this constant.
CORRUPTION_SEED_MASK = 0x5EED

CSV_FIELDS = ("trial", "algorithm", "robust_flag", "n", "n1", "rf", "exact", "wall_ms")


@dataclass
class ExperimentConfig:
    model: dict
    sample_counts: list
    algorithms: list
    trials: int = 1
    base_seed: int = 0
    corruption: dict | None = None
    n1: int | None = None
    outputs: dict = field(default_factory=dict)
    record_wall_time: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        counts = list(self.sample_counts)
        if not counts or any(b <= a for a, b in zip(counts, counts[1:])):
            raise ParameterError("sample_counts must be a non-empty strictly increasing list")
        if counts[0] < 1:
            raise ParameterError("sample_counts must be positive")
        if self.model.get("archetype") not in ARCHETYPES:
            raise ParameterError(f"model.archetype must be one of {ARCHETYPES}")
        if not self.algorithms:
            raise ParameterError("algorithms must be non-empty")
        for k, a in enumerate(self.algorithms):
            name = a if isinstance(a, str) else a.get("name")
            if name not in LEARNERS:
                raise ParameterError(f"algorithms[{k}]: unknown learner {name!r}; choose from {sorted(LEARNERS)}")
        n1 = self.estimator_n1
        if n1 < 0 or n1 % 2:
            raise ParameterError(f"n1 must be an even non-negative integer, got {n1}")
        if n1 >= counts[0]:
            raise ParameterError(f"n1={n1} must be smaller than every sample count")
        if self.corruption is not None:
            CorruptionSpec.from_dict(self.corruption)

    @property
    def estimator_n1(self) -> int:
        if self.n1 is not None:
            return int(self.n1)
        return int((self.corruption or {}).get("n1", 0))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"model", "sample_counts", "algorithms", "trials", "base_seed", "corruption", "n1",
                 "outputs", "record_wall_time"}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ParameterError("unknown config field(s): " + ", ".join(unknown))
        for key in ("model", "sample_counts", "algorithms"):
            if key not in d:
                raise ParameterError(f"config is missing field '{key}'")
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "model": self.model, "sample_counts": list(self.sample_counts), "algorithms": self.algorithms,
            "trials": self.trials, "base_seed": self.base_seed, "corruption": self.corruption,
            "n1": self.estimator_n1, "outputs": self.outputs, "record_wall_time": self.record_wall_time,
        }


def build_model(spec: dict) -> GroundTruthModel:
    kind = spec["archetype"]
    tree = build_archetype(kind, diameter=spec.get("diameter"), m=spec.get("m", 3), d_max=spec.get("d_max"))
    params = make_homogeneous_params(int(spec.get("l_max", 1)), float(spec.get("rho_edge", 0.24)),
                                     float(spec.get("alpha", 1.0)))
    return GroundTruthModel(tree, params, tree.root)


def _learner(entry):
    if isinstance(entry, str):
        return entry, RgConfig()
    opts = {k: entry[k] for k in ("epsilon", "tau", "max_iterations") if k in entry}
    return entry["name"], RgConfig(**opts)


def _run_learner(name, cfg, D, l_max):
    f = LEARNERS[name]
    if name in ("rg", "clrg"):
        return f(D, cfg, l_max=l_max)
    return f(D)


def run_trial(cfg: ExperimentConfig, t: int) -> list[dict]:
    model = build_model(cfg.model)
    l_max = model.params.l_max
    truth = model.tree
    seed = cfg.base_seed + t
    full = sample(model, cfg.sample_counts[-1], seed=seed)
    n1 = cfg.estimator_n1
    rows = []
    for n in cfg.sample_counts:
        X = full[:n]
        if cfg.corruption:
            spec = dict(cfg.corruption, seed=seed ^ CORRUPTION_SEED_MASK)
            X = inject(X, CorruptionSpec.from_dict(spec), l_max=l_max, model=model)
        for robust in (True, False):
            D = distance_matrix(X, n1=n1 if robust else 0, l_max=l_max, labels=model.observed)
            for entry in cfg.algorithms:
                name, rcfg = _learner(entry)
                start = time.perf_counter()
                failed = False
                try:
                    learned = _run_learner(name, rcfg, D, l_max)
                    failed = learned.provenance.get("failure") == "max_iterations"
                    rf = worst_case_rf(truth) if failed else rf_distance(learned.tree, truth)
                except LatentTreeError:
                    failed, rf = True, worst_case_rf(truth)
                wall = (time.perf_counter() - start) * 1000 if cfg.record_wall_time else 0.0
                rows.append({"trial": t, "algorithm": name, "robust_flag": int(robust), "n": n,
                             "n1": n1 if robust else 0, "rf": int(rf), "exact": int(rf == 0),
                             "wall_ms": round(wall, 3), "failed": failed})
    return rows


@dataclass
class Report:
    rows: list
    aggregates: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow(r)
        return buf.getvalue()

    def summary(self) -> dict:
        return {"aggregates": self.aggregates, "rows": len(self.rows),
                "failed_rows": sum(1 for r in self.rows if r.get("failed"))}


def aggregate(rows) -> list[dict]:
    """Mean, population standard deviation and std/mean of RF per cell."""
    cells: dict = {}
    for r in rows:
        cells.setdefault((r["algorithm"], r["robust_flag"], r["n"]), []).append(r)
    out = []
    for (alg, robust, n), rs in sorted(cells.items(), key=lambda kv: (kv[0][0], -kv[0][1], kv[0][2])):
        rf = np.array([r["rf"] for r in rs], dtype=float)
        mean = float(rf.mean())
        std = float(rf.std())
        out.append({"algorithm": alg, "robust_flag": robust, "n": n, "trials": len(rs),
                    "mean_rf": mean, "std_rf": std, "std_over_mean": std / mean if mean > 0 else None,
                    "error_rate": error_rate(rs)})
    return out


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    """Run every trial; rows come back in trial order whatever ``jobs`` is."""
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            per_trial = list(ex.map(run_trial, [cfg] * cfg.trials, range(cfg.trials)))
    else:
        per_trial = [run_trial(cfg, t) for t in range(cfg.trials)]
    rows = [r for rs in per_trial for r in rs]
    return Report(rows, aggregate(rows))


def mean_rf(report: Report, algorithm: str, robust: bool, n: int) -> float:
    for a in report.aggregates:
        if a["algorithm"] == algorithm and a["robust_flag"] == int(robust) and a["n"] == n:
            return a["mean_rf"]
    return math.nan
