"""Corruption injectors for data matrices.

Every pattern corrupts exactly ``n1 / 2`` entries of each column. Entry-wise
patterns draw the corrupted rows independently per column; outlier patterns
draw one row set and overwrite whole rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError, ShapeError
from .model import GroundTruthModel, ModelParams, make_homogeneous_params, sample

ADDITIVE = ("uniform", "constant_magnitude", "gaussian")
REPLACEMENT = ("hmm_model", "double_binary_model")
OUTLIERS = ("gaussian_outliers", "hmm_outliers", "double_binary_outliers")
PATTERNS = ADDITIVE + REPLACEMENT + OUTLIERS
MODEL_PATTERNS = ("hmm_model", "double_binary_model", "hmm_outliers", "double_binary_outliers")

# Offset mixed into the seed used when sampling from the alternate model.
_ALT_STREAM = 0x5A17


@dataclass(frozen=True, eq=False)
class CorruptionSpec:
    pattern: str
    n1: int = 0
    amplitude: float = 60.0
    alt_model: GroundTruthModel | None = None
    seed: int = 0

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ParameterError(f"pattern must be one of {PATTERNS}, got {self.pattern!r}")
        if self.n1 < 0 or self.n1 % 2:
            raise ParameterError(f"n1 must be an even non-negative integer, got {self.n1}")
        if not self.amplitude > 0:
            raise ParameterError("amplitude must be positive")

    def to_dict(self) -> dict:
        out = {"pattern": self.pattern, "n1": self.n1, "amplitude": self.amplitude, "seed": self.seed}
        if self.alt_model is not None:
            out["alt_model"] = self.alt_model.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "CorruptionSpec":
        if "pattern" not in d:
            raise ParameterError("corruption document is missing field 'pattern'")
        alt = GroundTruthModel.from_dict(d["alt_model"]) if d.get("alt_model") else None
        return cls(d["pattern"], int(d.get("n1", 0)), float(d.get("amplitude", 60.0)), alt,
                   int(d.get("seed", 0)))


def default_alt_model(model: GroundTruthModel, scale: float = 1.0) -> GroundTruthModel:
    """Same topology and root, isotropic parameters with twice the edge distance.

    ``scale`` multiplies the standard deviation of every variable; distances
    are unaffected.
    """
    if not scale > 0:
        raise ParameterError("scale must be positive")
    p = model.params
    alt = make_homogeneous_params(p.l_max, 2 * p.edge_distance, p.alpha)
    if scale != 1.0:
        alt = ModelParams(alt.A, alt.sigma_r * scale ** 2, alt.sigma_n * scale ** 2, alt.alpha)
    return GroundTruthModel(model.tree, alt, model.root)


def _column_rng(seed, col):
    return np.random.default_rng([seed, col])


def _check_alt(spec, model, l_max, n_cols):
    alt = spec.alt_model
    if alt is None:
        if model is None:
            raise ParameterError(f"pattern {spec.pattern!r} needs alt_model (or the clean model)")
        alt = default_alt_model(model)
    if model is not None and (alt.tree.edges != model.tree.edges or alt.tree.observed != model.tree.observed):
        raise ShapeError("alt_model must share the topology of the clean model")
    if alt.params.l_max != l_max or len(alt.observed) * l_max != n_cols:
        raise ShapeError(
            f"alt_model yields {len(alt.observed) * alt.params.l_max} columns with l_max={alt.params.l_max}; "
            f"data has {n_cols} columns with l_max={l_max}")
    return alt


def inject(X, spec: CorruptionSpec, l_max: int = 1, model: GroundTruthModel | None = None) -> np.ndarray:
    """Return a corrupted copy of ``X``; the input is left untouched.

    ``model`` is the clean model; it is used to derive the default alternate
    model for model-based patterns and to check topology.
    """
    X = np.asarray(X, dtype=float)
    n, cols = X.shape
    if spec.n1 > n:
        raise ParameterError(f"n1={spec.n1} exceeds n={n}")
    out = X.copy()
    k = spec.n1 // 2
    if k == 0:
        return out
    A = spec.amplitude
    pattern = spec.pattern

    alt_data = None
    if pattern in MODEL_PATTERNS:
        alt = _check_alt(spec, model, l_max, cols)
        alt_rows = n if pattern in REPLACEMENT else k
        alt_data = sample(alt, alt_rows, seed=spec.seed ^ _ALT_STREAM)

    if pattern in OUTLIERS:
        rng = np.random.default_rng(spec.seed)
        rows = np.sort(rng.choice(n, size=k, replace=False))
        if pattern == "gaussian_outliers":
            out[rows] = rng.normal(0.0, A, size=(k, cols))
        else:
            out[rows] = alt_data
        return out

    for c in range(cols):
        rng = _column_rng(spec.seed, c)
        rows = np.sort(rng.choice(n, size=k, replace=False))
        if pattern == "uniform":
            out[rows, c] += rng.uniform(-2 * A, 2 * A, size=k)
        elif pattern == "constant_magnitude":
            out[rows, c] += np.where(rng.random(k) < 0.5, -A, A)
        elif pattern == "gaussian":
            out[rows, c] += rng.normal(0.0, A, size=k)
        else:
            out[rows, c] = alt_data[rows, c]
    return out


def audit_budget(clean, dirty) -> dict:
    """Per-column count of changed entries and the row sets involved."""
    clean = np.asarray(clean)
    dirty = np.asarray(dirty)
    if clean.shape != dirty.shape:
        raise ShapeError(f"shape mismatch: {clean.shape} vs {dirty.shape}")
    changed = clean != dirty
    counts = changed.sum(axis=0)
    row_sets = [np.flatnonzero(changed[:, c]) for c in range(changed.shape[1])]
    same_rows = all(np.array_equal(row_sets[0], r) for r in row_sets) if row_sets else True
    return {
        "per_column": counts.astype(int).tolist(),
        "max": int(counts.max()) if counts.size else 0,
        "identical_row_sets": bool(same_rows),
        "rows": [r.tolist() for r in row_sets],
    }
