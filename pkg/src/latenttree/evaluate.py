"""Robinson-Foulds distance and recovery error rates."""

from __future__ import annotations

from .exceptions import ParameterError
from .tree import LatentTree


def splits(tree: LatentTree) -> set[frozenset]:
    """Nontrivial bipartitions of the observed labels induced by the edges.

    Each split is stored as the side without the smallest observed label, so
    edges incident to degree-2 hidden nodes collapse onto the same split.
    """
    obs = frozenset(tree.observed)
    if len(obs) < 4:
        return set()
    anchor = min(obs)
    parent, order = tree.rooted(anchor)
    below = {}
    for v in reversed(order):
        s = {v} if v in obs else set()
        for w in tree.neighbors(v):
            if parent.get(w) == v:
                s |= below[w]
        below[v] = s
    out = set()
    for v in order[1:]:
        side = below[v]
        if 2 <= len(side) <= len(obs) - 2:
            out.add(frozenset(side))
    return out


def rf_distance(t1: LatentTree, t2: LatentTree) -> int:
    """Symmetric difference of observed splits; not halved."""
    if t1.observed != t2.observed:
        only1 = sorted(t1.observed - t2.observed)
        only2 = sorted(t2.observed - t1.observed)
        raise ParameterError(f"observed labels differ: only in first {only1}, only in second {only2}")
    return len(splits(t1) ^ splits(t2))


def worst_case_rf(truth: LatentTree) -> int:
    """Score given to a failed run: every true split missed plus a full binary tree of wrong ones."""
    return len(splits(truth)) + max(len(truth.observed) - 3, 0)


def error_rate(rows) -> float:
    """Fraction of rows with a nonzero RF distance.

    ``rows`` holds RF values or mappings with an ``"rf"`` entry.
    """
    rows = list(rows)
    if not rows:
        raise ParameterError("error_rate needs at least one row")
    vals = [r["rf"] if isinstance(r, dict) else r for r in rows]
    return sum(1 for v in vals if v > 0) / len(vals)
