"""Chow-Liu initialisation followed by neighbourhood-wise recursive grouping."""

from __future__ import annotations

from ..distances import DistanceMatrix
from ..exceptions import ParameterError
from ..tree import LatentTree
from .base import DistanceBook, LearnedTree, RgConfig, default_thresholds
from .rg import assemble, recursive_grouping


def mst_edges(D: DistanceMatrix) -> list[tuple[int, int]]:
    """Kruskal's algorithm; ties go to the lexicographically smaller edge."""
    labels = D.labels
    cand = sorted(
        (D.values[a, b], labels[a], labels[b]) if labels[a] < labels[b] else (D.values[a, b], labels[b], labels[a])
        for a in range(len(labels)) for b in range(a + 1, len(labels))
    )
    parent = {v: v for v in labels}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    out = []
    for _, a, b in cand:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
            out.append((a, b))
            if len(out) == len(labels) - 1:
                break
    return out


def mst(D: DistanceMatrix) -> LatentTree:
    """Minimum spanning tree over the nodes of ``D`` (all treated as observed)."""
    if len(D) < 1:
        raise ParameterError("mst needs at least one node")
    return LatentTree(D.labels, frozenset(D.labels), tuple(mst_edges(D)))


def clrg_learn(D: DistanceMatrix, cfg: RgConfig | None = None, l_max: int = 1) -> LearnedTree:
    """Chow-Liu recursive grouping.

    The internal nodes of the minimum spanning tree are visited in increasing
    id order; each closed neighbourhood in the current tree is regrouped and
    spliced back in place of its star.
    """
    if len(D) < 3:
        raise ParameterError("CLRG needs at least three nodes")
    cfg = cfg or RgConfig()
    eps, tau = default_thresholds(D, cfg)
    book = DistanceBook(D, l_max)
    adj = {v: set() for v in D.labels}
    for a, b in mst_edges(D):
        adj[a].add(b)
        adj[b].add(a)
    internal = sorted(v for v in D.labels if len(adj[v]) > 1)
    book.tree_adj = adj
    neighbourhoods = []
    for i in internal:
        nbd = sorted({i} | adj[i])
        book.begin_run(nbd)
        new_edges, prov = recursive_grouping(book, nbd, eps, tau, cfg.max_iterations)
        record = {"center": i, "size": len(nbd), "iterations": prov["iterations"]}
        if prov["failed"]:
            record["failed"] = prov.get("failure", "unknown")
            neighbourhoods.append(record)
            continue
        for x in list(adj[i]):
            adj[i].discard(x)
            adj[x].discard(i)
        for a, b in new_edges:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        neighbourhoods.append(record)
    edges = {(a, b) if a < b else (b, a) for a in adj for b in adj[a]}
    prov = {
        "mst_internal": internal,
        "neighbourhoods": neighbourhoods,
        "max_rg_iterations": max((r["iterations"] for r in neighbourhoods), default=0),
        "failed": any("failed" in r for r in neighbourhoods),
    }
    if any(r.get("failed") == "max_iterations" for r in neighbourhoods):
        prov["failure"] = "max_iterations"
    return assemble(book, D, sorted(edges), "clrg", eps, tau, prov)
