"""Recursive grouping over an active set of nodes."""

from __future__ import annotations

import numpy as np

from ..distances import DistanceMatrix
from ..exceptions import ParameterError
from ..tree import LatentTree
from .base import DistanceBook, LearnedTree, RgConfig, default_thresholds


def phi(d, i, j, k) -> float:
    """``d(i, k) - d(j, k)`` for any distance accessor ``d(a, b)``."""
    return d(i, k) - d(j, k)


def _components(nodes, edges):
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for v in nodes:
        groups.setdefault(find(v), []).append(v)
    return sorted(sorted(g) for g in groups.values())


def _classify(active, M, eps):
    """Parent and sibling verdicts for every pair of the active set."""
    G = len(active)
    parent_cands = []
    siblings = []
    for a in range(G):
        for b in range(a + 1, G):
            ks = [k for k in range(G) if k != a and k != b]
            ph = M[a, ks] - M[b, ks]
            if ph.max() - ph.min() >= eps:
                continue
            dab = M[a, b]
            dev_a = np.max(np.abs(ph - dab))
            dev_b = np.max(np.abs(ph + dab))
            if dev_a < eps and dev_a <= dev_b:
                parent_cands.append((dev_a, active[a], active[b]))
            elif dev_b < eps:
                parent_cands.append((dev_b, active[b], active[a]))
            else:
                siblings.append((active[a], active[b]))
    return parent_cands, siblings


def _child_distances(book, family, active, M, pos, tau):
    """Distances from each member of ``family`` to its new common parent."""
    out = {}
    size = len(family)
    for i in family:
        total = 0.0
        for j in family:
            if j == i:
                continue
            others = [k for k in active if k != i and k != j]
            near = [k for k in others if max(M[pos[i], pos[k]], M[pos[j], pos[k]]) < tau
                    and not (book.saturated(i, k) or book.saturated(j, k))]
            ks = near or others
            total += M[pos[i], pos[j]] + float(np.mean([M[pos[i], pos[k]] - M[pos[j], pos[k]] for k in ks]))
        out[i] = total / (2 * (size - 1))
    return out


def recursive_grouping(book: DistanceBook, active, eps: float, tau: float, max_iterations: int = 10_000):
    """Run recursive grouping from ``active``.

    Returns the list of learned edges and a provenance dict. Hidden nodes are
    allocated through ``book`` and their distances recorded there.
    """
    active = sorted(active)
    edges: list[tuple[int, int]] = []
    prov = {"iterations": 0, "families": [], "conflicts": [], "failed": False}
    while len(active) > 2:
        if prov["iterations"] >= max_iterations:
            prov["failed"] = True
            prov["failure"] = "max_iterations"
            break
        prov["iterations"] += 1
        pos = {v: k for k, v in enumerate(active)}
        M = np.array([[book(a, b) for b in active] for a in active])
        cands, sib_pairs = _classify(active, M, eps)

        parent_of: dict[int, int] = {}
        parents: set[int] = set()
        for dev, child, par in sorted(cands):
            if child in parent_of or child in parents or par in parent_of:
                prov["conflicts"].append([child, par])
                continue
            parent_of[child] = par
            parents.add(par)

        free = [v for v in active if v not in parent_of]
        sib_pairs = [(a, b) for a, b in sib_pairs if a not in parent_of and b not in parent_of]
        families = [g for g in _components(free, sib_pairs) if len(g) > 1]
        if not parent_of and not families:
            prov["failed"] = True
            prov["failure"] = "no_relations"
            break

        for child, par in sorted(parent_of.items()):
            edges.append((par, child))
            prov["families"].append({"parent": par, "children": [child], "kind": "observed_parent"})

        new_nodes = []
        for fam in families:
            dist = _child_distances(book, fam, active, M, pos, tau)
            h = book.new_hidden(fam)
            for c in fam:
                book.set(c, h, dist[c])
                edges.append((h, c))
            new_nodes.append(h)
            prov["families"].append({"parent": h, "children": fam, "kind": "hidden_parent"})

        grouped = {v for fam in families for v in fam}
        active = sorted([v for v in active if v not in parent_of and v not in grouped] + new_nodes)

    if len(active) == 2:
        edges.append((active[0], active[1]))
    elif len(active) > 2:
        # Stalled: join what is left at one hidden node so the output stays a tree.
        pos = {v: k for k, v in enumerate(active)}
        M = np.array([[book(a, b) for b in active] for a in active])
        dist = _child_distances(book, active, active, M, pos, tau)
        h = book.new_hidden(active)
        for c in active:
            book.set(c, h, dist[c])
            edges.append((h, c))
    return edges, prov


def rg_learn(D: DistanceMatrix, cfg: RgConfig | None = None, l_max: int = 1) -> LearnedTree:
    """Recursive grouping on all nodes of ``D``."""
    if len(D) < 3:
        raise ParameterError("recursive grouping needs at least three nodes")
    cfg = cfg or RgConfig()
    eps, tau = default_thresholds(D, cfg)
    book = DistanceBook(D, l_max)
    edges, prov = recursive_grouping(book, D.labels, eps, tau, cfg.max_iterations)
    return assemble(book, D, edges, "rg", eps, tau, prov)


def assemble(book, D, edges, algorithm, eps=None, tau=None, prov=None) -> LearnedTree:
    nodes = set(D.labels) | {v for e in edges for v in e}
    tree = LatentTree(tuple(nodes), frozenset(D.labels), tuple(edges))
    prov = dict(prov or {})
    prov.update({"algorithm": algorithm, "distance_flag": D.flag_string})
    if eps is not None:
        prov.update({"epsilon": eps, "tau": tau})
    prov["low_degree_hidden"] = tree.low_degree_hidden()
    dist = {k: v for k, v in book.cache.items() if k[0] in nodes and k[1] in nodes}
    for a, b in tree.edges:
        dist.setdefault((a, b), book(a, b))
    return LearnedTree(tree, dist, prov)
