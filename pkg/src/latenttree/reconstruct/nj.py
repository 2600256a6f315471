"""Neighbour joining and its spectral variant."""

from __future__ import annotations

import numpy as np

from ..distances import DistanceMatrix
from ..exceptions import ParameterError
from ..tree import LatentTree
from .base import LearnedTree


def _finish(D, edges, lengths, algorithm, extra=None):
    nodes = set(D.labels) | {v for e in edges for v in e}
    tree = LatentTree(tuple(nodes), frozenset(D.labels), tuple(edges))
    prov = {"algorithm": algorithm, "distance_flag": D.flag_string}
    prov.update(extra or {})
    return LearnedTree(tree, lengths, prov)


def nj_learn(D: DistanceMatrix) -> LearnedTree:
    """Saitou-Nei neighbour joining; returns an unrooted binary tree."""
    if len(D) < 3:
        raise ParameterError("neighbour joining needs at least three nodes")
    d = D.values.copy()
    nodes = list(D.labels)
    next_id = max(nodes) + 1
    edges, lengths, joins = [], {}, []

    def link(a, b, length):
        edges.append((a, b))
        lengths[(a, b) if a < b else (b, a)] = float(length)

    while len(nodes) > 3:
        m = len(nodes)
        r = d.sum(axis=1)
        q = (m - 2) * d - r[:, None] - r[None, :]
        iu = np.triu_indices(m, 1)
        k = int(np.argmin(q[iu]))
        i, j = int(iu[0][k]), int(iu[1][k])
        u = next_id
        next_id += 1
        li = 0.5 * d[i, j] + (r[i] - r[j]) / (2 * (m - 2))
        link(u, nodes[i], li)
        link(u, nodes[j], d[i, j] - li)
        joins.append([nodes[i], nodes[j]])
        du = 0.5 * (d[i] + d[j] - d[i, j])
        keep = [x for x in range(m) if x not in (i, j)]
        d = np.vstack([np.hstack([d[np.ix_(keep, keep)], du[keep, None]]),
                       np.append(du[keep], 0.0)[None, :]])
        nodes = [nodes[x] for x in keep] + [u]

    a, b, c = 0, 1, 2
    u = next_id
    link(u, nodes[a], 0.5 * (d[a, b] + d[a, c] - d[b, c]))
    link(u, nodes[b], 0.5 * (d[a, b] + d[b, c] - d[a, c]))
    link(u, nodes[c], 0.5 * (d[a, c] + d[b, c] - d[a, b]))
    return _finish(D, edges, lengths, "nj", {"joins": joins})


def second_singular_value(R: np.ndarray, rows) -> float:
    """``sigma_2`` of ``R[rows, complement]``; zero if the block has rank <= 1 by shape."""
    rows = sorted(rows)
    cols = [x for x in range(R.shape[0]) if x not in set(rows)]
    if min(len(rows), len(cols)) < 2:
        return 0.0
    s = np.linalg.svd(R[np.ix_(rows, cols)], compute_uv=False)
    return float(s[1])


def snj_learn(D: DistanceMatrix) -> LearnedTree:
    """Spectral neighbour joining on the affinity matrix ``exp(-D)``.

    Clusters start as singletons; the pair whose union ``B`` minimises
    ``sigma_2(R[B, not B])`` is merged under a new hidden node until three
    clusters remain, which are joined at one more hidden node.
    """
    if len(D) < 3:
        raise ParameterError("spectral neighbour joining needs at least three nodes")
    R = np.exp(-D.values)
    np.fill_diagonal(R, 1.0)
    clusters = [[k] for k in range(len(D))]
    roots = list(D.labels)
    next_id = max(roots) + 1
    edges, joins = [], []

    score = {}
    for a in range(len(clusters)):
        for b in range(a + 1, len(clusters)):
            score[(a, b)] = second_singular_value(R, clusters[a] + clusters[b])

    alive = list(range(len(clusters)))
    while len(alive) > 3:
        a, b = min(((score[(x, y)], x, y) for i, x in enumerate(alive) for y in alive[i + 1:]))[1:]
        u = next_id
        next_id += 1
        edges += [(u, roots[a]), (u, roots[b])]
        joins.append([roots[a], roots[b]])
        clusters[a] = clusters[a] + clusters[b]
        roots[a] = u
        alive.remove(b)
        for x in alive:
            if x != a:
                key = (min(a, x), max(a, x))
                score[key] = second_singular_value(R, clusters[a] + clusters[x])

    u = next_id
    edges += [(u, roots[x]) for x in alive]
    return _finish(D, edges, {}, "snj", {"joins": joins})
