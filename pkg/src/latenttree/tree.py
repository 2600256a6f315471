"""Latent tree topologies and the archetype constructors used in experiments."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .exceptions import ParameterError

ARCHETYPES = ("hmm", "double_binary", "full_m_tree", "double_star")


def _edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class LatentTree:
    """An undirected tree whose nodes are split into observed and hidden ones.

    Node ids are integers. Trees built by :func:`build_archetype` number the
    observed nodes ``0..o-1`` so that node ``i`` owns columns
    ``i*l_max .. (i+1)*l_max - 1`` of a data matrix.
    """

    nodes: tuple[int, ...]
    observed: frozenset[int]
    edges: tuple[tuple[int, int], ...]
    root: int | None = None
    _adj: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(sorted(set(int(v) for v in self.nodes)))
        if len(nodes) != len(self.nodes):
            raise ParameterError("node ids must be unique")
        edges = tuple(sorted({_edge(int(a), int(b)) for a, b in self.edges}))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "observed", frozenset(int(v) for v in self.observed))
        object.__setattr__(self, "edges", edges)
        node_set = set(nodes)
        if not self.observed <= node_set:
            raise ParameterError("observed ids must be tree nodes")
        for a, b in edges:
            if a == b or a not in node_set or b not in node_set:
                raise ParameterError(f"invalid edge ({a}, {b})")
        if nodes and len(edges) != len(nodes) - 1:
            raise ParameterError(
                f"a tree on {len(nodes)} nodes needs {len(nodes) - 1} edges, got {len(edges)}"
            )
        adj = {v: set() for v in nodes}
        for a, b in edges:
            adj[a].add(b)
            adj[b].add(a)
        object.__setattr__(self, "_adj", {v: frozenset(s) for v, s in adj.items()})
        if nodes and len(self._reach(nodes[0])) != len(nodes):
            raise ParameterError("edges do not form a connected tree")
        if self.root is not None and self.root not in node_set:
            raise ParameterError(f"root {self.root} is not a node")

    @classmethod
    def from_edges(cls, edges: Iterable, observed: Iterable[int], root=None, nodes=None):
        edges = [tuple(e) for e in edges]
        if nodes is None:
            nodes = {v for e in edges for v in e} | set(observed)
        return cls(tuple(nodes), frozenset(observed), tuple(edges), root)

    def _reach(self, start):
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in self._adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    @property
    def hidden(self) -> frozenset[int]:
        return frozenset(self.nodes) - self.observed

    @property
    def n_observed(self) -> int:
        return len(self.observed)

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @property
    def leaves(self) -> list[int]:
        return [v for v in self.nodes if len(self._adj[v]) <= 1]

    @property
    def internal_nodes(self) -> list[int]:
        return [v for v in self.nodes if len(self._adj[v]) > 1]

    def kind(self, v: int) -> str:
        return "observed" if v in self.observed else "hidden"

    def low_degree_hidden(self) -> list[int]:
        """Hidden nodes with fewer than three neighbours."""
        return [v for v in self.nodes if v not in self.observed and len(self._adj[v]) < 3]

    def bfs_distances(self, source: int) -> dict[int, int]:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in self._adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    @cached_property
    def hop_distances(self) -> dict[int, dict[int, int]]:
        return {v: self.bfs_distances(v) for v in self.nodes}

    def graph_distance(self, a: int, b: int) -> int:
        return self.hop_distances[a][b]

    def path(self, a: int, b: int) -> list[int]:
        """Nodes on the path from ``a`` to ``b``, both ends included."""
        parent = {a: None}
        queue = deque([a])
        while queue:
            v = queue.popleft()
            if v == b:
                break
            for w in self._adj[v]:
                if w not in parent:
                    parent[w] = v
                    queue.append(w)
        out = [b]
        while out[-1] != a:
            out.append(parent[out[-1]])
        return out[::-1]

    @property
    def diameter(self) -> int:
        if not self.nodes:
            return 0
        far = max(self.bfs_distances(self.nodes[0]).items(), key=lambda kv: (kv[1], -kv[0]))[0]
        return max(self.bfs_distances(far).values())

    def rooted(self, root: int | None = None) -> tuple[dict[int, int | None], list[int]]:
        """Parent map and breadth-first order for the tree rooted at ``root``."""
        root = self.root if root is None else root
        if root is None:
            root = self.nodes[0]
        parent: dict[int, int | None] = {root: None}
        order = [root]
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in sorted(self._adj[v]):
                if w not in parent:
                    parent[w] = v
                    order.append(w)
                    queue.append(w)
        return parent, order

    def depths(self, root: int | None = None) -> dict[int, int]:
        root = self.root if root is None else root
        return self.bfs_distances(self.nodes[0] if root is None else root)

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": v, "kind": self.kind(v)} for v in self.nodes],
            "edges": [list(e) for e in self.edges],
            "root": self.root,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LatentTree":
        try:
            nodes = [int(n["id"]) for n in d["nodes"]]
            observed = [int(n["id"]) for n in d["nodes"] if n["kind"] == "observed"]
            bad = [n["kind"] for n in d["nodes"] if n["kind"] not in ("observed", "hidden")]
            edges = [(int(a), int(b)) for a, b in d["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed tree document: {exc!r}") from exc
        if bad:
            raise ParameterError(f"tree.nodes[].kind must be observed/hidden, got {bad[0]!r}")
        return cls(tuple(nodes), frozenset(observed), tuple(edges), d.get("root"))


class _Builder:
    """Collects edges; hidden nodes get provisional negative ids until relabelled."""

    def __init__(self):
        self.edges: list[tuple[int, int]] = []
        self.observed: list[int] = []
        self.hidden: list[int] = []

    def leaf(self) -> int:
        v = len(self.observed)
        self.observed.append(v)
        return v

    def hub(self) -> int:
        v = -(len(self.hidden) + 1)
        self.hidden.append(v)
        return v

    def link(self, a, b):
        self.edges.append((a, b))

    def build(self, root) -> LatentTree:
        o = len(self.observed)
        relabel = {h: o + k for k, h in enumerate(self.hidden)}
        f = lambda v: relabel.get(v, v)  # noqa: E731
        nodes = tuple(range(o + len(self.hidden)))
        edges = tuple((f(a), f(b)) for a, b in self.edges)
        return LatentTree(nodes, frozenset(self.observed), edges, f(root))


def build_archetype(kind: str, *, diameter: int | None = None, m: int = 3,
                    d_max: int | None = None) -> LatentTree:
    """Build one of the four reference topologies.

    ``hmm``
        A hidden chain in which every hidden node carries one observed leaf
        and the two chain ends carry one extra observed leaf each, so that
        ``Diam + 1`` nodes are observed.
    ``double_binary``
        Two adjacent hidden roots, each the root of a complete binary tree of
        depth ``(Diam - 1) / 2`` whose leaves are observed.
    ``full_m_tree``
        A complete ``m``-ary tree of depth ``Diam / 2`` with observed leaves.
    ``double_star``
        Two adjacent hidden hubs, each with ``d_max - 1`` observed leaves.

    Observed nodes are numbered first, left to right; the root is the central
    hidden node.
    """
    b = _Builder()
    if kind == "hmm":
        if diameter is None or diameter < 2:
            raise ParameterError("hmm requires diameter >= 2")
        chain = [b.hub() for _ in range(diameter - 1)]
        first = b.leaf()
        b.link(first, chain[0])
        for k, h in enumerate(chain):
            b.link(h, b.leaf())
            if k:
                b.link(chain[k - 1], h)
        b.link(chain[-1], b.leaf())
        return b.build(chain[(len(chain) - 1) // 2])

    if kind == "double_binary":
        if diameter is None or diameter < 3 or diameter % 2 == 0:
            raise ParameterError("double_binary requires an odd diameter >= 3")
        depth = (diameter - 1) // 2
        frontier_left, frontier_right = [b.hub()], [b.hub()]
        roots = (frontier_left[0], frontier_right[0])
        b.link(*roots)
        # Leaves are appended level by level so observed ids read left to right.
        for side in (frontier_left, frontier_right):
            level = side
            for d in range(depth):
                nxt = []
                for v in level:
                    for _ in range(2):
                        w = b.leaf() if d == depth - 1 else b.hub()
                        b.link(v, w)
                        nxt.append(w)
                level = nxt
        return b.build(roots[0])

    if kind == "full_m_tree":
        if m < 3:
            raise ParameterError("full_m_tree requires m >= 3")
        if diameter is None or diameter < 2 or diameter % 2:
            raise ParameterError("full_m_tree requires an even diameter >= 2")
        depth = diameter // 2
        root = b.hub()
        level = [root]
        for d in range(depth):
            nxt = []
            for v in level:
                for _ in range(m):
                    w = b.leaf() if d == depth - 1 else b.hub()
                    b.link(v, w)
                    nxt.append(w)
            level = nxt
        return b.build(root)

    if kind == "double_star":
        if d_max is None or d_max < 3:
            raise ParameterError("double_star requires d_max >= 3")
        left, right = b.hub(), b.hub()
        b.link(left, right)
        for hub in (left, right):
            for _ in range(d_max - 1):
                b.link(hub, b.leaf())
        return b.build(left)

    raise ParameterError(f"unknown archetype {kind!r}; expected one of {ARCHETYPES}")
