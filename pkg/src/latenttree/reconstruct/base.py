from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..distances import DistanceMatrix
from ..estimate import CAP_PER_DIM
from ..exceptions import ParameterError
from ..tree import LatentTree


@dataclass
class RgConfig:
    """Thresholds for recursive grouping.

    ``epsilon`` is the tolerance of the sibling/parent tests and ``tau``
    bounds the distances used when estimating hidden-node distances. ``None``
    means "derive from the distance matrix" (see :func:`default_thresholds`).
    """

    epsilon: float | None = None
    tau: float | None = None
    max_iterations: int = 10_000


def default_thresholds(D: DistanceMatrix, cfg: RgConfig | None) -> tuple[float, float]:
    cfg = cfg or RgConfig()
    off = D.values[np.triu_indices(len(D), 1)]
    eps = cfg.epsilon
    if eps is None:
        eps = 0.5 * float(off.min()) if off.size else 1.0
    tau = cfg.tau
    if tau is None:
        tau = 1.2 * float(np.median(off)) if off.size else np.inf
    if not eps > 0 or not tau > 0:
        raise ParameterError(f"thresholds must be positive (epsilon={eps}, tau={tau})")
    return eps, tau


@dataclass
class LearnedTree:
    tree: LatentTree
    distances: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tree": self.tree.to_dict(),
            "distances": [[a, b, d] for (a, b), d in sorted(self.distances.items())],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LearnedTree":
        if "tree" not in d:
            raise ParameterError("learned tree document is missing field 'tree'")
        dist = {(int(a), int(b)): float(x) for a, b, x in d.get("distances", [])}
        return cls(LatentTree.from_dict(d["tree"]), dist, d.get("provenance", {}))

    @property
    def is_binary(self) -> bool:
        return all(self.tree.degree(v) in (1, 3) for v in self.tree.nodes)

    def to_newick(self) -> str:
        return to_newick(self.tree, self.distances)


def to_newick(tree: LatentTree, lengths: dict | None = None) -> str:
    """Newick string with observed ids as labels and unnamed internal nodes."""
    lengths = lengths or {}
    internal = [v for v in tree.nodes if tree.degree(v) > 1]
    root = min(tree.hidden & set(internal), default=None)
    if root is None:
        root = internal[0] if internal else tree.nodes[0]

    def length(a, b):
        key = (a, b) if a < b else (b, a)
        return f":{lengths[key]:.6g}" if key in lengths else ""

    def render(v, parent):
        kids = sorted(w for w in tree.neighbors(v) if w != parent)
        label = str(v) if v in tree.observed else ""
        if not kids:
            return label
        return "(" + ",".join(render(w, v) + length(v, w) for w in kids) + ")" + label

    return render(root, None) + ";"


class DistanceBook:
    """Distances between observed nodes plus estimates for created hidden nodes.

    Distances to a hidden node ``h`` that were not recorded when ``h`` was
    created are derived from its children ``C(h)`` as
    ``d(h, x) = mean_c d(c, x) - d(c, h)``, skipping any child that lies on
    ``x``'s side of ``h``; such a child ``c`` instead gives
    ``d(h, c) + d(c, x)`` if no other child is usable. Sides are read from
    ``tree_adj`` (the current partial tree) when both nodes are in it. Nodes
    created by the running grouping pass are resolved through their children,
    and an outside node stands in for the neighbourhood member whose branch
    holds it (see :meth:`begin_run`).
    """

    def __init__(self, D: DistanceMatrix, l_max: int = 1):
        self.D = D
        self.cap = CAP_PER_DIM * l_max
        self.cache: dict[tuple[int, int], float] = {}
        self.children: dict[int, list[int]] = {}
        self.tree_adj: dict[int, set[int]] | None = None
        self._run: set[int] = set()
        self._members: set[int] = set()
        self._next = max(D.labels) + 1 if len(D) else 0

    def new_hidden(self, children) -> int:
        h = self._next
        self._next += 1
        self.children[h] = list(children)
        self._run.add(h)
        return h

    def begin_run(self, members):
        """Start a grouping pass over ``members``, a closed neighbourhood in ``tree_adj``."""
        self._run = set()
        self._members = set(members)

    def is_observed(self, v) -> bool:
        return v not in self.children

    def set(self, a, b, d):
        self.cache[(a, b) if a < b else (b, a)] = float(d)

    def saturated(self, a, b) -> bool:
        if self.is_observed(a) and self.is_observed(b):
            return self.D.is_saturated(a, b) or self.D(a, b) >= self.cap
        return self(a, b) >= self.cap

    def _run_descendants(self, h):
        out = set()
        stack = [h]
        while stack:
            v = stack.pop()
            if v in self._run:
                out.update(self.children[v])
                stack.extend(self.children[v])
        return out

    def _owner(self, b):
        """The node of the running pass that ``b`` hangs off."""
        adj = self.tree_adj
        if adj is None or b in self._run or b in self._members or b not in adj:
            return b
        # walk towards the centre; the first member met owns b's branch
        seen = {b}
        stack = [b]
        while stack:
            v = stack.pop()
            if v in self._members:
                return v
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return b

    def _side(self, a, b):
        """Children of ``a`` that lie on ``b``'s side of ``a``."""
        kids = self.children[a]
        adj = self.tree_adj
        if adj is not None and a in adj and b in adj and a not in self._run:
            seen = {b}
            stack = [b]
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if w != a and w not in seen:
                        seen.add(w)
                        stack.append(w)
            return [c for c in kids if c in seen]
        o = self._owner(b)
        return [c for c in kids if c == o or o in self._run_descendants(c)]

    def __call__(self, a, b) -> float:
        if a == b:
            return 0.0
        key = (a, b) if a < b else (b, a)
        if key in self.cache:
            return self.cache[key]
        if self.is_observed(a) and self.is_observed(b):
            return self.D(a, b)
        if self.is_observed(a):
            a, b = b, a
        # a is hidden here; expand the more recently created node
        if not self.is_observed(b) and b > a:
            a, b = b, a
        side = self._side(a, b)
        usable = [c for c in self.children[a] if c not in side]
        terms = [self(c, b) - self(c, a) for c in usable
                 if not (self.saturated(c, b) or self.saturated(c, a))]
        if terms:
            d = float(np.mean(terms))
        elif side:
            d = self(a, side[0]) + self(side[0], b)
        else:
            d = self.cap
        self.set(a, b, d)
        return d
