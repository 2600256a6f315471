"""Linear-Gaussian latent tree models with closed-form covariances.

Each non-root node follows ``x_child = A x_parent + n_child`` where the noise
of a node at depth ``l`` is ``N(0, alpha**(l-1) Sigma_n)`` and the root is
``N(0, Sigma_r)``. Under the homogeneous condition
``A Sigma_r A^T + Sigma_n = alpha Sigma_r`` every node at depth ``l`` has
covariance ``alpha**l Sigma_r``.

Heterogeneous models (per-edge transforms and per-node noise) are supported
for checking additivity of the information distance; the closed forms and
the mutual information routine require the homogeneous family.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distances import DistanceMatrix
from .exceptions import ModelAssumptionError, ParameterError
from .tree import LatentTree

TIE_RTOL = 1e-9


def _as_square(name, value, l_max=None):
    arr = np.atleast_2d(np.asarray(value, dtype=float))
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ParameterError(f"{name} must be a square matrix, got shape {arr.shape}")
    if l_max is not None and arr.shape[0] != l_max:
        raise ParameterError(f"{name} must be {l_max}x{l_max}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} has non-finite entries")
    return arr


def _check_spd(name, m):
    if np.max(np.abs(m - m.T)) > 1e-10 * max(1.0, np.max(np.abs(m))):
        raise ParameterError(f"{name} must be symmetric")
    if np.linalg.eigvalsh((m + m.T) / 2).min() <= 0:
        raise ParameterError(f"{name} must be positive definite")


@dataclass(frozen=True, eq=False)
class ModelParams:
    A: np.ndarray
    sigma_r: np.ndarray
    sigma_n: np.ndarray
    alpha: float = 1.0

    def __post_init__(self):
        A = _as_square("A", self.A)
        l_max = A.shape[0]
        sigma_r = _as_square("sigma_r", self.sigma_r, l_max)
        sigma_n = _as_square("sigma_n", self.sigma_n, l_max)
        _check_spd("sigma_r", sigma_r)
        _check_spd("sigma_n", sigma_n)
        if not self.alpha > 0:
            raise ParameterError("alpha must be positive")
        if abs(np.linalg.det(A)) < 1e-300 or np.linalg.matrix_rank(A) < l_max:
            raise ParameterError("A must be non-singular")
        for name, arr in (("A", A), ("sigma_r", sigma_r), ("sigma_n", sigma_n)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def l_max(self) -> int:
        return self.A.shape[0]

    def homogeneity_residual(self) -> float:
        r = self.A @ self.sigma_r @ self.A.T + self.sigma_n - self.alpha * self.sigma_r
        return float(np.max(np.abs(r)))

    def commutator_residual(self) -> float:
        return float(np.max(np.abs(self.A @ self.sigma_r - self.sigma_r @ self.A)))

    def contraction_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.A.T @ self.A / self.alpha)

    def check_monotone_conditions(self, tol: float = 1e-10) -> None:
        """Raise unless homogeneity, commutation and the (0,1) eigenvalue band hold."""
        if self.homogeneity_residual() > tol:
            raise ModelAssumptionError(
                f"homogeneity A Sr A^T + Sn = alpha Sr violated (residual {self.homogeneity_residual():.3g})")
        if self.commutator_residual() > tol:
            raise ModelAssumptionError(
                f"A and sigma_r do not commute (residual {self.commutator_residual():.3g})")
        ev = self.contraction_eigenvalues()
        if ev.min() <= 0 or ev.max() >= 1:
            raise ModelAssumptionError("eigenvalues of A^T A / alpha must lie in (0, 1)")

    @property
    def edge_distance(self) -> float:
        """Information distance across one edge of a homogeneous model."""
        return closed_form_distance(self, 1)

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "sigma_r": self.sigma_r.tolist(),
            "sigma_n": self.sigma_n.tolist(),
            "alpha": self.alpha,
            "l_max": self.l_max,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        try:
            params = cls(np.asarray(d["A"], float), np.asarray(d["sigma_r"], float),
                         np.asarray(d["sigma_n"], float), float(d.get("alpha", 1.0)))
        except KeyError as exc:
            raise ParameterError(f"params is missing field {exc.args[0]!r}") from exc
        if "l_max" in d and int(d["l_max"]) != params.l_max:
            raise ParameterError(f"params.l_max={d['l_max']} disagrees with A of size {params.l_max}")
        return params


def make_homogeneous_params(l_max: int, rho_edge: float, alpha: float = 1.0) -> ModelParams:
    """Isotropic parameters whose per-edge information distance is ``rho_edge``.

    ``Sigma_r = I``, ``A = sqrt(alpha) exp(-rho_edge / l_max) I`` and
    ``Sigma_n = (alpha - lambda^2) I``.
    """
    if l_max < 1:
        raise ParameterError("l_max must be a positive integer")
    if not rho_edge > 0:
        raise ParameterError("rho_edge must be positive")
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    lam = np.sqrt(alpha) * np.exp(-rho_edge / l_max)
    eye = np.eye(l_max)
    return ModelParams(lam * eye, eye, (alpha - lam ** 2) * eye, alpha)


def closed_form_distance(params: ModelParams, hops: int) -> float:
    """``-1/2 log det((A^T A / alpha)^g)`` for nodes ``g`` hops apart."""
    if hops == 0:
        return 0.0
    sign, logdet = np.linalg.slogdet(params.A.T @ params.A / params.alpha)
    return -0.5 * hops * logdet


def closed_form_mutual_information(params: ModelParams, hops: int) -> float:
    """``-1/2 log det(I - (A^T A / alpha)^g)``; infinite for ``g = 0``."""
    if hops == 0:
        return np.inf
    m = np.linalg.matrix_power(params.A.T @ params.A / params.alpha, hops)
    sign, logdet = np.linalg.slogdet(np.eye(params.l_max) - m)
    return -0.5 * logdet


@dataclass(frozen=True, eq=False)
class GroundTruthModel:
    """A latent tree, its channel parameters and a fixed root.

    ``edge_transforms`` maps ``(parent, child)`` to a transform replacing
    ``A`` on that edge; ``node_noise`` maps a node to its noise covariance
    (the root's entry replaces ``Sigma_r``). Both are empty for the
    homogeneous family.
    """

    tree: LatentTree
    params: ModelParams
    root: int | None = None
    edge_transforms: dict = field(default_factory=dict)
    node_noise: dict = field(default_factory=dict)

    def __post_init__(self):
        root = self.root if self.root is not None else self.tree.root
        if root is None:
            root = self.tree.nodes[0]
        if root not in self.tree.nodes:
            raise ParameterError(f"root {root} is not a node of the tree")
        object.__setattr__(self, "root", int(root))
        parent, order = self.tree.rooted(root)
        object.__setattr__(self, "_parent", parent)
        object.__setattr__(self, "_order", order)
        depth = {root: 0}
        for v in order[1:]:
            depth[v] = depth[parent[v]] + 1
        object.__setattr__(self, "depth", depth)
        l = self.params.l_max
        et = {}
        for (p, c), m in self.edge_transforms.items():
            if parent.get(c) != p:
                raise ParameterError(f"edge_transforms key ({p}, {c}) is not a parent->child edge")
            et[(p, c)] = _as_square("edge transform", m, l)
        nn = {}
        for v, m in self.node_noise.items():
            if v not in depth:
                raise ParameterError(f"node_noise key {v} is not a node")
            nn[v] = _as_square("node noise", m, l)
            _check_spd("node noise", nn[v])
        object.__setattr__(self, "edge_transforms", et)
        object.__setattr__(self, "node_noise", nn)
        object.__setattr__(self, "_marginals", self._compute_marginals())

    @property
    def homogeneous(self) -> bool:
        return not self.edge_transforms and not self.node_noise

    @property
    def observed(self) -> list[int]:
        return sorted(self.tree.observed)

    def parent(self, v):
        return self._parent[v]

    def transform(self, parent, child) -> np.ndarray:
        return self.edge_transforms.get((parent, child), self.params.A)

    def noise(self, v) -> np.ndarray:
        if v in self.node_noise:
            return self.node_noise[v]
        d = self.depth[v]
        if d == 0:
            return self.params.sigma_r
        return self.params.alpha ** (d - 1) * self.params.sigma_n

    def _compute_marginals(self):
        cov = {}
        for v in self._order:
            p = self._parent[v]
            if p is None:
                cov[v] = self.noise(v)
            else:
                a = self.transform(p, v)
                cov[v] = a @ cov[p] @ a.T + self.noise(v)
        return cov

    def _ancestors(self, v):
        out = [v]
        while self._parent[out[-1]] is not None:
            out.append(self._parent[out[-1]])
        return out

    def _descent(self, top, v):
        """Product of edge transforms taking ``x_top`` to ``E[x_v | x_top]``."""
        m = np.eye(self.params.l_max)
        while v != top:
            p = self._parent[v]
            m = m @ self.transform(p, v)
            v = p
        return m

    def lca(self, i, j):
        anc = set(self._ancestors(i))
        for v in self._ancestors(j):
            if v in anc:
                return v
        raise AssertionError("nodes share no ancestor")  # pragma: no cover

    def covariance(self, i, j, method: str = "auto") -> np.ndarray:
        """Exact ``E[x_i x_j^T]``.

        ``method="recursion"`` propagates conditional expectations edge by
        edge from the lowest common ancestor; ``"closed_form"`` uses
        ``A^p alpha^depth(lca) Sigma_r (A^q)^T`` and is only valid for the
        homogeneous family. ``"auto"`` picks the closed form when it applies.
        """
        if i not in self.depth or j not in self.depth:
            raise ParameterError(f"unknown node id in ({i}, {j})")
        if method == "auto":
            method = "closed_form" if self.homogeneous else "recursion"
        a = self.lca(i, j)
        if method == "recursion":
            return self._descent(a, i) @ self._marginals[a] @ self._descent(a, j).T
        if method != "closed_form":
            raise ParameterError(f"unknown covariance method {method!r}")
        if not self.homogeneous:
            raise ModelAssumptionError("closed-form covariance needs a homogeneous model")
        p, q = self.depth[i] - self.depth[a], self.depth[j] - self.depth[a]
        A = self.params.A
        mid = self.params.alpha ** self.depth[a] * self.params.sigma_r
        return np.linalg.matrix_power(A, p) @ mid @ np.linalg.matrix_power(A, q).T

    def marginal(self, v) -> np.ndarray:
        return self._marginals[v]

    def to_dict(self) -> dict:
        tree = self.tree.to_dict()
        tree["root"] = self.root
        out = {"tree": tree, "params": self.params.to_dict()}
        if self.edge_transforms:
            out["edge_transforms"] = [[p, c, m.tolist()] for (p, c), m in sorted(self.edge_transforms.items())]
        if self.node_noise:
            out["node_noise"] = [[v, m.tolist()] for v, m in sorted(self.node_noise.items())]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruthModel":
        for key in ("tree", "params"):
            if key not in d:
                raise ParameterError(f"model document is missing field '{key}'")
        tree = LatentTree.from_dict(d["tree"])
        params = ModelParams.from_dict(d["params"])
        et = {(int(p), int(c)): np.asarray(m, float) for p, c, m in d.get("edge_transforms", [])}
        nn = {int(v): np.asarray(m, float) for v, m in d.get("node_noise", [])}
        return cls(tree, params, d["tree"].get("root"), et, nn)


def information_distance(sigma_ij, sigma_ii, sigma_jj) -> float:
    """Information distance from a cross-covariance and the two marginals."""
    s = np.linalg.svd(sigma_ij, compute_uv=False)
    si = np.linalg.svd(sigma_ii, compute_uv=False)
    sj = np.linalg.svd(sigma_jj, compute_uv=False)
    return float(-np.sum(np.log(s)) + 0.5 * np.sum(np.log(si)) + 0.5 * np.sum(np.log(sj)))


def exact_covariance(model: GroundTruthModel, i: int, j: int) -> np.ndarray:
    return model.covariance(i, j)


def exact_distance(model: GroundTruthModel, i: int, j: int) -> float:
    if i == j:
        if i not in model.depth:
            raise ParameterError(f"unknown node id {i}")
        return 0.0
    return information_distance(model.covariance(i, j), model.marginal(i), model.marginal(j))


def mutual_information(model: GroundTruthModel, i: int, j: int) -> float:
    """Mutual information of two nodes of a homogeneous, commuting model."""
    if not model.homogeneous:
        raise ModelAssumptionError("mutual information closed form needs a homogeneous model")
    model.params.check_monotone_conditions()
    return closed_form_mutual_information(model.params, model.tree.graph_distance(i, j))


def exact_distance_matrix(model: GroundTruthModel, nodes=None) -> DistanceMatrix:
    """Exact distances over ``nodes`` (default: observed nodes, sorted).

    Homogeneous models use ``hops * edge_distance`` so that equal hop counts
    give bit-identical distances; other models go through the covariances.
    """
    nodes = model.observed if nodes is None else list(nodes)
    k = len(nodes)
    values = np.zeros((k, k))
    if model.homogeneous:
        rho = model.params.edge_distance
        for a in range(k):
            hops = model.tree.hop_distances[nodes[a]]
            for b in range(a + 1, k):
                values[a, b] = values[b, a] = hops[nodes[b]] * rho
    else:
        for a in range(k):
            for b in range(a + 1, k):
                values[a, b] = values[b, a] = exact_distance(model, nodes[a], nodes[b])
    return DistanceMatrix(tuple(nodes), values, "exact")


def sample(model: GroundTruthModel, n: int, seed: int | None = 0) -> np.ndarray:
    """Draw ``n`` joint samples and return the observed block.

    Columns are grouped by observed node in increasing id order, ``l_max``
    coordinates each.
    """
    if n < 0:
        raise ParameterError("n must be non-negative")
    rng = np.random.default_rng(seed)
    l = model.params.l_max
    values = {}
    for v in model._order:
        chol = np.linalg.cholesky(model.noise(v))
        z = rng.standard_normal((n, l)) @ chol.T
        p = model.parent(v)
        values[v] = z if p is None else values[p] @ model.transform(p, v).T + z
    obs = model.observed
    if not obs:
        return np.zeros((n, 0))
    return np.hstack([values[v] for v in obs])


def _observed_distances_from(model, v, dm=None):
    if dm is None:
        return [(exact_distance(model, v, o), o) for o in model.observed]
    return [(dm(v, o), o) for o in model.observed]


def _argmin_with_ties(pairs):
    best = min(d for d, _ in pairs)
    tol = TIE_RTOL * max(1.0, abs(best))
    return min(o for d, o in pairs if d - best <= tol), best


def surrogate(model: GroundTruthModel, i: int) -> int:
    """Closest observed node to ``i``; the smallest id wins ties."""
    if not model.observed:
        raise ParameterError("model has no observed nodes")
    return _argmin_with_ties(_observed_distances_from(model, i))[0]


def contrastive_distance(model: GroundTruthModel, i: int, dm: DistanceMatrix | None = None) -> float:
    pairs = _observed_distances_from(model, i, dm)
    sg, best = _argmin_with_ties(pairs)
    rest = [d for d, o in pairs if o != sg]
    if not rest:
        return np.inf
    return max(0.0, min(rest) - best)


def delta_mst(model: GroundTruthModel) -> float:
    """Smallest contrastive distance over internal (non-leaf) nodes."""
    internal = model.tree.internal_nodes
    if not internal:
        raise ParameterError("tree has no internal node")
    dm = exact_distance_matrix(model, model.tree.nodes)
    return min(contrastive_distance(model, v, dm) for v in internal)


def audit_assumptions(model: GroundTruthModel) -> dict:
    """Constants of the structural and distributional assumptions over all nodes."""
    nodes = model.tree.nodes
    gamma = np.inf
    rho_min, rho_max = np.inf, 0.0
    for a_i, a in enumerate(nodes):
        for b in nodes[a_i + 1:]:
            c = model.covariance(a, b)
            gamma = min(gamma, np.linalg.svd(c, compute_uv=False).min())
            d = information_distance(c, model.marginal(a), model.marginal(b))
            rho_min, rho_max = min(rho_min, d), max(rho_max, d)
    for a in nodes:
        gamma = min(gamma, np.linalg.svd(model.marginal(a), compute_uv=False).min())
    return {
        "gamma_min": float(gamma),
        "delta_min": float(min(np.linalg.det(model.marginal(v)) for v in nodes)),
        "sigma_max_sq": float(max(np.max(np.diag(model.marginal(v))) for v in nodes)),
        "d_max": max(model.tree.degree(v) for v in nodes),
        "rho_min": float(rho_min),
        "rho_max": float(rho_max),
        "low_degree_hidden": model.tree.low_degree_hidden(),
    }
