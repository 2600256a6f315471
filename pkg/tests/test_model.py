import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latenttree import (GroundTruthModel, build_archetype, exact_covariance, exact_distance,
                        make_homogeneous_params, mutual_information, sample)
from latenttree.exceptions import ModelAssumptionError, ParameterError
from latenttree.model import (ModelParams, audit_assumptions, closed_form_distance, contrastive_distance,
                              delta_mst, exact_distance_matrix, surrogate)
from latenttree.tree import LatentTree
from treegen import random_commuting_params, random_latent_tree, random_scalar_model


def hmm(diam=4, l_max=1, rho=0.24, alpha=1.0):
    t = build_archetype("hmm", diameter=diam)
    return GroundTruthModel(t, make_homogeneous_params(l_max, rho, alpha), t.root)


def test_homogeneous_params_reference_values():
    p = make_homogeneous_params(3, 0.24, 1.0)
    np.testing.assert_allclose(p.A, np.exp(-0.08) * np.eye(3), rtol=0, atol=1e-15)
    np.testing.assert_allclose(p.sigma_n, (1 - np.exp(-0.16)) * np.eye(3), rtol=0, atol=1e-15)
    assert p.homogeneity_residual() < 1e-15


def test_homogeneous_params_scalar():
    p = make_homogeneous_params(1, np.log(2), 1.0)
    assert p.A[0, 0] == pytest.approx(0.5, abs=1e-15)
    assert p.sigma_n[0, 0] == pytest.approx(0.75, abs=1e-15)
    assert p.homogeneity_residual() < 1e-15


@pytest.mark.parametrize("args", [(3, 0.0, 1.0), (3, 0.2, -1.0), (0, 0.2, 1.0)])
def test_homogeneous_params_rejects(args):
    with pytest.raises(ParameterError):
        make_homogeneous_params(*args)


def test_params_validation():
    with pytest.raises(ParameterError, match="non-singular"):
        ModelParams(np.zeros((2, 2)), np.eye(2), np.eye(2))
    with pytest.raises(ParameterError, match="positive definite"):
        ModelParams(np.eye(2), -np.eye(2), np.eye(2))


def test_covariance_examples():
    m = hmm(l_max=3)
    lam = np.exp(-0.08)
    root = m.root
    np.testing.assert_allclose(exact_covariance(m, root, root), np.eye(3), atol=1e-15)
    child = sorted(m.tree.neighbors(root))[0]
    np.testing.assert_allclose(exact_covariance(m, root, child), lam * np.eye(3), atol=1e-14)
    t = m.tree
    far = next(v for v in t.nodes if t.graph_distance(root, v) == 2)
    np.testing.assert_allclose(exact_covariance(m, root, far), lam ** 2 * np.eye(3), atol=1e-14)


def test_covariance_unknown_node():
    with pytest.raises(ParameterError):
        exact_covariance(hmm(), 0, 999)


def test_distance_examples():
    m = hmm(l_max=3)
    t = m.tree
    a, b = t.edges[0]
    assert exact_distance(m, a, a) == 0.0
    assert exact_distance(m, a, b) == pytest.approx(0.24, abs=1e-12)
    v = next(v for v in t.nodes if t.graph_distance(a, v) == 2)
    assert exact_distance(m, a, v) == pytest.approx(0.48, abs=1e-12)
    assert closed_form_distance(m.params, 2) == pytest.approx(exact_distance(m, a, v), rel=1e-12)


def test_mutual_information_examples():
    t = LatentTree(tuple(range(11)), frozenset(range(11)), tuple((k, k + 1) for k in range(10)))
    m = GroundTruthModel(t, make_homogeneous_params(1, np.log(2), 1.0), 0)
    i1 = mutual_information(m, 0, 1)
    i2 = mutual_information(m, 0, 2)
    assert i1 == pytest.approx(-0.5 * np.log(0.75), rel=1e-12)
    assert i1 == pytest.approx(0.14384, abs=1e-5)
    # -1/2 log(1 - 1/16) = 0.0322693
    assert i2 == pytest.approx(-0.5 * np.log(1 - 0.0625), rel=1e-12)
    assert i2 == pytest.approx(0.03227, abs=1e-5)
    assert i2 < i1
    assert mutual_information(m, 0, 10) < mutual_information(m, 0, 5)


def test_mutual_information_requires_conditions():
    rng = np.random.default_rng(0)
    t = build_archetype("hmm", diameter=3)
    m = random_scalar_model(rng, t)
    with pytest.raises(ModelAssumptionError):
        mutual_information(m, 0, 1)


def test_mutual_information_matches_gaussian_formula():
    # MI of two jointly Gaussian vectors computed from the covariances
    rng = np.random.default_rng(3)
    t = build_archetype("hmm", diameter=4)
    for _ in range(5):
        Q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
        s, a = rng.uniform(0.5, 2, 2), rng.uniform(0.3, 0.9, 2)
        p = ModelParams(Q @ np.diag(a) @ Q.T, Q @ np.diag(s) @ Q.T, Q @ np.diag((1 - a * a) * s) @ Q.T)
        m = GroundTruthModel(t, p, t.root)
        for x, y in [(0, 1), (0, 3)]:
            sxy = exact_covariance(m, x, y)
            joint = np.block([[m.marginal(x), sxy], [sxy.T, m.marginal(y)]])
            ref = 0.5 * (np.linalg.slogdet(m.marginal(x))[1] + np.linalg.slogdet(m.marginal(y))[1]
                         - np.linalg.slogdet(joint)[1])
            assert mutual_information(m, x, y) == pytest.approx(ref, rel=1e-9)


def test_prop6_marginals_scale_with_depth():
    rng = np.random.default_rng(1)
    for _ in range(10):
        p = random_commuting_params(rng, 3)
        t = random_latent_tree(rng, 12)
        m = GroundTruthModel(t, p, t.nodes[0])
        for v in t.nodes:
            np.testing.assert_allclose(exact_covariance(m, v, v), p.alpha ** m.depth[v] * p.sigma_r,
                                       rtol=1e-10, atol=1e-12)


def test_recursion_matches_closed_form():
    rng = np.random.default_rng(2)
    for _ in range(10):
        p = random_commuting_params(rng, 2)
        t = random_latent_tree(rng, 10)
        m = GroundTruthModel(t, p, t.nodes[-1])
        for a in t.nodes:
            for b in t.nodes:
                np.testing.assert_allclose(m.covariance(a, b, method="recursion"),
                                           m.covariance(a, b, method="closed_form"), atol=1e-12)


def test_monotonicity_in_hops():
    m = hmm(diam=8, l_max=2, alpha=1.0)
    t = m.tree
    root = m.root
    by_hops = {}
    for v in t.nodes:
        by_hops.setdefault(t.graph_distance(root, v), v)
    hops = sorted(h for h in by_hops if h > 0)
    dist = [exact_distance(m, root, by_hops[h]) for h in hops]
    mi = [mutual_information(m, root, by_hops[h]) for h in hops]
    assert all(x < y for x, y in zip(dist, dist[1:]))
    assert all(x > y for x, y in zip(mi, mi[1:]))


def test_sample_shape_and_determinism():
    m = hmm(l_max=3)
    assert sample(m, 0, seed=1).shape == (0, 15)
    a = sample(m, 50, seed=7)
    b = sample(m, 50, seed=7)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, sample(m, 50, seed=8))


def test_sample_monte_carlo_covariance():
    m = hmm(diam=4)
    X = sample(m, 200_000, seed=0)
    # observed 0 and 1 hang off neighbouring chain nodes or the same end node
    emp = X[:, 0] @ X[:, 1] / X.shape[0]
    assert abs(emp - exact_covariance(m, 0, 1)[0, 0]) < 0.02


def test_sampler_error_rate():
    m = hmm(diam=4, l_max=2)
    obs = m.observed
    cols = [(a, b) for a in range(len(obs)) for b in range(a, len(obs))]
    exact = {(a, b): exact_covariance(m, obs[a], obs[b]) for a, b in cols}

    def rms(n):
        errs = []
        for seed in range(20):
            X = sample(m, n, seed=1000 + seed)
            for a, b in cols:
                emp = X[:, 2 * a:2 * a + 2].T @ X[:, 2 * b:2 * b + 2] / n
                errs.append(np.sum((emp - exact[(a, b)]) ** 2))
        return np.sqrt(np.mean(errs))

    ratio = rms(2000) / rms(32000)
    expected = np.sqrt(32000 / 2000)
    assert 0.4 * expected <= ratio <= 2.5 * expected


def test_surrogates():
    m = hmm(diam=4)
    t = m.tree
    assert surrogate(m, 2) == 2
    # interior chain node: its own leaf
    interior = next(h for h in t.hidden if sum(1 for w in t.neighbors(h) if w in t.observed) == 1)
    leaf = next(w for w in t.neighbors(interior) if w in t.observed)
    assert surrogate(m, interior) == leaf
    # double-star hub: all leaves tie, smallest id wins
    ds = build_archetype("double_star", d_max=4)
    mds = GroundTruthModel(ds, make_homogeneous_params(1, 0.3), ds.root)
    hub = min(ds.hidden)
    assert surrogate(mds, hub) == min(w for w in ds.neighbors(hub) if w in ds.observed)


def test_contrastive_and_delta_mst():
    m = hmm(diam=6, rho=0.3)
    t = m.tree
    interior = [h for h in t.hidden if sum(1 for w in t.neighbors(h) if w in t.observed) == 1]
    for h in interior:
        assert contrastive_distance(m, h) == pytest.approx(0.3, abs=1e-12)
    # the chain ends carry two leaves at equal distance
    assert delta_mst(m) == pytest.approx(0.0, abs=1e-12)
    chain = LatentTree((0, 1, 2), frozenset({0, 1, 2}), ((0, 1), (1, 2)))
    mc = GroundTruthModel(chain, make_homogeneous_params(1, 0.4), 1)
    assert delta_mst(mc) == pytest.approx(0.4, abs=1e-12)


def test_audit_archetypes():
    for kind, kw in [("hmm", {"diameter": 6}), ("double_binary", {"diameter": 5}),
                     ("full_m_tree", {"diameter": 4}), ("double_star", {"d_max": 4})]:
        t = build_archetype(kind, **kw)
        m = GroundTruthModel(t, make_homogeneous_params(2, 0.24), t.root)
        a = audit_assumptions(m)
        assert a["gamma_min"] > 0
        assert a["delta_min"] > 0
        assert a["low_degree_hidden"] == []
        assert a["rho_min"] == pytest.approx(0.24, rel=1e-9)
        assert a["rho_max"] == pytest.approx(0.24 * t.diameter, rel=1e-9)
        assert a["d_max"] == max(t.degree(v) for v in t.nodes)


def test_model_json_round_trip():
    rng = np.random.default_rng(4)
    t = random_latent_tree(rng, 9)
    m = random_scalar_model(rng, t)
    m2 = GroundTruthModel.from_dict(m.to_dict())
    assert m2.root == m.root
    for a in t.nodes:
        assert exact_distance(m2, a, t.nodes[0]) == exact_distance(m, a, t.nodes[0])


def test_exact_matrix_matches_pairwise():
    rng = np.random.default_rng(5)
    p = random_commuting_params(rng, 2)
    t = build_archetype("double_binary", diameter=5)
    m = GroundTruthModel(t, p, t.root)
    D = exact_distance_matrix(m)
    for a in m.observed:
        for b in m.observed:
            assert D(a, b) == pytest.approx(exact_distance(m, a, b), rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), l_max=st.integers(1, 3), size=st.integers(3, 12))
def test_additivity_property(seed, l_max, size):
    rng = np.random.default_rng(seed)
    t = random_latent_tree(rng, size)
    m = GroundTruthModel(t, random_commuting_params(rng, l_max), t.nodes[0])
    for i in t.nodes:
        for k in t.nodes:
            p = t.path(i, k)
            for j in p[1:-1]:
                lhs = exact_distance(m, i, k)
                assert lhs == pytest.approx(exact_distance(m, i, j) + exact_distance(m, j, k),
                                            rel=1e-9, abs=1e-9)
