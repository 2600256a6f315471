import pytest

from latenttree.exceptions import ParameterError
from latenttree.tree import LatentTree, build_archetype


def test_hmm_counts():
    t = build_archetype("hmm", diameter=4)
    assert len(t.observed) == 5
    assert t.diameter == 4
    assert all(t.degree(v) >= 3 for v in t.hidden)
    assert sorted(t.observed) == list(range(5))


def test_double_binary_three():
    t = build_archetype("double_binary", diameter=3)
    assert len(t.observed) == 4
    assert len(t.hidden) == 2
    a, b = sorted(t.hidden)
    assert b in t.neighbors(a)


@pytest.mark.parametrize("diam", [3, 5, 7, 9])
def test_double_binary_leaf_count(diam):
    t = build_archetype("double_binary", diameter=diam)
    assert len(t.observed) == 2 ** ((diam + 1) // 2)
    assert t.diameter == diam


def test_double_star_smallest():
    t = build_archetype("double_star", d_max=3)
    assert len(t.observed) == 4
    assert [t.degree(v) for v in sorted(t.hidden)] == [3, 3]


@pytest.mark.parametrize("m,diam", [(3, 2), (3, 4), (4, 4)])
def test_full_m_tree(m, diam):
    t = build_archetype("full_m_tree", m=m, diameter=diam)
    assert len(t.observed) == m ** (diam // 2)
    assert t.diameter == diam


@pytest.mark.parametrize("kind,kw,needle", [
    ("hmm", {"diameter": 1}, "diameter"),
    ("double_binary", {"diameter": 4}, "odd"),
    ("full_m_tree", {"m": 2, "diameter": 4}, "m"),
    ("double_star", {"d_max": 2}, "d_max"),
    ("spider", {}, "archetype"),
])
def test_bad_archetype_params(kind, kw, needle):
    with pytest.raises(ParameterError, match=needle):
        build_archetype(kind, **kw)


def test_tree_validation():
    with pytest.raises(ParameterError):
        LatentTree((0, 1, 2), frozenset({0, 1, 2}), ((0, 1),))
    with pytest.raises(ParameterError):
        LatentTree((0, 1, 2, 3), frozenset({0, 1}), ((0, 1), (2, 3), (0, 1)))


def test_low_degree_hidden_is_reported():
    t = LatentTree((0, 1, 2), frozenset({0, 2}), ((0, 1), (1, 2)))
    assert t.low_degree_hidden() == [1]


def test_round_trip():
    t = build_archetype("double_star", d_max=4)
    assert LatentTree.from_dict(t.to_dict()) == t
