import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from latenttree import GroundTruthModel, build_archetype, make_homogeneous_params, sample
from latenttree.corrupt import CorruptionSpec, inject
from latenttree.distances import DistanceMatrix
from latenttree.estimators import (ChowLiuRecursiveGrouping, InformationDistance, NeighborJoining,
                                   RecursiveGrouping, SpectralNeighborJoining)
from latenttree.exceptions import ParameterError, ShapeError
from latenttree.model import exact_distance_matrix

ALL = (RecursiveGrouping, ChowLiuRecursiveGrouping, NeighborJoining, SpectralNeighborJoining)


@pytest.fixture(scope="module")
def hmm():
    t = build_archetype("hmm", diameter=6)
    return GroundTruthModel(t, make_homogeneous_params(2, 0.3), t.root)


@pytest.fixture(scope="module")
def data(hmm):
    X = sample(hmm, 20_000, seed=0)
    return inject(X, CorruptionSpec("constant_magnitude", 60, 60.0, seed=1), l_max=2)


def test_transform_returns_distance_matrix(hmm, data):
    D = InformationDistance(n1=60, l_max=2).fit_transform(data)
    assert isinstance(D, DistanceMatrix)
    assert D.flag_string == "robust_estimate(60)"
    assert np.abs(D.values - exact_distance_matrix(hmm).values).max() < 0.15


@pytest.mark.parametrize("cls", ALL)
def test_learners_recover_from_data(hmm, data, cls):
    est = cls(n1=60, l_max=2).fit(data)
    assert est.rf_distance(hmm.tree) == 0
    assert est.distances_.n1 == 60
    assert est.to_newick().endswith(";")


@pytest.mark.parametrize("cls", ALL)
def test_precomputed_pipeline(hmm, data, cls):
    pipe = Pipeline([("d", InformationDistance(n1=60, l_max=2)), ("t", cls(metric="precomputed", l_max=2))])
    pipe.fit(data)
    assert pipe.named_steps["t"].rf_distance(hmm.tree) == 0


def test_precomputed_plain_array(hmm):
    D = exact_distance_matrix(hmm).values
    est = RecursiveGrouping(metric="precomputed").fit(D)
    assert est.rf_distance(hmm.tree) == 0


@pytest.mark.parametrize("cls", ALL + (InformationDistance,))
def test_get_params_and_clone(cls):
    est = cls(n1=4)
    params = est.get_params()
    assert params["n1"] == 4
    c = clone(est)
    assert c.get_params() == params and c is not est
    est.set_params(n1=8)
    assert est.n1 == 8


def test_validation_errors(data):
    with pytest.raises(ParameterError, match="even"):
        InformationDistance(n1=3, l_max=2).fit(data)
    with pytest.raises(ShapeError):
        InformationDistance(l_max=5).fit(data)
    with pytest.raises(ParameterError, match="metric"):
        RecursiveGrouping(metric="euclid").fit(data)
    with pytest.raises(ShapeError, match="square"):
        RecursiveGrouping(metric="precomputed").fit(np.zeros((3, 4)))
    with pytest.raises(ValueError):
        InformationDistance(l_max=2).fit(np.full((10, 4), np.nan))
    est = InformationDistance(l_max=2).fit(data)
    with pytest.raises(ShapeError):
        est.transform(data[:, :4])


def test_unfitted():
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        NeighborJoining().to_newick()
    with pytest.raises(NotFittedError):
        InformationDistance().transform(np.zeros((4, 4)))
