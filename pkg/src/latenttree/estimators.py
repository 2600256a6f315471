"""scikit-learn style wrappers.

``InformationDistance`` turns a data matrix into a :class:`DistanceMatrix`;
the tree learners accept either raw data or, with ``metric="precomputed"``,
a distance matrix, so the two chain in a :class:`sklearn.pipeline.Pipeline`::

    Pipeline([("d", InformationDistance(n1=100, l_max=3)),
              ("t", ChowLiuRecursiveGrouping(metric="precomputed", l_max=3))]).fit(X)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .distances import DistanceMatrix
from .estimate import distance_matrix
from .evaluate import rf_distance
from .exceptions import ParameterError, ShapeError
from .reconstruct import LEARNERS, RgConfig


def _check_n1(n1, n_samples):
    if n1 < 0 or n1 % 2:
        raise ParameterError(f"n1 must be an even non-negative integer, got {n1}")
    if n1 >= n_samples:
        raise ParameterError(f"n1={n1} must be smaller than the sample count {n_samples}")


def _validate_data(X, l_max):
    X = check_array(X, dtype=np.float64, ensure_min_samples=2)
    if l_max < 1 or X.shape[1] % l_max:
        raise ShapeError(f"{X.shape[1]} columns is not a multiple of l_max={l_max}")
    return X


def _as_distance_matrix(D) -> DistanceMatrix:
    if isinstance(D, DistanceMatrix):
        return D
    D = check_array(D, dtype=np.float64)
    if D.shape[0] != D.shape[1]:
        raise ShapeError(f"precomputed distances must be square, got {D.shape}")
    return DistanceMatrix(tuple(range(D.shape[0])), D)


class InformationDistance(TransformerMixin, BaseEstimator):
    """Robust (``n1 > 0``) or plain estimate of pairwise information distances.

    ``transform`` maps an ``n x (o * l_max)`` data matrix to an ``o x o``
    :class:`DistanceMatrix`.
    """

    def __init__(self, n1=0, l_max=1, center=False, n_jobs=None, labels=None):
        self.n1 = n1
        self.l_max = l_max
        self.center = center
        self.n_jobs = n_jobs
        self.labels = labels

    def fit(self, X, y=None):
        X = _validate_data(X, self.l_max)
        _check_n1(self.n1, X.shape[0])
        self.n_features_in_ = X.shape[1]
        self.n_nodes_ = X.shape[1] // self.l_max
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _validate_data(X, self.l_max)
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        _check_n1(self.n1, X.shape[0])
        return distance_matrix(X, n1=self.n1, l_max=self.l_max, labels=self.labels,
                               center=self.center, n_jobs=self.n_jobs)


class _TreeLearner(BaseEstimator):
    _algorithm = ""

    def _distances(self, X):
        if self.metric == "precomputed":
            return _as_distance_matrix(X)
        if self.metric != "information":
            raise ParameterError(f"metric must be 'information' or 'precomputed', got {self.metric!r}")
        X = _validate_data(X, self.l_max)
        _check_n1(self.n1, X.shape[0])
        self.n_features_in_ = X.shape[1]
        return distance_matrix(X, n1=self.n1, l_max=self.l_max, center=self.center)

    def _learn(self, D):
        return LEARNERS[self._algorithm](D)

    def fit(self, X, y=None):
        D = self._distances(X)
        self.distances_ = D
        self.learned_ = self._learn(D)
        self.tree_ = self.learned_.tree
        self.provenance_ = self.learned_.provenance
        return self

    def rf_distance(self, truth) -> int:
        check_is_fitted(self, "tree_")
        return rf_distance(self.tree_, truth)

    def to_newick(self) -> str:
        check_is_fitted(self, "tree_")
        return self.learned_.to_newick()


class _GroupingLearner(_TreeLearner):
    def __init__(self, metric="information", n1=0, l_max=1, epsilon=None, tau=None,
                 max_iterations=10_000, center=False):
        self.metric = metric
        self.n1 = n1
        self.l_max = l_max
        self.epsilon = epsilon
        self.tau = tau
        self.max_iterations = max_iterations
        self.center = center

    def _learn(self, D):
        cfg = RgConfig(self.epsilon, self.tau, self.max_iterations)
        return LEARNERS[self._algorithm](D, cfg, l_max=self.l_max)


class _JoiningLearner(_TreeLearner):
    def __init__(self, metric="information", n1=0, l_max=1, center=False):
        self.metric = metric
        self.n1 = n1
        self.l_max = l_max
        self.center = center


class RecursiveGrouping(_GroupingLearner):
    _algorithm = "rg"


class ChowLiuRecursiveGrouping(_GroupingLearner):
    _algorithm = "clrg"


class NeighborJoining(_JoiningLearner):
    _algorithm = "nj"


class SpectralNeighborJoining(_JoiningLearner):
    _algorithm = "snj"
