"""Covariance and information-distance estimates from (possibly corrupted) data.

The robust estimator replaces every inner product between two data columns
by a truncated inner product: the ``n1`` entrywise products of largest
magnitude are discarded before summing. With ``n1 = 0`` it reduces to the
plain second-moment estimator.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .distances import DistanceMatrix
from .exceptions import ParameterError, ShapeError

SIGMA_FLOOR = 1e-12
CAP_PER_DIM = 50.0


def _keep_mask(absq: np.ndarray, n1: int) -> np.ndarray:
    """Rows of ``absq`` are product magnitudes; mark the ``n - n1`` smallest.

    At the cut, equal magnitudes are kept in increasing index order.
    """
    n = absq.shape[1]
    keep = n - n1
    if n1 == 0:
        return np.ones_like(absq, dtype=bool)
    if keep == 0:
        return np.zeros_like(absq, dtype=bool)
    cut = np.partition(absq, keep - 1, axis=1)[:, keep - 1:keep]
    below = absq < cut
    at = absq == cut
    room = keep - below.sum(axis=1, keepdims=True)
    return below | (at & (np.cumsum(at, axis=1) <= room))


def truncated_products_sum(q: np.ndarray, n1: int) -> np.ndarray:
    """Row-wise truncated sums of a ``(P, n)`` array of products."""
    q = np.ascontiguousarray(np.atleast_2d(q), dtype=float)
    if not 0 <= n1 <= q.shape[1]:
        raise ParameterError(f"n1 must lie in [0, n={q.shape[1]}], got {n1}")
    mask = _keep_mask(np.abs(q), n1)
    return np.where(mask, q, 0.0).sum(axis=1)


def truncated_inner_product(a, b, n1: int) -> float:
    """Sum of the ``n - n1`` smallest-magnitude products ``a_i * b_i``."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ShapeError("sequences must have equal length")
    return float(truncated_products_sum((a * b)[None, :], n1)[0])


def _validate(X, l_max, n1):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError("data must be a 2-D array")
    if l_max < 1 or X.shape[1] % l_max:
        raise ShapeError(f"{X.shape[1]} columns is not a multiple of l_max={l_max}")
    n = X.shape[0]
    if not 0 <= n1 < n:
        raise ParameterError(f"need 0 <= n1 < n, got n1={n1}, n={n}")
    return X


_CHUNK_ELEMENTS = 1 << 22


def _block_covariances(Xt, l_max, pairs, n1, n):
    """Estimated ``l_max x l_max`` blocks for a list of node pairs."""
    step = max(1, _CHUNK_ELEMENTS // max(1, l_max * l_max * n))
    out = np.zeros((len(pairs), l_max * l_max))
    for start in range(0, len(pairs), step):
        rows = []
        for i, j in pairs[start:start + step]:
            ci = Xt[i * l_max:(i + 1) * l_max]
            cj = Xt[j * l_max:(j + 1) * l_max]
            rows.append((ci[:, None, :] * cj[None, :, :]).reshape(l_max * l_max, n))
        q = np.concatenate(rows, axis=0)
        out[start:start + len(rows)] = truncated_products_sum(q, n1).reshape(len(rows), -1)
    return (out / (n - n1)).reshape(len(pairs), l_max, l_max)


def robust_covariance(X, i: int, j: int, n1: int, l_max: int = 1, center: bool = False) -> np.ndarray:
    """Truncated-inner-product estimate of the cross-covariance of nodes ``i`` and ``j``."""
    X = _validate(X, l_max, n1)
    if center:
        X = X - X.mean(axis=0)
    Xt = np.ascontiguousarray(X.T)
    return _block_covariances(Xt, l_max, [(i, j)], n1, X.shape[0])[0]


def distance_from_blocks(sij, sii, sjj, l_max: int) -> tuple[float, bool]:
    """Information distance of estimated blocks and whether it saturated."""
    s = np.linalg.svd(sij, compute_uv=False)
    si = np.linalg.svd(sii, compute_uv=False)
    sj = np.linalg.svd(sjj, compute_uv=False)
    cap = CAP_PER_DIM * l_max
    if s.min() <= SIGMA_FLOOR or si.min() <= SIGMA_FLOOR or sj.min() <= SIGMA_FLOOR:
        return cap, True
    d = float(-np.sum(np.log(s)) + 0.5 * np.sum(np.log(si)) + 0.5 * np.sum(np.log(sj)))
    if d > cap:
        return cap, True
    return d, False


def estimate_distance(X, i: int, j: int, n1: int, l_max: int = 1, center: bool = False) -> float:
    X = _validate(X, l_max, n1)
    if center:
        X = X - X.mean(axis=0)
    Xt = np.ascontiguousarray(X.T)
    sij, sii, sjj = _block_covariances(Xt, l_max, [(i, j), (i, i), (j, j)], n1, X.shape[0])
    return distance_from_blocks(sij, sii, sjj, l_max)[0]


def distance_matrix(X, n1: int = 0, l_max: int = 1, labels=None, center: bool = False,
                    n_jobs: int | None = None, clip_negative: bool = True) -> DistanceMatrix:
    """Estimated distances between all observed nodes of a data matrix.

    ``n1 > 0`` selects the robust estimator. Work is split by rows of the
    upper triangle; every pair goes through the same code path, so results
    do not depend on ``n_jobs``. Negative estimates (possible under heavy
    noise) are clipped to zero unless ``clip_negative`` is false.
    """
    X = _validate(X, l_max, n1)
    if center:
        X = X - X.mean(axis=0)
    n, cols = X.shape
    o = cols // l_max
    labels = tuple(range(o)) if labels is None else tuple(labels)
    if len(labels) != o:
        raise ShapeError(f"{len(labels)} labels for {o} nodes")
    Xt = np.ascontiguousarray(X.T)
    diag = _block_covariances(Xt, l_max, [(i, i) for i in range(o)], n1, n)

    def row(i):
        pairs = [(i, j) for j in range(i + 1, o)]
        return _block_covariances(Xt, l_max, pairs, n1, n)

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            blocks = list(pool.map(row, range(o)))
    else:
        blocks = [row(i) for i in range(o)]

    values = np.zeros((o, o))
    sat = np.zeros((o, o), dtype=bool)
    for i in range(o):
        for k, j in enumerate(range(i + 1, o)):
            d, s = distance_from_blocks(blocks[i][k], diag[i], diag[j], l_max)
            if clip_negative and d < 0:
                d = 0.0
            values[i, j] = values[j, i] = d
            sat[i, j] = sat[j, i] = s
    flag = "robust_estimate" if n1 > 0 else "plain_estimate"
    return DistanceMatrix(labels, values, flag, n1, sat)
