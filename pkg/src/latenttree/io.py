"""File formats for data matrices and JSON documents."""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .exceptions import ParameterError, ShapeError

_HEADER = re.compile(r"^node_(\d+)_coord_(\d+)$")


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def data_header(labels, l_max: int) -> list[str]:
    return [f"node_{v}_coord_{s}" for v in labels for s in range(l_max)]


def write_data_csv(path, X, labels=None, l_max: int = 1):
    """CSV with a ``node_<id>_coord_<s>`` header and round-trip precision."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] % l_max:
        raise ShapeError(f"{X.shape[1]} columns is not a multiple of l_max={l_max}")
    if labels is None:
        labels = range(X.shape[1] // l_max)
    header = ",".join(data_header(labels, l_max))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in X:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def read_data_csv(path):
    """Return ``(X, labels, l_max)`` from a CSV written by :func:`write_data_csv`."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.split(",") for line in fh if line.strip()]
    cols = []
    for k, name in enumerate(header):
        m = _HEADER.match(name)
        if not m:
            raise ParameterError(f"{path}: header column {k} ({name!r}) is not node_<i>_coord_<s>")
        cols.append((int(m.group(1)), int(m.group(2))))
    l_max = 1 + max(s for _, s in cols) if cols else 1
    labels = list(dict.fromkeys(v for v, _ in cols))
    if cols != [(v, s) for v in labels for s in range(l_max)]:
        raise ShapeError(f"{path}: header is not grouped as consecutive coordinates per node")
    try:
        X = np.array(rows, dtype=float).reshape(len(rows), len(header))
    except ValueError as exc:
        raise ShapeError(f"{path}: rows do not match the {len(header)}-column header") from exc
    return X, labels, l_max


def write_data_binary(path, X):
    """Little-endian ``uint32 n, uint32 cols`` header followed by row-major f64."""
    X = np.atleast_2d(np.asarray(X, dtype="<f8"))
    with open(path, "wb") as fh:
        fh.write(np.array(X.shape, dtype="<u4").tobytes())
        fh.write(np.ascontiguousarray(X).tobytes())


def read_data_binary(path):
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise ShapeError(f"{path}: missing 8-byte header")
    n, cols = (int(v) for v in np.frombuffer(raw[:8], dtype="<u4"))
    body = np.frombuffer(raw[8:], dtype="<f8")
    if body.size != n * cols:
        raise ShapeError(f"{path}: header says {n}x{cols} but payload holds {body.size} values")
    return body.reshape(n, cols).astype(float)


def read_data(path, l_max: int | None = None):
    """Load CSV or binary data; returns ``(X, labels, l_max)``."""
    if str(path).endswith(".csv"):
        X, labels, lm = read_data_csv(path)
        if l_max is not None and l_max != lm:
            raise ShapeError(f"{path}: header implies l_max={lm}, expected {l_max}")
        return X, labels, lm
    X = read_data_binary(path)
    lm = l_max or 1
    if X.shape[1] % lm:
        raise ShapeError(f"{path}: {X.shape[1]} columns is not a multiple of l_max={lm}")
    return X, list(range(X.shape[1] // lm)), lm


def write_data(path, X, labels=None, l_max: int = 1):
    if str(path).endswith(".csv"):
        write_data_csv(path, X, labels, l_max)
    else:
        write_data_binary(path, X)
