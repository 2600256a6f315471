"""The labelled distance matrix shared by estimators and learners."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError

_FLAG = re.compile(r"^(exact|plain_estimate|robust_estimate)(?:\((\d+)\))?$")


@dataclass(eq=False)
class DistanceMatrix:
    """Symmetric matrix of information distances over ``labels``.

    ``flag`` is ``"exact"``, ``"plain_estimate"`` or ``"robust_estimate"``;
    for robust estimates ``n1`` records the truncation level. ``saturated``
    marks entries that hit the distance cap because a covariance estimate was
    numerically singular.
    """

    labels: tuple[int, ...]
    values: np.ndarray
    flag: str = "exact"
    n1: int = 0
    saturated: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.labels = tuple(int(v) for v in self.labels)
        values = np.array(self.values, dtype=float)
        k = len(self.labels)
        if values.shape != (k, k):
            raise ParameterError(f"values must be {k}x{k}, got {values.shape}")
        if len(set(self.labels)) != k:
            raise ParameterError("labels must be unique")
        if not np.all(np.isfinite(values)):
            raise ParameterError("distance values must be finite")
        if np.any(np.abs(values - values.T) > 1e-12):
            raise ParameterError("distance matrix must be symmetric")
        np.fill_diagonal(values, 0.0)
        self.values = values
        if self.flag not in ("exact", "plain_estimate", "robust_estimate"):
            raise ParameterError(f"unknown distance flag {self.flag!r}")
        if self.saturated is None:
            self.saturated = np.zeros((k, k), dtype=bool)
        else:
            self.saturated = np.asarray(self.saturated, dtype=bool)
        self._index = {v: i for i, v in enumerate(self.labels)}

    def __len__(self):
        return len(self.labels)

    def index(self, label: int) -> int:
        return self._index[label]

    def __call__(self, a: int, b: int) -> float:
        return float(self.values[self._index[a], self._index[b]])

    def is_saturated(self, a: int, b: int) -> bool:
        return bool(self.saturated[self._index[a], self._index[b]])

    def subset(self, labels) -> "DistanceMatrix":
        idx = [self._index[v] for v in labels]
        return DistanceMatrix(tuple(labels), self.values[np.ix_(idx, idx)], self.flag,
                              self.n1, self.saturated[np.ix_(idx, idx)])

    def with_values(self, values) -> "DistanceMatrix":
        return DistanceMatrix(self.labels, values, self.flag, self.n1, self.saturated)

    @property
    def flag_string(self) -> str:
        return f"robust_estimate({self.n1})" if self.flag == "robust_estimate" else self.flag

    def to_dict(self) -> dict:
        out = {
            "labels": list(self.labels),
            "values": self.values.tolist(),
            "flag": self.flag_string,
        }
        if self.saturated.any():
            out["saturated"] = [[int(a), int(b)] for a, b in zip(*np.nonzero(np.triu(self.saturated)))]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "DistanceMatrix":
        for key in ("labels", "values"):
            if key not in d:
                raise ParameterError(f"distance document is missing field '{key}'")
        m = _FLAG.match(str(d.get("flag", "exact")))
        if m is None:
            raise ParameterError(f"field 'flag': unrecognised value {d.get('flag')!r}")
        flag, n1 = m.group(1), int(m.group(2) or 0)
        k = len(d["labels"])
        sat = np.zeros((k, k), dtype=bool)
        for a, b in d.get("saturated", []):
            sat[a, b] = sat[b, a] = True
        try:
            values = np.asarray(d["values"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"field 'values': {exc}") from exc
        return cls(tuple(d["labels"]), values, flag, n1, sat)

    def to_text(self) -> str:
        lines = [" ".join(str(v) for v in self.labels)]
        for row in self.values:
            lines.append(" ".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, flag: str = "exact") -> "DistanceMatrix":
        rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        labels = tuple(int(v) for v in rows[0])
        values = np.array([[float(x) for x in r] for r in rows[1:]])
        return cls(labels, values, flag)
