"""Sample-complexity and impossibility calculators.

All functions are closed-form evaluations. The concentration constant ``c``
is not known in closed form and is an input (default 1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, fields

from .exceptions import ParameterError

log = logging.getLogger(__name__)

ALGORITHMS = ("rrg", "rnj", "rsnj", "rclrg")
M_CONTRACTION = 2.0 / 9.0

_NEEDS = {
    "rrg": ("l_max", "rho_min", "rho_max", "delta_min", "sigma_max_sq", "V_obs", "eta", "L", "d_max"),
    "rnj": ("l_max", "rho_min", "rho_max", "delta_min", "sigma_max_sq", "V_obs", "eta"),
    "rsnj": ("l_max", "rho_min", "rho_max", "delta_min", "sigma_max_sq", "V_obs", "eta"),
    "rclrg": ("l_max", "rho_min", "rho_max", "delta_min", "sigma_max_sq", "V_obs", "eta", "L", "d_max",
              "Delta_MST"),
}


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the bound calculators; unset fields are ``None``.

    ``N_tau`` defaults to ``V_obs`` and ``epsilon`` to ``rho_min / 2``.
    ``s`` overrides the derived ``d_max**2 + 2 d_max**3 (1 + 2 N_tau)``.
    """

    l_max: int | None = None
    rho_min: float | None = None
    rho_max: float | None = None
    delta_min: float | None = None
    sigma_max_sq: float | None = None
    d_max: int | None = None
    N_tau: int | None = None
    V_obs: int | None = None
    eta: float | None = None
    c: float = 1.0
    L: int | None = None
    Delta_MST: float | None = None
    n1: float | None = None
    n2: float | None = None
    epsilon: float | None = None
    s: float | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name == "L":
                if v < 0:
                    raise ParameterError("L must be non-negative")
            elif f.name in ("n1", "Delta_MST"):
                if v < 0:
                    raise ParameterError(f"{f.name} must be non-negative")
            elif not v > 0:
                raise ParameterError(f"{f.name} must be positive, got {v}")
        if self.eta is not None and not self.eta < 1:
            raise ParameterError("eta must lie in (0, 1)")
        if self.rho_min is not None and self.rho_max is not None and self.rho_min > self.rho_max:
            raise ParameterError("rho_min must not exceed rho_max")

    def require(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ParameterError("missing bound parameter(s): " + ", ".join(missing))

    @property
    def lam(self) -> float:
        self.require("l_max", "rho_max", "delta_min")
        l = self.l_max
        return 2 * l * l * math.exp(self.rho_max / l) / self.delta_min ** (1.0 / l)

    @property
    def kappa(self) -> float:
        self.require("sigma_max_sq", "rho_min")
        return max(self.sigma_max_sq, self.rho_min)

    @property
    def s_value(self) -> float:
        if self.s is not None:
            return self.s
        self.require("d_max")
        d = self.d_max
        n_tau = self.N_tau if self.N_tau is not None else self.V_obs
        if n_tau is None:
            raise ParameterError("missing bound parameter(s): N_tau (or V_obs)")
        return d * d + 2 * d ** 3 * (1 + 2 * n_tau)

    @property
    def eps(self) -> float:
        if self.epsilon is not None:
            return self.epsilon
        self.require("rho_min")
        return self.rho_min / 2

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "BoundParams":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ParameterError("unknown bound parameter(s): " + ", ".join(unknown))
        return cls(**d)


def tail_f(x: float, p: BoundParams) -> float:
    """Two-term exponential tail ``f(x)`` of the distance concentration bound."""
    p.require("l_max", "n1", "n2")
    if not x > 0:
        raise ParameterError("x must be positive")
    if not p.n1 > 0:
        raise ParameterError("tail_f needs n1 > 0")
    lk = p.lam * p.kappa
    l2 = p.l_max ** 2
    return (2 * l2 * math.exp(-(3 * p.n2 / (32 * lk * p.n1)) * x)
            + l2 * math.exp(-p.c * p.n2 * x * x / (4 * lk * lk)))


def tail_h(x: float, layer: int, p: BoundParams) -> float:
    """``s**layer * f(m**layer * x)``: the tail after ``layer`` levels of grouping."""
    if layer < 0:
        raise ParameterError("layer must be non-negative")
    return p.s_value ** layer * tail_f(M_CONTRACTION ** layer * x, p)


def snj_gap_g(V_obs: int, rho_min: float, rho_max: float) -> float:
    if V_obs < 2:
        raise ParameterError("V_obs must be at least 2")
    if not (rho_min > 0 and rho_max > 0):
        raise ParameterError("rho_min and rho_max must be positive")
    tail = 1 - math.exp(-2 * rho_min)
    if math.exp(-2 * rho_max) <= 0.5:
        log.debug("snj_gap_g: power branch")
        return 0.5 * (2 * math.exp(-rho_max)) ** math.log2(V_obs / 2) * math.exp(-rho_max) * tail
    log.debug("snj_gap_g: short-edge branch")
    return math.exp(-3 * rho_max) * tail


def sample_complexity(algorithm: str, p: BoundParams) -> dict:
    """Sufficient ``n2`` and ``n2 / n1`` for exact recovery with probability ``1 - eta``."""
    if algorithm not in ALGORITHMS:
        raise ParameterError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    p.require(*_NEEDS[algorithm])
    lam, kap, c = p.lam, p.kappa, p.c
    l2, V, eta = p.l_max ** 2, p.V_obs, p.eta
    out = {"algorithm": algorithm, "lambda": lam, "kappa": kap}

    if algorithm == "rrg":
        eps, L, s = p.eps, p.L, p.s_value
        grow = 4.5 ** (L - 1)
        n2 = 64 * lam ** 2 * kap ** 2 / (c * eps ** 2) * grow ** 2 * math.log(17 * l2 * s ** (L - 1) * V ** 3 / eta)
        ratio = 128 * lam * kap / (3 * eps) * grow * math.log(34 * l2 * s ** (L - 1) * V ** 3 / eta)
        out.update(s=s, epsilon=eps)
    elif algorithm == "rnj":
        rho = p.rho_min
        n2 = 16 * lam ** 2 * kap ** 2 / (c * rho ** 2) * math.log(2 * V * V * l2 / eta)
        ratio = 64 * lam * kap / (3 * rho) * math.log(4 * V * V * l2 / eta)
    elif algorithm == "rsnj":
        g = snj_gap_g(V, p.rho_min, p.rho_max)
        e = math.exp(p.rho_min)
        n2 = 16 * lam ** 2 * kap ** 2 * V * V / (c * e * e * g * g) * math.log(2 * V * V * l2 / eta)
        ratio = 64 * lam * kap * V / (3 * e * g) * math.log(4 * V * V * l2 / eta)
        out.update(g=g, branch="power" if math.exp(-2 * p.rho_max) <= 0.5 else "short_edge")
    else:
        eps, L, s, delta = p.eps, p.L, p.s_value, p.Delta_MST
        grow = 4.5 ** (L - 1)
        rg_sq, mst_sq = 4 / eps ** 2 * grow ** 2, (1 / delta ** 2 if delta > 0 else math.inf)
        rg_lin, mst_lin = 2 / eps * grow, (1 / delta if delta > 0 else math.inf)
        sL = s ** (L - 1)
        n2 = max(rg_sq, mst_sq) * 16 * lam ** 2 * kap ** 2 / c * math.log((17 * l2 * sL * V ** 3 + l2 * V * V) / eta)
        ratio = max(rg_lin, mst_lin) * 64 * lam * kap / 3 * math.log((34 * l2 * sL * V ** 3 + 2 * l2 * V * V) / eta)
        out.update(s=s, epsilon=eps, dominant="mst" if mst_sq > rg_sq else "grouping")
    out.update(n2_required=n2, n2_over_n1_required=ratio)
    return out


def floor_log3(v: int) -> int:
    L = 0
    while 3 ** (L + 1) <= v:
        L += 1
    return L


def fano_lower_bound(V_obs: int, rho_max: float, l_max: int, delta: float) -> dict:
    """Sample size below which any learner errs with probability at least ``delta``.

    Returns both branch values, their maximum and whether the bound is vacuous
    (non-positive, reported as 0).
    """
    if V_obs < 3:
        raise ParameterError("V_obs must be at least 3")
    if not (rho_max > 0 and l_max > 0):
        raise ParameterError("rho_max and l_max must be positive")
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    L = floor_log3(V_obs)
    num1 = 2 * (1 - delta) * (L * math.log(3) / 3 - 1) - 2 / V_obs
    den1 = -l_max * math.log(1 - math.exp(-rho_max / (L * l_max)))
    num2 = (1 - delta) / 5 - 2 / V_obs
    den2 = -l_max * math.log(1 - math.exp(-2 * rho_max / (3 * l_max)))
    b1, b2 = num1 / den1, num2 / den2
    best = max(b1, b2)
    log.debug("fano_lower_bound: branch %s", 1 if b1 >= b2 else 2)
    return {"value": max(best, 0.0), "branch_1": b1, "branch_2": b2, "L": L,
            "branch": 1 if b1 >= b2 else 2, "vacuous": best <= 0}
