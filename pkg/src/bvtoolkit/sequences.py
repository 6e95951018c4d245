"""BV norm and metric, Helly selection on a grid, and lower-semicontinuity
experiments for sequences of functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BadParameter, BoundViolated, NotBV, UnsupportedRep
from .funcrep.base import FunctionRep, GridFunction, PiecewiseMonotone, _safe
from .mollify import aitken_limit
from .quadrature import integrate
from .variation import total_variation, total_variation_exact, variation_function


def _finite_variation(rep: FunctionRep) -> float:
    T = total_variation(rep)
    if math.isinf(T):
        raise NotBV(f"{rep!r} has unbounded variation")
    return T


def bv_norm(rep: FunctionRep) -> float:
    """``|f(a)| + T_f[a, b]``."""
    return abs(float(rep(rep.a))) + _finite_variation(rep)


def l1_distance(f: FunctionRep, g: FunctionRep) -> float:
    """``int_a^b |f - g|`` by Gauss-Kronrod, split at both functions' breakpoints."""
    if f.interval != g.interval:
        raise BadParameter(f"f lives on {f.interval}, g on {g.interval}")
    pts = []
    for rep in (f, g):
        if isinstance(rep, PiecewiseMonotone):
            pts.append(rep.t)
        elif hasattr(rep, "breakpoints"):
            pts.append(np.asarray(rep.breakpoints, dtype=float))
    bp = np.unique(np.concatenate(pts)) if pts else ()
    return integrate(lambda x: np.abs(f(x) - g(x)), f.a, f.b, breakpoints=bp)


def d_bv(f: FunctionRep, g: FunctionRep) -> float:
    """``int |f - g| + |T_f - T_g|``."""
    return l1_distance(f, g) + abs(_finite_variation(f) - _finite_variation(g))


# -- families -------------------------------------------------------------------------

@dataclass
class FamilySpec:
    """Members ``generator(n)`` for ``n = 1, 2, ...`` with ``|f(x0)| + T_f <= K``.

    ``x0`` defaults to the left end of each member's interval.  ``K = inf``
    declares no uniform bound (allowed for experiments, not for selection).
    Each member is checked when first generated.
    """

    generator: Callable[[int], FunctionRep]
    K: float = math.inf
    x0: Optional[float] = None
    name: str = "family"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.K > 0:
            raise BadParameter("K must be positive")
        self.member(1)

    def size_of(self, rep: FunctionRep) -> float:
        x0 = rep.a if self.x0 is None else float(self.x0)
        return abs(float(rep(x0))) + total_variation(rep)

    def member(self, n: int) -> FunctionRep:
        n = int(n)
        if n < 1:
            raise BadParameter("members are indexed from 1")
        if n not in self._cache:
            rep = self.generator(n)
            size = self.size_of(rep)
            if size > self.K * (1 + 1e-12):
                raise BoundViolated(f"member {n} of {self.name}: |f(x0)| + T_f = {size} "
                                    f"> K = {self.K}")
            self._cache[n] = rep
        return self._cache[n]

    def members(self, count: int) -> list[FunctionRep]:
        return [self.member(n) for n in range(1, int(count) + 1)]


def _jordan_on_grid(rep: FunctionRep, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nondecreasing parts ``(T_f[a, x] + f) / 2`` and ``(T_f[a, x] - f) / 2`` at the nodes."""
    f = np.asarray(rep(nodes), dtype=float)
    if isinstance(rep, PiecewiseMonotone):
        V = np.asarray(variation_function(rep, nodes), dtype=float)
    else:  # the grid's own cumulative variation
        V = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(f)))])
    return 0.5 * (V + f), 0.5 * (V - f)


@dataclass
class HellySelection:
    """Selected member indices (1-based, increasing) and the limit on the grid.

    ``limit`` holds the values of the last selected member, the tail
    representative of the subsequence; ``spread`` is, per node, the range of
    values over the selected members, which shrinks as the selection converges.
    ``extrapolated`` applies Aitken's delta-squared rule per node to the last
    three selected members (falling back to the last value where the
    differences do not shrink geometrically).
    """

    indices: list
    limit: GridFunction
    spread: np.ndarray
    member_variations: list
    limit_variation: float
    K: float
    extrapolated: Optional[GridFunction] = None
    extrapolated_variation: float = math.nan

    def to_dict(self) -> dict:
        out = {"indices": list(self.indices), "limit": self.limit.samples.tolist(),
               "spread": self.spread.tolist(), "member_variations": self.member_variations,
               "limit_variation": self.limit_variation, "K": self.K}
        if self.extrapolated is not None:
            out["extrapolated"] = self.extrapolated.samples.tolist()
            out["extrapolated_variation"] = self.extrapolated_variation
        return out


def _bisect_select(values: np.ndarray, active: np.ndarray, lo: float, hi: float,
                   depth: int, min_size: int) -> np.ndarray:
    """Nested bisection of ``[lo, hi]`` keeping the fuller half (ties: lower half)
    while that half still has ``min_size`` members."""
    for _ in range(depth):
        mid = 0.5 * (lo + hi)
        v = values[active]
        lower, upper = active[v <= mid], active[v > mid]
        if lower.size >= upper.size:
            chosen, nlo, nhi = lower, lo, mid
        else:
            chosen, nlo, nhi = upper, mid, hi
        if chosen.size < min_size:
            break
        active, lo, hi = chosen, nlo, nhi
    return active


def helly_select(family: FamilySpec, count: int, grid_n: int, *, depth: int = 16,
                 min_size: Optional[int] = None) -> HellySelection:
    """Diagonal selection on ``grid_n`` equally spaced nodes.

    Each member is split into its two nondecreasing Jordan parts; for every
    node in turn, and for each part, the value interval ``[-K, K]`` is bisected
    ``depth`` times keeping the half with more of the surviving members (the
    lower half on ties), as long as at least ``min_size`` members remain.
    """
    if not math.isfinite(family.K):
        raise BadParameter("selection needs a finite uniform bound K")
    if count < 2 or grid_n < 2:
        raise BadParameter("need count >= 2 and grid_n >= 2")
    min_size = max(2, count // 8) if min_size is None else int(min_size)
    members = family.members(count)
    iv = members[0].interval
    if any(m.interval != iv for m in members):
        raise BadParameter("family members live on different intervals")
    nodes = iv.nodes(int(grid_n) - 1)
    parts = [_jordan_on_grid(m, nodes) for m in members]
    P = np.array([p for p, _ in parts])
    N = np.array([q for _, q in parts])
    K = float(family.K)
    active = np.arange(count)
    for j in range(nodes.size):
        for table in (P, N):
            active = _bisect_select(table[:, j], active, -K, K, depth, min_size)
    values = np.array([members[i](nodes) for i in active])
    limit = GridFunction(iv, values[-1], name=f"helly({family.name})")
    member_T = [float(total_variation(m)) for m in members]
    extra = np.array([aitken_limit(values[:, j]) for j in range(nodes.size)])
    extrapolated = GridFunction(iv, extra, name=f"helly_extrapolated({family.name})")
    return HellySelection([int(i) + 1 for i in active], limit,
                          values.max(axis=0) - values.min(axis=0), member_T,
                          float(np.sum(np.abs(np.diff(limit.samples)))), K,
                          extrapolated, float(np.sum(np.abs(np.diff(extra)))))


# -- lower semicontinuity ------------------------------------------------------------

@dataclass
class LSCReport:
    T_limit: float
    member_variations: list
    liminf_estimate: float
    gap: float
    holds: bool
    divergent: bool
    tail_start: int

    def to_dict(self) -> dict:
        def js(v):
            return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")
        return {"T_limit": js(self.T_limit), "member_variations": self.member_variations,
                "liminf_estimate": js(self.liminf_estimate), "gap": js(self.gap),
                "holds": self.holds, "divergent": self.divergent,
                "tail_start": self.tail_start}


def tail_liminf(values, tail_start: Optional[int] = None) -> tuple[float, bool]:
    """Minimum over the tail window (default: last half).

    Returns ``(math.inf, True)`` when the tail is strictly increasing with
    increments that do not shrink (last increment at least half the first),
    read as growth without bound.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise BadParameter("no values")
    start = v.size // 2 if tail_start is None else int(tail_start)
    tail = v[start:]
    if tail.size >= 3:
        inc = np.diff(tail)
        if np.all(inc > 0) and inc[-1] >= 0.5 * inc[0]:
            return math.inf, True
    return float(tail.min()), False


def lsc_experiment(family: FamilySpec, limit_rep: FunctionRep, count: int = 64,
                   tol: float = 1e-9, grid_n: Optional[int] = None) -> LSCReport:
    """Compare ``T`` of the limit with the tail-liminf of member variations.

    Members and the limit are measured exactly; with ``grid_n`` the members
    are first sampled on that many nodes (grid variations are lower bounds).
    """
    if not isinstance(limit_rep, PiecewiseMonotone):
        raise UnsupportedRep("the limit must be an exact representation")
    T_lim = total_variation_exact(limit_rep)
    Ts = []
    for m in family.members(count):
        if grid_n is not None:
            vals = _safe(m, m.interval.nodes(int(grid_n) - 1))
            Ts.append(float(np.sum(np.abs(np.diff(vals)))))
        else:
            Ts.append(float(total_variation(m)))
    start = len(Ts) // 2
    liminf, divergent = tail_liminf(Ts, start)
    gap = liminf - T_lim
    holds = bool(T_lim <= liminf + tol * max(1.0, abs(T_lim)))
    return LSCReport(T_lim, Ts, liminf, gap, holds, divergent, start + 1)


__all__ = [
    "bv_norm", "d_bv", "l1_distance", "FamilySpec", "HellySelection", "helly_select",
    "LSCReport", "lsc_experiment", "tail_liminf",
]
