"""Essential variation on grid data and the admissible representatives of Df.

A Lebesgue-null exceptional set is modelled by a finite set of grid indices.
The variation "after discarding M" is the variation of the surviving samples
taken in order, which is exactly the supremum over partitions avoiding M.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.ndimage import median_filter

from .errors import BadParameter, DegenerateGrid, EmptyCandidates
from .funcrep.base import (BlackBox, FunctionRep, GridFunction, PiecewiseMonotone, _safe,
                           as_interval, split_monotone)
from .measure import (FiniteSignedMeasure, _density_cumulative, derivative_measure,
                      integrate_against)
from .quadrature import integrate

# exhaustive subset search limits
EXHAUSTIVE_MAX_N = 40
EXHAUSTIVE_MAX_SIZE = 3


@dataclass(frozen=True)
class CorruptedGrid:
    """Grid samples plus a finite exceptional index set ``corrupt``."""

    base: GridFunction
    corrupt: tuple = ()

    def __post_init__(self):
        idx = tuple(sorted({int(i) for i in self.corrupt}))
        n = self.base.samples.size
        if any(i < 0 or i >= n for i in idx):
            raise BadParameter(f"corrupt indices must lie in [0, {n - 1}]")
        if n - len(idx) < 2:
            raise DegenerateGrid("need at least two surviving samples")
        object.__setattr__(self, "corrupt", idx)

    @property
    def survivors(self) -> np.ndarray:
        mask = np.ones(self.base.samples.size, dtype=bool)
        mask[list(self.corrupt)] = False
        return np.flatnonzero(mask)

    def to_dict(self) -> dict:
        return {"interval": [self.base.a, self.base.b],
                "samples": self.base.samples.tolist(), "corrupt": list(self.corrupt)}

    @classmethod
    def from_dict(cls, obj: dict) -> "CorruptedGrid":
        try:
            iv = obj.get("interval", [0.0, 1.0])
            return cls(GridFunction(as_interval(iv), obj["samples"]),
                       tuple(obj.get("corrupt", ())))
        except (KeyError, TypeError, ValueError) as exc:
            raise BadParameter(f"malformed corrupted grid: {exc}") from exc


def restricted_variation(cg: CorruptedGrid) -> float:
    """``sum |Delta|`` over consecutive surviving samples."""
    s = cg.base.samples[cg.survivors]
    return float(np.sum(np.abs(np.diff(s))))


def _as_corrupted(base: GridFunction, M) -> CorruptedGrid:
    return CorruptedGrid(base, tuple(M))


@dataclass(frozen=True)
class PhiResult:
    """Minimal restricted variation found and the set achieving it.

    ``exact`` is False when ``value`` is only an upper bound for the
    minimum over the searched family.
    """

    value: float
    corrupt: tuple
    method: str
    exact: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "corrupt": list(self.corrupt),
                "method": self.method, "exact": self.exact}


def phi_min(base: GridFunction, candidates: Iterable[Iterable[int]]) -> tuple[float, tuple]:
    """Minimum restricted variation over candidate sets; the first minimiser wins."""
    best: Optional[tuple[float, tuple]] = None
    for M in candidates:
        cg = _as_corrupted(base, M)
        v = restricted_variation(cg)
        if best is None or v < best[0]:
            best = (v, cg.corrupt)
    if best is None:
        raise EmptyCandidates("no candidate sets")
    return best


def _check_size(n: int, max_size: int) -> int:
    if max_size < 0:
        raise BadParameter("max_size must be >= 0")
    if n < 2:
        raise DegenerateGrid("need at least two samples")
    return min(int(max_size), n - 2)


# The exceptional set lives in the open interval: by default the searches
# below only discard interior samples, keeping both end samples.


def phi_exhaustive(base: GridFunction, max_size: int, interior: bool = True) -> PhiResult:
    """All index subsets of size ``<= max_size``; ties go to the
    lexicographically smallest set.  Limited to small grids."""
    n = base.samples.size
    k = _check_size(n, max_size)
    pool = range(1, n - 1) if interior else range(n)
    if n > EXHAUSTIVE_MAX_N or k > EXHAUSTIVE_MAX_SIZE:
        raise BadParameter(f"exhaustive search is limited to n <= {EXHAUSTIVE_MAX_N} and "
                           f"|M| <= {EXHAUSTIVE_MAX_SIZE}")
    best_v, best_M = math.inf, ()
    s = base.samples
    for size in range(k + 1):
        for M in itertools.combinations(pool, size):
            keep = np.ones(n, dtype=bool)
            keep[list(M)] = False
            v = float(np.sum(np.abs(np.diff(s[keep]))))
            if v < best_v or (v == best_v and M < best_M):
                best_v, best_M = v, M
    return PhiResult(best_v, tuple(best_M), "exhaustive", True)


def phi_dynamic(base: GridFunction, max_size: int, interior: bool = True) -> PhiResult:
    """Exact minimum over all subsets of size ``<= max_size``.

    With at most k removals, consecutive survivors are at most ``k + 1``
    indices apart, so a chain recursion over (last survivor, removals so far)
    visits ``O(n k^2)`` transitions.  Ties prefer fewer removals, then the
    nearer predecessor.
    """
    s = base.samples
    n = s.size
    k = _check_size(n, max_size)
    INF = math.inf
    best = np.full((n, k + 1), INF)
    prev = np.full((n, k + 1, 2), -1, dtype=np.int64)  # (predecessor, its removal count)
    for first in range((0 if interior else min(k, n - 1)) + 1):
        best[first, first] = 0.0
    for i in range(1, n):
        for j in range(k + 1):
            cur, arg = best[i, j], (-1, -1)
            for r in range(0, j + 1):
                p = i - 1 - r
                if p < 0:
                    break
                cand = best[p, j - r] + abs(s[i] - s[p])
                if cand < cur:
                    cur, arg = cand, (p, j - r)
            if arg[0] >= 0:
                best[i, j] = cur
                prev[i, j] = arg
    val, end, used = INF, -1, -1
    last_end = n - 2 if interior else max(n - 2 - k, 0)
    for e in range(n - 1, last_end, -1):
        trailing = n - 1 - e
        for j in range(0, k - trailing + 1):
            v = best[e, j]
            if v < val or (v == val and j + trailing < used + (n - 1 - end)):
                val, end, used = v, e, j
    survivors = []
    i, j = end, used
    while i >= 0:
        survivors.append(i)
        i, j = prev[i, j]
    keep = set(survivors)
    M = tuple(x for x in range(n) if x not in keep)
    return PhiResult(float(val), M, "dynamic", True)


def phi_greedy(base: GridFunction, max_size: int, interior: bool = True) -> PhiResult:
    """Remove, one at a time, the sample whose removal lowers the restricted
    variation most; stops early when nothing helps.  An upper bound."""
    s = base.samples
    n = s.size
    k = _check_size(n, max_size)
    alive = np.ones(n, dtype=bool)
    removed: list[int] = []
    for _ in range(k):
        idx = np.flatnonzero(alive)
        v = s[idx]
        gain = np.zeros(idx.size)
        gain[0] = -np.inf if interior else abs(v[1] - v[0])
        gain[-1] = -np.inf if interior else abs(v[-1] - v[-2])
        if idx.size > 2:
            gain[1:-1] = (np.abs(v[1:-1] - v[:-2]) + np.abs(v[2:] - v[1:-1])
                          - np.abs(v[2:] - v[:-2]))
        pick = int(np.argmax(gain))
        if gain[pick] <= 0.0 or idx.size <= 2:
            break
        alive[idx[pick]] = False
        removed.append(int(idx[pick]))
    M = tuple(sorted(removed))
    return PhiResult(restricted_variation(_as_corrupted(base, M)), M, "greedy", False)


def phi_search(base: GridFunction, max_size: int, method: str = "auto",
               interior: bool = True) -> PhiResult:
    """Minimum restricted variation over subsets of size ``<= max_size``.

    ``auto`` enumerates small problems and uses the exact recursion otherwise.
    """
    n = base.samples.size
    if method == "auto":
        small = n <= EXHAUSTIVE_MAX_N and max_size <= EXHAUSTIVE_MAX_SIZE
        method = "exhaustive" if small else "dynamic"
    if method == "exhaustive":
        return phi_exhaustive(base, max_size, interior)
    if method == "dynamic":
        return phi_dynamic(base, max_size, interior)
    if method == "greedy":
        return phi_greedy(base, max_size, interior)
    raise BadParameter(f"unknown method {method!r}")


# -- essential variation from data ---------------------------------------------------

WINDOW = 5
THRESHOLD = 6.0


def outlier_mask(g: GridFunction, window: int = WINDOW, k: float = THRESHOLD) -> np.ndarray:
    """Samples deviating from their running median by more than ``k`` MADs.

    The MAD is the median absolute deviation of the residuals; a floor of
    ``1e-9`` times the data range keeps exactly-clean data from flagging
    rounding noise.
    """
    s = np.asarray(g.samples, dtype=float)
    if s.size < 8:
        raise DegenerateGrid("need at least 8 samples")
    filt = median_filter(s, size=int(window), mode="nearest")
    r = s - filt
    mad = float(np.median(np.abs(r - np.median(r))))
    floor = 1e-9 * max(1.0, float(np.ptp(filt)))
    return np.abs(r) > max(k * mad, floor)


def essential_variation_estimate(g: GridFunction, window: int = WINDOW,
                                 k: float = THRESHOLD) -> float:
    """Variation over the samples that look like points of approximate continuity."""
    bad = outlier_mask(g, window, k)
    if np.count_nonzero(~bad) < 2:
        raise DegenerateGrid("fewer than two samples survive the outlier filter")
    return restricted_variation(CorruptedGrid(g, tuple(np.flatnonzero(bad))))


# -- admissible representatives -------------------------------------------------------

@dataclass(frozen=True)
class AdmissiblePair:
    """``f_left = C + mu(]a, x[)`` and ``f_right = C + mu(]a, x]``."""

    f_left: FunctionRep
    f_right: FunctionRep
    C: float
    measure: FiniteSignedMeasure

    def blend(self, theta: float) -> FunctionRep:
        """``theta f_left + (1 - theta) f_right``."""
        theta = float(theta)
        if not 0.0 <= theta <= 1.0:
            raise BadParameter("theta must lie in [0, 1]")
        return _representative(self.measure, self.C, theta)


def _representative(mu: FiniteSignedMeasure, C: float, theta: float) -> FunctionRep:
    """``C + theta mu(]a, x[) + (1 - theta) mu(]a, x]``, with ``C`` at a and
    ``C + mu(]a, b[)`` at b."""
    a, b = mu.a, mu.b
    name = f"rep(theta={theta:g})"
    locs = np.array([x for x, _ in mu.atoms])
    wts = np.array([w for _, w in mu.atoms])
    cw = np.concatenate([[0.0], np.cumsum(wts)])

    def cont(x):
        # continuous part of mu(]a, x[); x in [a, b]
        x = np.asarray(x, dtype=float)
        out = _density_cumulative(mu, x)
        for part in mu.singular_parts:
            out = out + np.asarray(part.cdf(x), dtype=float)
        return np.where(x > a, out, 0.0)

    def func(x):
        # value off the atoms: no atom sits at x
        x = np.asarray(x, dtype=float)
        n_before = np.searchsorted(locs, x, side="left") if locs.size else 0
        return C + cont(x) + cw[n_before]

    if mu.singular_parts or mu.oscillatory:
        def blended(x):
            x = np.asarray(x, dtype=float)
            lo = np.searchsorted(locs, x, side="left") if locs.size else 0
            hi = np.searchsorted(locs, x, side="right") if locs.size else 0
            return C + cont(x) + theta * cw[lo] + (1 - theta) * cw[hi]
        return BlackBox(mu.interval, blended, breakpoints=locs, name=name)

    deriv = (lambda x: np.zeros(np.shape(x))) if mu.density is None else (
        lambda x: _safe(mu.density, x))
    seeds = np.union1d(np.union1d(mu.density_breakpoints, locs), [a, b])
    t, dirs = split_monotone(seeds, func, deriv)
    at_t = C + cont(t)
    n_before = np.searchsorted(locs, t, side="left") if locs.size else np.zeros(t.size, int)
    n_upto = np.searchsorted(locs, t, side="right") if locs.size else np.zeros(t.size, int)
    left = at_t + cw[n_before]
    right = at_t + cw[n_upto]
    values = theta * left + (1 - theta) * right
    return PiecewiseMonotone(t, func, dirs, left=left, values=values, right=right,
                             deriv=deriv, name=name)


def admissible_representatives(mu: FiniteSignedMeasure, C: float = 0.0) -> AdmissiblePair:
    """The left- and right-continuous primitives of ``mu`` (plus ``C``)."""
    C = float(C)
    return AdmissiblePair(_representative(mu, C, 1.0), _representative(mu, C, 0.0), C, mu)


# -- distributional pairing -------------------------------------------------------------

def distributional_pairing(f: PiecewiseMonotone, phi: FunctionRep, dphi,
                           depth: int = 16) -> tuple[float, float]:
    """``(int f phi', -int phi dDf)`` for a test function phi vanishing at both ends.

    The two agree for BV f; this is the defining identity of Df.  For
    singular f the left side uses a fixed composite rule on ``2**depth`` cells.
    """
    if abs(float(phi(phi.a))) > 1e-12 or abs(float(phi(phi.b))) > 1e-12:
        raise BadParameter("the test function must vanish at both ends")
    integrand = lambda x: f(x) * _safe(dphi, x)  # noqa: E731
    if f.singular:
        # adaptive quadrature stalls on a staircase: composite Gauss-Legendre
        # on 2**depth cells, error about T_f * sup|phi'| * 2**-depth
        u, w = np.polynomial.legendre.leggauss(4)
        edges = f.interval.nodes(1 << depth)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        x = mid[:, None] + half[:, None] * u[None, :]
        lhs = float(np.sum(integrand(x.ravel()).reshape(x.shape) * w[None, :] * half[:, None]))
    else:
        lhs = integrate(integrand, f.a, f.b, breakpoints=f.t)
    rhs = -integrate_against(phi, derivative_measure(f), depth)
    return float(lhs), float(rhs)


__all__ = [
    "CorruptedGrid", "PhiResult", "AdmissiblePair", "restricted_variation", "phi_min",
    "phi_exhaustive", "phi_dynamic", "phi_greedy", "phi_search", "outlier_mask",
    "essential_variation_estimate", "admissible_representatives", "distributional_pairing",
    "WINDOW", "THRESHOLD", "EXHAUSTIVE_MAX_N", "EXHAUSTIVE_MAX_SIZE",
]
