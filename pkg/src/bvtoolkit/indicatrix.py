"""The Banach indicatrix N(f; y), its level approximations and cN(f; y).

``chi_n(y)`` counts the cells of the depth-n dyadic partition whose
closed-cell oscillation strictly straddles ``y``; its integral is the
oscillation sum over the same cells and increases to ``T_f`` for
continuous f.  ``cN`` counts strict crossings seen on the dyadic nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import UnsupportedRep
from .funcrep.base import CONSTANT, FunctionRep, PiecewiseMonotone, _safe
from .funcrep.special import CantorFunction, OscillatingSine
from .variation import Partition, cell_extrema

# cap on critical points materialised to resolve levels close to 0
_MAX_MATERIALIZE = 1 << 24


@dataclass(frozen=True)
class LevelFunction:
    """``chi_n`` for one depth: the cell extrema and what follows from them."""

    depth: int
    lows: np.ndarray
    highs: np.ndarray

    @property
    def integral(self) -> float:
        return float(np.sum(self.highs - self.lows))

    @property
    def breakpoints(self) -> np.ndarray:
        """Sorted union of all cell minima and maxima (chi_n is constant between)."""
        return np.unique(np.concatenate([self.lows, self.highs]))

    @property
    def counts(self) -> np.ndarray:
        """Value of chi_n on each open interval between consecutive breakpoints."""
        br = self.breakpoints
        if br.size < 2:
            return np.zeros(0, dtype=np.int64)
        return self(0.5 * (br[:-1] + br[1:]))

    def __call__(self, y):
        """``#{i : m_i < y < M_i}``, vectorized over y."""
        live = self.highs > self.lows
        lo = np.sort(self.lows[live])
        hi = np.sort(self.highs[live])
        yy = np.asarray(y, dtype=float)
        out = (np.searchsorted(lo, yy, side="left")
               - np.searchsorted(hi, yy, side="right"))
        return out.astype(np.int64) if np.ndim(out) else int(out)

    def to_dict(self) -> dict:
        br = self.breakpoints
        return {"depth": self.depth, "integral": self.integral,
                "breakpoints": br.tolist(), "counts": self.counts.tolist()}


def banach_level(rep: FunctionRep, n: int, samples: Optional[int] = None) -> LevelFunction:
    """``chi_n`` on ``2**n`` equal cells; black boxes need ``samples`` per cell."""
    edges = Partition.dyadic(rep.interval, n).points
    lo, hi = cell_extrema(rep, edges, samples)
    return LevelFunction(int(n), lo, hi)


def banach_integral_sequence(rep: FunctionRep, depths: Iterable[int],
                             samples: Optional[int] = None) -> list[tuple[int, float]]:
    """``[(n, int chi_n), ...]``."""
    return [(int(n), banach_level(rep, n, samples).integral) for n in depths]


# -- exact counts ------------------------------------------------------------

def _resolve_oscillation(f: PiecewiseMonotone, y: float) -> PiecewiseMonotone:
    """Materialise enough critical points of ``x^p sin(1/x)`` that the
    remaining residual piece cannot reach level ``y``."""
    if not isinstance(f, OscillatingSine):
        raise UnsupportedRep(f"cannot resolve the oscillating piece of {f!r}")
    k = f.n_critical
    while f.peak_bound() >= abs(y):
        k *= 2
        if k > _MAX_MATERIALIZE:
            raise UnsupportedRep(f"level {y} too close to 0 to resolve")
        f = f.materialize(k)
    return f


def level_set(rep: FunctionRep, y: float) -> Optional[np.ndarray]:
    """Sorted solutions of ``f(x) = y``; ``None`` when there are infinitely many."""
    if not isinstance(rep, PiecewiseMonotone):
        raise UnsupportedRep(f"exact level sets need a piecewise-monotone rep, got {rep!r}")
    y = float(y)
    f = rep
    if isinstance(f, CantorFunction):
        # every float in ]0, 1[ is a dyadic rational, whose preimage is a
        # whole removed interval
        if 0.0 < y < 1.0:
            return None
        return np.array([0.0]) if y == 0.0 else (np.array([1.0]) if y == 1.0 else np.zeros(0))
    if f.singular:
        raise UnsupportedRep(f"level sets of singular {f!r} are not supported")
    if f.residual is not None:
        if y == 0.0:
            return None
        f = _resolve_oscillation(f, y)
    roots = list(f.t[f.values == y])
    start, end = f.piece_start(), f.piece_end()
    first = 1 if f.residual is not None else 0
    for i in range(first, f.n_pieces):
        s, e = start[i], end[i]
        if (f.directions[i] == CONSTANT or s == e) and s == y:
            return None
        if min(s, e) < y < max(s, e):
            roots.append(_bracket_root(f, i, y))
    return np.sort(np.asarray(roots, dtype=float))


def _bracket_root(f: PiecewiseMonotone, i: int, y: float) -> float:
    lo, hi = f.t[i], f.t[i + 1]
    g = lambda z: float(_safe(f.func, np.array([z]))[0]) - y  # noqa: E731
    a_in, b_in = np.nextafter(lo, hi), np.nextafter(hi, lo)
    ga, gb = g(a_in), g(b_in)
    if ga == 0.0:
        return float(a_in)
    if gb == 0.0:
        return float(b_in)
    if ga * gb > 0:  # the crossing is within an ulp of a piece end
        return float(a_in if abs(ga) < abs(gb) else b_in)
    return float(brentq(g, a_in, b_in, xtol=1e-15, rtol=1e-15))


def indicatrix_exact(rep: FunctionRep, y: float) -> float:
    """``N(f; y)``: number of solutions of ``f(x) = y`` (``math.inf`` if infinite)."""
    roots = level_set(rep, y)
    return math.inf if roots is None else int(roots.size)


# -- corrected multiplicity ------------------------------------------------------

def crossing_sign(fc: float, fd: float, y: float) -> int:
    """``+1`` if ``f(c) < y < f(d)``, ``-1`` if ``f(c) > y > f(d)``, else 0."""
    if fc < y < fd:
        return 1
    if fc > y > fd:
        return -1
    return 0


def _node_signs(rep: FunctionRep, nodes: np.ndarray, y: float) -> np.ndarray:
    v = rep(nodes) - y
    sign = np.sign(v)
    hits = np.flatnonzero(v == 0)
    if hits.size:
        # move exact hits one ulp toward the interior and look again
        last = nodes.size - 1
        toward = np.where(hits == last, -np.inf, np.inf)
        moved = np.nextafter(nodes[hits], toward)
        sign[hits] = np.sign(rep(moved) - y)
    return sign


def corrected_multiplicity(rep: FunctionRep, y: float, n: int) -> int:
    """Strict crossings of level ``y`` between depth-``n`` dyadic nodes.

    Scanning left to right, every change between the nonzero signs of
    ``f - y`` closes one interval ``J`` with ``Phi(f; J, y) != 0``; those
    intervals do not overlap, so the count is a lower bound for cN, exact
    once the grid separates the crossings.
    """
    nodes = Partition.dyadic(rep.interval, n).points
    sign = _node_signs(rep, nodes, float(y))
    sign = sign[sign != 0]
    return int(np.count_nonzero(sign[1:] != sign[:-1]))


def y_grid(rep: FunctionRep, cells: int = 1024, pad: float = 0.01,
           depth: int = 12, samples: Optional[int] = None) -> np.ndarray:
    """``cells + 1`` levels over ``[m - pad (M - m), M + pad (M - m)]``."""
    lo, hi = cell_extrema(rep, Partition.dyadic(rep.interval, depth).points, samples)
    m, M = float(lo.min()), float(hi.max())
    width = M - m if M > m else 1.0
    return np.linspace(m - pad * width, M + pad * width, int(cells) + 1)


def indicatrix_table(rep: FunctionRep, n: int, ys=None, *, with_exact: bool = True,
                     samples: Optional[int] = None) -> list[tuple[float, float, int, int]]:
    """Rows ``(y, N, cN, chi_n)`` over a level grid."""
    ys = y_grid(rep, samples=samples) if ys is None else np.asarray(ys, dtype=float)
    level = banach_level(rep, n, samples)
    chi = level(ys)
    rows = []
    exact_ok = with_exact and isinstance(rep, PiecewiseMonotone)
    for y, c in zip(ys, chi):
        N = math.nan
        if exact_ok:
            try:
                N = indicatrix_exact(rep, float(y))
            except UnsupportedRep:
                N = math.nan
        rows.append((float(y), N, corrected_multiplicity(rep, float(y), n), int(c)))
    return rows


__all__ = [
    "LevelFunction", "banach_level", "banach_integral_sequence", "indicatrix_exact",
    "level_set", "corrected_multiplicity", "crossing_sign", "y_grid", "indicatrix_table",
]
