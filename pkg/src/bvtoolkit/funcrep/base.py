"""Function representations on a closed interval.

Every exact-capable representation is a :class:`PiecewiseMonotone`: strictly
increasing breakpoints ``t_0 < ... < t_m``, one vectorized evaluator valid on
the open pieces, a monotonicity flag per piece and an explicit
``(left limit, value, right limit)`` triple at every breakpoint.  Step
functions, point spikes and sampled grids are specialisations of it, so the
variation, jump and indicatrix machinery only needs to understand one layout.
:class:`BlackBox` is the escape hatch for functions known only through an
evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import BadParameter, DomainError

INCREASING = 1
DECREASING = -1
CONSTANT = 0
OSCILLATING = 2  # unresolved piece whose variation is supplied by a Residual

_DIRECTION_NAMES = {INCREASING: "increasing", DECREASING: "decreasing",
                    CONSTANT: "constant", OSCILLATING: "oscillating"}


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise BadParameter(f"interval endpoints must be finite: [{self.a}, {self.b}]")
        if not self.a < self.b:
            raise BadParameter(f"need a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def __contains__(self, x) -> bool:
        return self.a <= x <= self.b

    def nodes(self, n: int) -> np.ndarray:
        """``n + 1`` uniform nodes ``a + i (b - a) / n`` with exact endpoints."""
        x = self.a + np.arange(n + 1) * (self.length / n)
        x[0], x[-1] = self.a, self.b
        return x


def as_interval(value) -> Interval:
    if isinstance(value, Interval):
        return value
    a, b = value
    return Interval(float(a), float(b))


@dataclass(frozen=True)
class Residual:
    """Variation bookkeeping for an unresolved first piece ``[t_0, t_1]``.

    ``variation(x)`` is the total variation of the evaluator over ``[t_0, x]``
    for ``t_0 <= x <= t_1``; it may be ``inf``.
    """

    variation: Callable[[float], float]
    samples: int = 2049

    def shifted(self, start: float) -> "Residual":
        base = self.variation(start)
        return Residual(lambda x, _v=self.variation: _v(x) - base, self.samples)


class FunctionRep:
    """A real function on ``interval``; call it with scalars or arrays."""

    interval: Interval
    name: Optional[str] = None

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).ravel()
        flat = self._check_domain(flat)
        out = np.asarray(self._eval(flat), dtype=float).reshape(np.atleast_1d(arr).shape)
        return float(out[0]) if scalar else out

    def _check_domain(self, x: np.ndarray) -> np.ndarray:
        a, b = self.interval.a, self.interval.b
        slack = 8 * np.finfo(float).eps * max(1.0, abs(a), abs(b))
        if x.size and (np.any(~np.isfinite(x)) or x.min() < a - slack or x.max() > b + slack):
            bad = x[(x < a - slack) | (x > b + slack) | ~np.isfinite(x)][0]
            raise DomainError(f"x = {bad!r} outside [{a}, {b}]")
        return np.clip(x, a, b)

    def _eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def a(self) -> float:
        return self.interval.a

    @property
    def b(self) -> float:
        return self.interval.b

    def __repr__(self) -> str:
        label = self.name or type(self).__name__
        return f"<{label} on [{self.a:g}, {self.b:g}]>"


def evaluate(rep: FunctionRep, x: float) -> float:
    """``f(x)``; raises :class:`DomainError` outside the interval."""
    return float(rep(float(x)))


class BlackBox(FunctionRep):
    """A function known only through its evaluator.

    ``breakpoints`` are optional hints (kinks, jumps) used by quadrature and by
    the refinement estimator.  ``right_deriv``/``left_deriv`` give exact
    one-sided derivatives where the caller knows them.
    """

    def __init__(self, interval, func, *, right_deriv=None, left_deriv=None,
                 breakpoints: Sequence[float] = (), continuous: Optional[bool] = None,
                 name: Optional[str] = None):
        self.interval = as_interval(interval)
        self.func = func
        self.right_deriv = right_deriv
        self.left_deriv = left_deriv
        self.breakpoints = np.asarray(sorted(breakpoints), dtype=float)
        self.continuous = continuous
        self.name = name

    def _eval(self, x):
        return np.broadcast_to(np.asarray(self.func(x), dtype=float), x.shape)


def _safe(func, x):
    with np.errstate(all="ignore"):
        return np.asarray(func(x), dtype=float)


class PiecewiseMonotone(FunctionRep):
    """Monotone pieces between breakpoints, with one-sided limits stored.

    Parameters
    ----------
    breakpoints : strictly increasing, spanning the interval.
    func : vectorized evaluator, valid on every open piece and extending
        continuously to each piece's closure.
    directions : one flag per piece (INCREASING, DECREASING, CONSTANT, or
        OSCILLATING for an unresolved first piece described by ``residual``).
    left, values, right : limits and point values at the breakpoints; default
        to ``func`` at the breakpoints (continuous function).
    deriv : optional derivative evaluator on open pieces.
    antiderivative : optional ``G`` with ``G(t_0) = 0`` and ``G' = f`` a.e.
    """

    singular = False  # True when f' = 0 a.e. does not mean f is constant

    def __init__(self, breakpoints, func, directions, *, left=None, values=None,
                 right=None, deriv=None, antiderivative=None,
                 residual: Optional[Residual] = None, name: Optional[str] = None):
        t = np.array(breakpoints, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise BadParameter("need at least two breakpoints")
        if not np.all(np.diff(t) > 0):
            raise BadParameter("breakpoints must be strictly increasing")
        dirs = np.array(directions, dtype=np.int8).reshape(-1)
        if dirs.size != t.size - 1:
            raise BadParameter("need one direction per piece")
        if np.any(dirs[1:] == OSCILLATING) or (dirs[0] == OSCILLATING) != (residual is not None):
            raise BadParameter("only the first piece may be oscillating, and it needs a residual")
        at_t = None
        if left is None or values is None or right is None:
            at_t = _safe(func, t)
        self.t = t
        self.func = func
        self.directions = dirs
        self.left = np.array(at_t if left is None else left, dtype=float)
        self.values = np.array(at_t if values is None else values, dtype=float)
        self.right = np.array(at_t if right is None else right, dtype=float)
        self.left[0] = self.values[0]
        self.right[-1] = self.values[-1]
        for arr in (self.t, self.directions, self.left, self.values, self.right):
            arr.setflags(write=False)
        if not (np.all(np.isfinite(self.left)) and np.all(np.isfinite(self.values))
                and np.all(np.isfinite(self.right))):
            raise BadParameter("breakpoint triples must be finite")
        self.deriv = deriv
        self.antiderivative = antiderivative
        self.residual = residual
        self.interval = Interval(float(t[0]), float(t[-1]))
        self.name = name

    # -- evaluation -------------------------------------------------------
    def _locate(self, x):
        idx = np.searchsorted(self.t, x)
        hit = idx < self.t.size
        hit[hit] = self.t[idx[hit]] == x[hit]
        return idx, hit

    def _eval(self, x):
        idx, hit = self._locate(x)
        out = np.empty(x.shape)
        out[hit] = self.values[idx[hit]]
        if not hit.all():
            out[~hit] = _safe(self.func, x[~hit])
        return out

    def left_limit(self, x):
        return self._limit(x, self.left)

    def right_limit(self, x):
        return self._limit(x, self.right)

    def _limit(self, x, table):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        arr = self._check_domain(arr)
        idx, hit = self._locate(arr)
        out = np.empty(arr.shape)
        out[hit] = table[idx[hit]]
        if not hit.all():
            out[~hit] = _safe(self.func, arr[~hit])
        return float(out[0]) if np.ndim(x) == 0 else out

    # -- structure --------------------------------------------------------
    @property
    def n_pieces(self) -> int:
        return self.t.size - 1

    def piece_start(self) -> np.ndarray:
        """Limit of f at the left end of each piece, from inside the piece."""
        return self.right[:-1]

    def piece_end(self) -> np.ndarray:
        return self.left[1:]

    def direction_names(self):
        return [_DIRECTION_NAMES[int(d)] for d in self.directions]

    def piece_variation(self) -> np.ndarray:
        """Variation of f over each open piece."""
        var = np.abs(self.piece_end() - self.piece_start())
        if self.residual is not None:
            var = var.copy()
            var[0] = self.residual.variation(self.t[1])
        return var

    def jump_terms(self) -> tuple[np.ndarray, np.ndarray]:
        """``|f(t) - f(t-)|`` and ``|f(t+) - f(t)|`` at each breakpoint."""
        return np.abs(self.values - self.left), np.abs(self.right - self.values)

    def breakpoints_at_depth(self, depth: int) -> np.ndarray:
        """Breakpoints to merge into a refinement partition at ``depth``."""
        return self.t

    def is_continuous(self, tol: float = 0.0) -> bool:
        lj, rj = self.jump_terms()
        return bool(np.all(lj <= tol) and np.all(rj <= tol))

    def restrict(self, c: float, d: float) -> "PiecewiseMonotone":
        """The same function on ``[c, d]``."""
        if not (self.a <= c < d <= self.b):
            raise DomainError(f"[{c}, {d}] not inside [{self.a}, {self.b}]")
        inner = (self.t > c) & (self.t < d)
        t = np.concatenate([[c], self.t[inner], [d]])
        vc, vd = float(self(c)), float(self(d))
        left = np.concatenate([[vc], self.left[inner], [self.left_limit(d)]])
        right = np.concatenate([[self.right_limit(c)], self.right[inner], [vd]])
        values = np.concatenate([[vc], self.values[inner], [vd]])
        first = int(np.searchsorted(self.t, c, side="right")) - 1
        dirs = self.directions[first:first + t.size - 1]
        residual = None
        if dirs[0] == OSCILLATING:
            residual = self.residual.shifted(c) if c > self.t[0] else self.residual
        anti = None
        if self.antiderivative is not None:
            g0 = float(self.antiderivative(c))
            anti = lambda x, _g=self.antiderivative: np.asarray(_g(x)) - g0  # noqa: E731
        out = PiecewiseMonotone(t, self.func, dirs, left=left, values=values, right=right,
                                deriv=self.deriv, antiderivative=anti, residual=residual,
                                name=self.name)
        out.singular = self.singular
        return out

    def cell_extrema(self, edges) -> tuple[np.ndarray, np.ndarray]:
        """Exact ``inf`` and ``sup`` of f over each closed cell ``[e_k, e_k+1]``.

        Monotone pieces attain their extremes at piece ends, so candidates
        are the cell edges, the one-sided limits at the edges from inside the
        cell and every breakpoint triple strictly inside.  Cells overlapping
        an oscillating first piece add a dense sample of that piece.
        """
        e = np.asarray(edges, dtype=float)
        fe = self(e)
        lo = np.minimum(fe[:-1], fe[1:])
        hi = np.maximum(fe[:-1], fe[1:])
        inner_r = self.right_limit(e[:-1])
        inner_l = self.left_limit(e[1:])
        lo = np.minimum(lo, np.minimum(inner_r, inner_l))
        hi = np.maximum(hi, np.maximum(inner_r, inner_l))
        cell = np.searchsorted(e, self.t, side="right") - 1
        ok = (cell >= 0) & (cell < e.size - 1)
        ok[ok] &= self.t[ok] > e[cell[ok]]
        cell_ok = cell[ok]
        for table in (self.left, self.values, self.right):
            np.minimum.at(lo, cell_ok, table[ok])
            np.maximum.at(hi, cell_ok, table[ok])
        if self.residual is not None:
            t0, t1 = self.t[0], self.t[1]
            touched = np.flatnonzero((e[:-1] < t1) & (e[1:] > t0))
            for k in touched:
                s = np.linspace(max(e[k], t0), min(e[k + 1], t1), self.residual.samples)
                fs = _safe(self.func, s[(s > t0) & (s < t1)])
                if fs.size:
                    lo[k] = min(lo[k], fs.min())
                    hi[k] = max(hi[k], fs.max())
        return lo, hi

    def as_piecewise(self) -> "PiecewiseMonotone":
        return self


def bisect_sign_change(func, lo, hi, max_iter: int = 200) -> np.ndarray:
    """Vectorized bisection: for each bracket with ``func(lo) * func(hi) < 0``
    return a point where the sign of ``func`` changes, to within an ulp."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    s_lo = np.sign(_safe(func, lo))
    active = np.ones(lo.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        mid = 0.5 * (lo[active] + hi[active])
        stuck = (mid <= lo[active]) | (mid >= hi[active])
        s_mid = np.sign(_safe(func, mid))
        idx = np.flatnonzero(active)
        zero = s_mid == 0
        left = (s_mid == s_lo[idx]) & ~zero
        lo[idx[left]] = mid[left]
        hi[idx[~left & ~zero]] = mid[~left & ~zero]
        lo[idx[zero]] = hi[idx[zero]] = mid[zero]
        active[idx[stuck | zero]] = False
    return 0.5 * (lo + hi)


def split_monotone(t, func, deriv, *, samples: int = 257):
    """Refine breakpoints ``t`` so that ``func`` is monotone on every piece.

    Zeros of ``deriv`` inside each piece are located by sign changes on a
    uniform sample followed by bisection.  Returns ``(breakpoints,
    directions)``.
    """
    t = np.asarray(t, dtype=float)
    u = np.linspace(0.0, 1.0, samples)[1:-1]
    s = t[:-1, None] + (t[1:] - t[:-1])[:, None] * u[None, :]
    sg = np.sign(_safe(deriv, s.ravel()).reshape(s.shape))
    # adjacent samples of opposite sign: bracket for bisection
    flip = sg[:, :-1] * sg[:, 1:] < 0
    rows, cols = np.nonzero(flip)
    roots = [bisect_sign_change(deriv, s[rows, cols], s[rows, cols + 1])] if rows.size else []
    # runs of exact zeros between opposite signs: take the middle of the run
    for i in np.unique(np.nonzero(sg == 0)[0]):
        row, srow = sg[i], s[i]
        nz = np.flatnonzero(row != 0)
        for j0, j1 in zip(nz[:-1], nz[1:]):
            if j1 > j0 + 1 and row[j0] != row[j1]:
                roots.append(np.array([0.5 * (srow[j0 + 1] + srow[j1 - 1])]))
    new_t = np.unique(np.concatenate([t, *roots])) if roots else t
    mids = 0.5 * (new_t[:-1] + new_t[1:])
    quarter = 0.25 * (new_t[1:] - new_t[:-1])
    probe = np.stack([mids - quarter, mids, mids + quarter])
    dsg = np.sign(_safe(deriv, probe.ravel()).reshape(probe.shape)).sum(axis=0)
    dirs = np.sign(dsg).astype(np.int8)
    return new_t, dirs


def dispatch(breakpoints, funcs):
    """Vectorized evaluator that applies ``funcs[i]`` on the i-th open piece."""
    t = np.asarray(breakpoints, dtype=float)
    funcs = list(funcs)

    def f(x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(t, x, side="right") - 1, 0, len(funcs) - 1)
        out = np.empty(x.shape)
        for i in np.unique(idx):
            sel = idx == i
            out[sel] = funcs[i](x[sel])
        return out

    return f


def from_smooth(breakpoints, funcs, derivs, *, values=None, value_side: str = "right",
                split: bool = True, antiderivative=None, name=None) -> PiecewiseMonotone:
    """Build a PiecewiseMonotone from smooth formulas on consecutive pieces.

    ``values`` optionally maps breakpoint index to an explicit point value;
    otherwise the value is taken from the piece on ``value_side``.
    """
    t = np.asarray(breakpoints, dtype=float)
    func = dispatch(t, funcs)
    deriv = dispatch(t, derivs)
    left = np.array([funcs[max(i - 1, 0)](np.array([t[i]]))[0] for i in range(t.size)], float)
    right = np.array([funcs[min(i, len(funcs) - 1)](np.array([t[i]]))[0]
                      for i in range(t.size)], float)
    vals = right.copy() if value_side == "right" else left.copy()
    vals[0], vals[-1] = right[0], left[-1]
    for i, v in (values or {}).items():
        vals[int(i)] = float(v)
    if split:
        new_t, dirs = split_monotone(t, func, deriv)
    else:
        new_t = t
        mids = 0.5 * (t[:-1] + t[1:])
        dirs = np.sign(_safe(deriv, mids)).astype(np.int8)
    if new_t.size != t.size:
        pos = np.searchsorted(new_t, t)
        extra = np.setdiff1d(np.arange(new_t.size), pos)
        L, V, R = (np.empty(new_t.size) for _ in range(3))
        L[pos], V[pos], R[pos] = left, vals, right
        fx = _safe(func, new_t[extra])
        L[extra] = V[extra] = R[extra] = fx
        left, vals, right = L, V, R
    return PiecewiseMonotone(new_t, func, dirs, left=left, values=vals, right=right,
                             deriv=deriv, antiderivative=antiderivative, name=name)


class StepFunction(PiecewiseMonotone):
    """Constant on each open subinterval, with explicit values at breakpoints."""

    def __init__(self, breakpoints, plateaus, values=None, name=None):
        t = np.asarray(breakpoints, dtype=float)
        p = np.asarray(plateaus, dtype=float).reshape(-1)
        if p.size != t.size - 1:
            raise BadParameter("need one plateau per open subinterval")
        if values is None:
            values = np.concatenate([p, p[-1:]])
        values = np.asarray(values, dtype=float)
        left = np.concatenate([p[:1], p])
        right = np.concatenate([p, p[-1:]])
        self.plateaus = p
        cum = np.concatenate([[0.0], np.cumsum(p * np.diff(t))])

        def func(x, _t=t, _p=p):
            i = np.clip(np.searchsorted(_t, x, side="right") - 1, 0, _p.size - 1)
            return _p[i]

        def anti(x, _t=t, _p=p, _c=cum):
            x = np.asarray(x, dtype=float)
            i = np.clip(np.searchsorted(_t, x, side="right") - 1, 0, _p.size - 1)
            return _c[i] + _p[i] * (x - _t[i])

        super().__init__(t, func, np.zeros(p.size, np.int8), left=left, values=values,
                         right=right, deriv=lambda x: np.zeros(np.shape(x)),
                         antiderivative=anti, name=name)


class PointSpikes(PiecewiseMonotone):
    """Zero except at finitely many interior points ``x_k`` where it is ``v_k``.

    ``spikes`` keeps the caller's order, so ``spikes[k]`` is the k-th point of
    whatever enumeration built it.
    """

    def __init__(self, interval, locations, values, name=None):
        iv = as_interval(interval)
        loc = np.asarray(locations, dtype=float).reshape(-1)
        val = np.asarray(values, dtype=float).reshape(-1)
        if loc.size != val.size:
            raise BadParameter("locations and values differ in length")
        if np.any(loc <= iv.a) or np.any(loc >= iv.b):
            raise BadParameter("spike locations must be strictly interior")
        if np.unique(loc).size != loc.size:
            raise BadParameter("spike locations must be distinct")
        if np.any(val == 0):
            raise BadParameter("spike values must be nonzero")
        self.spikes = tuple(zip(loc.tolist(), val.tolist()))
        order = np.argsort(loc)
        t = np.concatenate([[iv.a], loc[order], [iv.b]])
        values_t = np.concatenate([[0.0], val[order], [0.0]])
        zeros = np.zeros(t.size)
        super().__init__(t, lambda x: np.zeros(np.shape(x)), np.zeros(t.size - 1, np.int8),
                         left=zeros, values=values_t, right=zeros,
                         deriv=lambda x: np.zeros(np.shape(x)),
                         antiderivative=lambda x: np.zeros(np.shape(x)), name=name)


class GridFunction(PiecewiseMonotone):
    """Samples at ``n + 1`` uniform nodes, linearly interpolated in between."""

    def __init__(self, interval, samples, name=None):
        iv = as_interval(interval)
        s = np.asarray(samples, dtype=float).reshape(-1)
        if s.size < 2:
            raise BadParameter("a grid needs at least two samples")
        nodes = iv.nodes(s.size - 1)
        self.samples = s
        self.nodes = nodes
        slope = np.diff(s) / np.diff(nodes)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (s[:-1] + s[1:]) * np.diff(nodes))])

        def deriv(x, _n=nodes, _sl=slope):
            i = np.clip(np.searchsorted(_n, x, side="right") - 1, 0, _sl.size - 1)
            return _sl[i]

        def anti(x, _n=nodes, _s=s, _sl=slope, _c=cum):
            x = np.asarray(x, dtype=float)
            i = np.clip(np.searchsorted(_n, x, side="right") - 1, 0, _sl.size - 1)
            dx = x - _n[i]
            return _c[i] + _s[i] * dx + 0.5 * _sl[i] * dx * dx

        super().__init__(nodes, lambda x, _n=nodes, _s=s: np.interp(x, _n, _s),
                         np.sign(np.diff(s)).astype(np.int8), left=s, values=s, right=s,
                         deriv=deriv, antiderivative=anti, name=name)

    @property
    def n(self) -> int:
        return self.samples.size - 1


def to_grid(rep: FunctionRep, n: int) -> GridFunction:
    """Sample ``rep`` at ``a + i (b - a) / n``, ``i = 0..n``."""
    if n < 2:
        raise BadParameter("grid needs n >= 2")
    nodes = rep.interval.nodes(n)
    return GridFunction(rep.interval, rep(nodes),
                        name=f"grid({rep.name or type(rep).__name__}, {n})")
