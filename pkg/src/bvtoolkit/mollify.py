"""Integral means ``f^h(x) = (1/h) int_0^h f(x + t) dt`` and their variation.

With a primitive ``G`` of f, ``f^h = (G(x + h) - G(x)) / h`` is exact and
``(f^h)' = (f(x + h) - f(x)) / h``.  The mean is again piecewise monotone;
its pieces are found from the sign changes of that difference quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .decompose import detect_jumps
from .errors import BadParameter, DiscontinuousInput, DomainError, NotBV, UnsupportedRep
from .funcrep.base import FunctionRep, Interval, PiecewiseMonotone, _safe, as_interval, split_monotone
from .quadrature import integrate_intervals
from .variation import total_variation_exact


@dataclass(frozen=True)
class MeanParams:
    """``0 < h < delta < b - a``; the mean lives on ``[a, b - delta]``."""

    delta: float
    h: float

    def check(self, interval: Interval) -> None:
        if not (0.0 < self.h < self.delta < interval.length):
            raise BadParameter(f"need 0 < h < delta < b - a, got h={self.h}, "
                               f"delta={self.delta} on {interval}")


def primitive(rep: PiecewiseMonotone, rtol: float = 1e-12):
    """``G(x) = int_a^x f``: the stored antiderivative or piecewise quadrature."""
    if rep.antiderivative is not None:
        return lambda x: np.asarray(rep.antiderivative(np.asarray(x, dtype=float)), dtype=float)
    t = rep.t
    vals, _ = integrate_intervals(lambda x: _safe(rep.func, x), t[:-1], t[1:], rtol=rtol)
    cum = np.concatenate([[0.0], np.cumsum(vals)])

    def G(x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        i = np.clip(np.searchsorted(t, flat, side="right") - 1, 0, t.size - 2)
        part, _ = integrate_intervals(lambda z: _safe(rep.func, z), t[i], flat, rtol=rtol)
        return (cum[i] + part).reshape(x.shape)

    return G


def _require_continuous_bv(rep: FunctionRep) -> PiecewiseMonotone:
    if not isinstance(rep, PiecewiseMonotone):
        raise UnsupportedRep(f"integral means need an exact representation, got {rep!r}")
    if math.isinf(total_variation_exact(rep)):
        raise NotBV(f"{rep!r} has unbounded variation")
    data = detect_jumps(rep)
    if data.jumps or data.start_term or data.end_term:
        raise DiscontinuousInput(f"{rep!r} has jumps; integral means need continuous input")
    return rep


def integral_mean(rep: FunctionRep, params: MeanParams) -> PiecewiseMonotone:
    """``f^h`` on ``[a, b - delta]`` as a piecewise-monotone rep.

    It carries ``deriv = (f(x+h) - f(x)) / h``.  For singular f (where
    quadrature of that quotient is unreliable) it also carries
    ``deriv_integral``, the exact integral of the quotient through G.
    """
    f = _require_continuous_bv(rep)
    params.check(f.interval)
    h = float(params.h)
    a, end = f.a, f.b - params.delta
    G = primitive(f)

    def fh(x):
        x = np.asarray(x, dtype=float)
        return (G(x + h) - G(x)) / h

    def dfh(x):
        x = np.asarray(x, dtype=float)
        return (f(np.minimum(x + h, f.b)) - f(x)) / h

    seeds = np.concatenate([f.t, f.t - h])
    seeds = seeds[(seeds > a) & (seeds < end)]
    t0 = np.unique(np.concatenate([[a], seeds, [end]]))
    t, _ = split_monotone(t0, dfh, dfh, samples=65)
    vals = fh(t)
    dirs = np.sign(np.diff(vals)).astype(np.int8)
    out = PiecewiseMonotone(t, fh, dirs, left=vals, values=vals, right=vals, deriv=dfh,
                            antiderivative=None, name=f"mean({f.name}, h={h:g})")
    if f.singular:
        out.deriv_integral = lambda lo, hi: fh(hi) - fh(lo)
    return out


def _segment_integrals(f: PiecewiseMonotone, G, h: float, lo, hi, exact: bool):
    """``int_lo^hi (f(x+h) - f(x)) / h dx`` on each segment."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if exact:
        return ((G(hi + h) - G(hi)) - (G(lo + h) - G(lo))) / h
    vals, _ = integrate_intervals(lambda x: (f(np.minimum(x + h, f.b)) - f(x)) / h, lo, hi,
                                  rtol=1e-11)
    return vals


def mean_variation(rep: FunctionRep, params: MeanParams, sub=None) -> float:
    """``int_sub |f(x+h) - f(x)| / h dx`` (``sub`` defaults to ``[a, b - delta]``).

    The integrand is split at the sign changes of ``f(x+h) - f(x)`` so each
    segment integrates a one-signed function, exactly through the stored
    antiderivative when there is one and by Gauss-Kronrod otherwise.
    """
    f = _require_continuous_bv(rep)
    params.check(f.interval)
    h = float(params.h)
    sub = Interval(f.a, f.b - params.delta) if sub is None else as_interval(sub)
    if sub.a < f.a or sub.b > f.b - params.delta:
        raise DomainError(f"{sub} not inside [{f.a}, {f.b - params.delta}]")
    mean = integral_mean(f, params)
    inner = mean.t[(mean.t > sub.a) & (mean.t < sub.b)]
    seg = np.concatenate([[sub.a], inner, [sub.b]])
    exact = f.antiderivative is not None
    G = primitive(f) if exact else None
    vals = _segment_integrals(f, G, h, seg[:-1], seg[1:], exact)
    return float(np.sum(np.abs(vals)))


@dataclass
class MeanSweep:
    rows: list            # [(h, variation), ...]
    limit: float          # extrapolated h -> 0 value
    bound: float          # T_f[sub.a, sub.b + delta]
    sub: Interval
    delta: float

    def to_dict(self) -> dict:
        return {"rows": [{"h": h, "variation": v} for h, v in self.rows],
                "limit": self.limit, "bound": self.bound,
                "sub": [self.sub.a, self.sub.b], "delta": self.delta}


def default_schedule(delta: float, terms: int = 6) -> list[float]:
    """Geometric, ratio 1/2, starting at ``delta / 2``."""
    return [0.5 * delta * 0.5 ** k for k in range(terms)]


def aitken_limit(values: Sequence[float]) -> float:
    """Aitken's delta-squared extrapolation of the last three terms.

    Falls back to the last value when the differences do not shrink
    geometrically (zero or sign-changing second difference).
    """
    v = [float(x) for x in values]
    if len(v) < 3:
        return v[-1]
    x0, x1, x2 = v[-3:]
    d1, d2 = x1 - x0, x2 - x1
    denom = d2 - d1
    if denom == 0.0 or d1 == 0.0 or d2 / d1 <= 0.0 or abs(d2) >= abs(d1):
        return x2
    return x2 - d2 * d2 / denom


def variation_via_means(rep: FunctionRep, h_schedule: Optional[Sequence[float]] = None,
                        sub=None, delta: Optional[float] = None) -> MeanSweep:
    """``T_{f^h}`` over a shrinking schedule of h, with an extrapolated limit.

    ``delta`` defaults to 1/8 of the interval length (or to whatever room
    ``sub`` leaves on the right).
    """
    f = _require_continuous_bv(rep)
    if delta is None:
        delta = (f.b - as_interval(sub).b) if sub is not None else f.interval.length / 8
    delta = float(delta)
    sub = Interval(f.a, f.b - delta) if sub is None else as_interval(sub)
    hs = default_schedule(delta) if h_schedule is None else [float(h) for h in h_schedule]
    rows = [(h, mean_variation(f, MeanParams(delta, h), sub)) for h in hs]
    bound_end = min(f.b, sub.b + delta)
    bound = total_variation_exact(f, (sub.a, bound_end))
    limit = aitken_limit([v for _, v in rows])
    return MeanSweep(rows, limit, bound, sub, delta)


__all__ = ["MeanParams", "MeanSweep", "integral_mean", "mean_variation",
           "variation_via_means", "default_schedule", "aitken_limit", "primitive"]
