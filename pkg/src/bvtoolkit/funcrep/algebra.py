"""Pointwise algebra on piecewise-monotone representations.

Sums and products merge the breakpoints of both operands, add or multiply
the stored one-sided triples, and re-split every merged piece at the sign
changes of the combined derivative so the result is again piecewise
monotone.  This needs derivative evaluators; singular operands (whose
derivative vanishes a.e. without the function being constant) and
unresolved oscillating pieces are refused rather than misclassified.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from ..errors import BadParameter, UnsupportedRep
from .base import OSCILLATING, FunctionRep, PiecewiseMonotone, Residual, _safe, split_monotone


def _require_exact(rep: FunctionRep, what: str) -> PiecewiseMonotone:
    if not isinstance(rep, PiecewiseMonotone):
        raise UnsupportedRep(f"{what} needs a piecewise-monotone representation, got {rep!r}")
    return rep


def _require_splittable(rep: PiecewiseMonotone, what: str) -> None:
    if rep.residual is not None:
        raise UnsupportedRep(f"{what}: {rep!r} has an unresolved oscillating piece")
    if rep.singular:
        raise UnsupportedRep(f"{what}: {rep!r} is singular; its derivative does not "
                             "determine monotonicity")
    if rep.deriv is None:
        raise UnsupportedRep(f"{what}: {rep!r} carries no derivative evaluator")


def scale(rep: FunctionRep, c: float) -> PiecewiseMonotone:
    """``c * f``; keeps residual pieces and antiderivatives."""
    f = _require_exact(rep, "scale")
    c = float(c)
    if c == 0.0:
        dirs = np.zeros(f.n_pieces, np.int8)
    else:
        dirs = np.where(f.directions == OSCILLATING, OSCILLATING,
                        f.directions * int(np.sign(c))).astype(np.int8)
    residual = None
    if f.residual is not None and c != 0.0:
        residual = Residual(lambda x, _v=f.residual.variation: abs(c) * _v(x),
                            f.residual.samples)
    elif f.residual is not None:
        dirs[0] = 0
    deriv = None if f.deriv is None else (lambda x, _d=f.deriv: c * np.asarray(_d(x)))
    anti = None if f.antiderivative is None else (
        lambda x, _g=f.antiderivative: c * np.asarray(_g(x)))
    out = PiecewiseMonotone(f.t, lambda x, _f=f.func: c * np.asarray(_f(x)), dirs,
                            left=c * f.left, values=c * f.values, right=c * f.right,
                            deriv=deriv, antiderivative=anti, residual=residual,
                            name=f"{c:g}*{f.name}")
    out.singular = f.singular and c != 0.0
    return out


def _triples(f: PiecewiseMonotone, t: np.ndarray):
    return f.left_limit(t), f(t), f.right_limit(t)


def _combine(f, g, op: str) -> PiecewiseMonotone:
    f = _require_exact(f, op)
    g = _require_exact(g, op)
    if f.interval != g.interval:
        raise BadParameter(f"{op}: intervals differ ({f.interval} vs {g.interval})")
    for rep in (f, g):
        _require_splittable(rep, op)
    t = np.union1d(f.t, g.t)
    (fl, fv, fr), (gl, gv, gr) = _triples(f, t), _triples(g, t)
    ff, gf, fd, gd = f.func, g.func, f.deriv, g.deriv
    if op == "add":
        func = lambda x: _safe(ff, x) + _safe(gf, x)  # noqa: E731
        deriv = lambda x: _safe(fd, x) + _safe(gd, x)  # noqa: E731
        tri = (fl + gl, fv + gv, fr + gr)
        anti = None
        if f.antiderivative is not None and g.antiderivative is not None:
            fa, ga = f.antiderivative, g.antiderivative
            anti = lambda x: np.asarray(fa(x)) + np.asarray(ga(x))  # noqa: E731
    elif op == "mul":
        func = lambda x: _safe(ff, x) * _safe(gf, x)  # noqa: E731
        deriv = lambda x: _safe(fd, x) * _safe(gf, x) + _safe(ff, x) * _safe(gd, x)  # noqa: E731
        tri = (fl * gl, fv * gv, fr * gr)
        anti = None
    else:  # pragma: no cover - internal
        raise ValueError(op)
    new_t, dirs = split_monotone(t, func, deriv)
    # roots added by the split are continuity points of the combination
    keep = np.isin(new_t, t)
    left, values, right = (np.empty(new_t.size) for _ in range(3))
    fx = _safe(func, new_t[~keep])
    for arr, known in zip((left, values, right), tri):
        arr[keep] = known
        arr[~keep] = fx
    sym = "+" if op == "add" else "*"
    return PiecewiseMonotone(new_t, func, dirs, left=left, values=values, right=right,
                             deriv=deriv, antiderivative=anti, name=f"({f.name}{sym}{g.name})")


def add(f: FunctionRep, g: FunctionRep) -> PiecewiseMonotone:
    return _combine(f, g, "add")


def subtract(f: FunctionRep, g: FunctionRep) -> PiecewiseMonotone:
    return _combine(f, scale(g, -1.0), "add")


def multiply(f: FunctionRep, g: FunctionRep) -> PiecewiseMonotone:
    return _combine(f, g, "mul")


def absolute(rep: FunctionRep) -> PiecewiseMonotone:
    """``|f|``: each monotone piece is split at its (single) zero crossing."""
    f = _require_exact(rep, "absolute")
    if f.residual is not None:
        raise UnsupportedRep("absolute: unresolved oscillating piece")
    roots = []
    start, end = f.piece_start(), f.piece_end()
    for i in np.flatnonzero(start * end < 0):
        # bracket strictly inside: at a breakpoint the evaluator may follow
        # the neighbouring piece
        lo, hi = np.nextafter(f.t[i], np.inf), np.nextafter(f.t[i + 1], -np.inf)
        fl = lambda z: float(_safe(f.func, np.array([z]))[0])  # noqa: E731
        if fl(lo) * fl(hi) < 0:
            roots.append(brentq(fl, lo, hi, xtol=1e-15, rtol=1e-15))
        else:  # the zero sits within one ulp of a piece end
            roots.append(lo if abs(fl(lo)) <= abs(fl(hi)) else hi)
    t = np.union1d(f.t, roots)
    left, values, right = (np.abs(arr) for arr in _triples(f, t))
    piece = np.searchsorted(f.t, t[:-1], side="right") - 1
    mids = 0.5 * (t[:-1] + t[1:])
    sgn = np.sign(_safe(f.func, mids))
    dirs = (f.directions[piece] * sgn).astype(np.int8)
    deriv = None
    if f.deriv is not None:
        deriv = lambda x, _f=f.func, _d=f.deriv: np.sign(_safe(_f, x)) * _safe(_d, x)  # noqa: E731
    out = PiecewiseMonotone(t, lambda x, _f=f.func: np.abs(_safe(_f, x)), dirs,
                            left=left, values=values, right=right, deriv=deriv,
                            name=f"|{f.name}|")
    out.singular = f.singular
    return out
