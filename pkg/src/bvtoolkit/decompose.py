"""Jumps, the saltus function, f = F + f_cs + s_f, AC classification, Dini derivatives."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError, NotBV, QuadratureFailure, UnsupportedRep
from .funcrep.base import (OSCILLATING, BlackBox, FunctionRep, GridFunction, Interval,
                           PiecewiseMonotone, StepFunction, _safe)
from .quadrature import integrate_intervals
from .variation import total_variation_exact


# -- jumps --------------------------------------------------------------------

@dataclass(frozen=True)
class JumpRecord:
    location: float
    left_limit: float
    value: float
    right_limit: float

    @property
    def left_jump(self) -> float:
        return self.value - self.left_limit

    @property
    def right_jump(self) -> float:
        return self.right_limit - self.value

    @property
    def magnitude(self) -> float:
        """Contribution ``|f(x) - f(x-)| + |f(x+) - f(x)|`` to the variation."""
        return abs(self.left_jump) + abs(self.right_jump)

    def to_dict(self) -> dict:
        return {"x": self.location, "left": self.left_limit, "value": self.value,
                "right": self.right_limit}


@dataclass(frozen=True)
class SaltusData:
    interval: Interval
    jumps: tuple[JumpRecord, ...]
    start_term: float  # f(a+) - f(a)
    end_term: float    # f(b) - f(b-)

    @property
    def total_magnitude(self) -> float:
        return (sum(j.magnitude for j in self.jumps) + abs(self.start_term)
                + abs(self.end_term))

    def to_dict(self) -> dict:
        return {"interval": [self.interval.a, self.interval.b],
                "jumps": [j.to_dict() for j in self.jumps],
                "start_term": self.start_term, "end_term": self.end_term}


def _exact(rep: FunctionRep, what: str) -> PiecewiseMonotone:
    if not isinstance(rep, PiecewiseMonotone):
        raise UnsupportedRep(f"{what} needs stored breakpoint triples; {rep!r} has none")
    return rep


def detect_jumps(rep: FunctionRep, tol: float = 0.0) -> SaltusData:
    """Interior breakpoints whose stored triple is not constant (beyond ``tol``)."""
    f = _exact(rep, "detect_jumps")
    lj, rj = f.jump_terms()
    inner = np.flatnonzero((np.maximum(lj, rj) > tol)[1:-1]) + 1
    jumps = tuple(JumpRecord(float(f.t[i]), float(f.left[i]), float(f.values[i]),
                             float(f.right[i])) for i in inner)
    start = float(f.right[0] - f.values[0])
    end = float(f.values[-1] - f.left[-1])
    return SaltusData(f.interval, jumps, start if abs(start) > tol else 0.0,
                      end if abs(end) > tol else 0.0)


def saltus_function(rep: FunctionRep, tol: float = 0.0) -> StepFunction:
    """``s_f(x) = (f(a+) - f(a)) + sum_{x_k < x} (f(x_k+) - f(x_k-)) + (f(x) - f(x-))``.

    ``s_f(a) = 0``.  Returned as one step function whose breakpoint values
    carry the point jumps ``f(x_k) - f(x_k-)``.
    """
    if math.isinf(total_variation_exact(rep)):
        raise NotBV(f"{rep!r} has unbounded variation")
    data = detect_jumps(rep, tol)
    locs = [j.location for j in data.jumps]
    t = [data.interval.a, *locs, data.interval.b]
    plateaus, values = [], [0.0]
    level = data.start_term
    for j in data.jumps:
        plateaus.append(level)
        values.append(level + j.left_jump)
        level += j.right_limit - j.left_limit
    plateaus.append(level)
    values.append(level + data.end_term)
    return StepFunction(t, plateaus, values, name=f"saltus({rep.name})")


# -- derivative and its integral -------------------------------------------------

def derivative_ae(rep: FunctionRep) -> FunctionRep:
    """f' off the breakpoints (a black box); centred differences for grids."""
    if isinstance(rep, GridFunction):
        return GridFunction(rep.interval, np.gradient(rep.samples, rep.nodes),
                            name=f"d/dx {rep.name}")
    if isinstance(rep, PiecewiseMonotone) and rep.deriv is not None:
        return BlackBox(rep.interval, rep.deriv, breakpoints=rep.t, name=f"d/dx {rep.name}")
    if isinstance(rep, BlackBox) and rep.right_deriv is not None:
        return BlackBox(rep.interval, rep.right_deriv, breakpoints=rep.breakpoints,
                        name=f"d/dx {rep.name}")
    raise UnsupportedRep(f"no derivative evaluator for {rep!r}")


def _deriv_integrals(f: PiecewiseMonotone, lo, hi, rtol: float) -> np.ndarray:
    """``int_lo^hi f'`` for sub-intervals each inside one open piece."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    exact = getattr(f, "deriv_integral", None)
    if exact is not None:
        return np.asarray(exact(lo, hi), dtype=float)
    if f.deriv is None:
        raise UnsupportedRep(f"no derivative evaluator for {f!r}")
    vals, err = integrate_intervals(lambda x: _safe(f.deriv, x), lo, hi,
                                    atol=1e-14, rtol=rtol)
    scale = max(1.0, float(np.sum(np.abs(vals))))
    if err > 1e3 * rtol * scale:
        raise QuadratureFailure(f"integral of f' for {f!r}: error estimate {err:.3g}")
    return vals


def _resolved_pieces(f: PiecewiseMonotone):
    """Indices of pieces integrated numerically (the oscillating residual is not)."""
    start = 1 if f.residual is not None else 0
    return np.arange(start, f.n_pieces)


def piece_derivative_integrals(f: PiecewiseMonotone, rtol: float = 1e-10) -> np.ndarray:
    """``int f'`` over every piece.

    The unresolved oscillating piece (only present for functions that are
    Lipschitz there, e.g. ``x^2 sin(1/x)``) is assigned ``f(t_1-) - f(t_0+)``.
    """
    out = np.zeros(f.n_pieces)
    idx = _resolved_pieces(f)
    if idx.size:
        out[idx] = _deriv_integrals(f, f.t[idx], f.t[idx + 1], rtol)
    if f.residual is not None:
        out[0] = f.piece_end()[0] - f.piece_start()[0]
    return out


def integral_abs_derivative(rep: FunctionRep, rtol: float = 1e-10) -> float:
    """``int_a^b |f'|``.  f' keeps one sign on a monotone piece, so this is
    ``sum |int_piece f'|``; the oscillating residual contributes its variation."""
    f = _exact(rep, "integral_abs_derivative")
    per_piece = np.abs(piece_derivative_integrals(f, rtol))
    if f.residual is not None:
        per_piece[0] = f.residual.variation(f.t[1])
    return float(np.sum(per_piece))


# -- three-part decomposition -----------------------------------------------------

class Decomposition(NamedTuple):
    F: FunctionRep
    f_cs: FunctionRep
    s_f: FunctionRep


def _primitive_of_derivative(f: PiecewiseMonotone, rtol: float):
    """``x -> int_a^x f'`` evaluated piecewise."""
    per_piece = piece_derivative_integrals(f, rtol)
    cum = np.concatenate([[0.0], np.cumsum(per_piece)])

    def F(x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        i = np.clip(np.searchsorted(f.t, flat, side="right") - 1, 0, f.n_pieces - 1)
        out = cum[i].copy()
        partial = flat > f.t[i]
        osc = partial & (i == 0) & (f.residual is not None)
        regular = partial & ~osc
        if regular.any():
            out[regular] += _deriv_integrals(f, f.t[i[regular]], flat[regular], rtol)
        if osc.any():
            out[osc] += _safe(f.func, flat[osc]) - f.piece_start()[0]
        return out.reshape(x.shape)

    return F


def three_part_decompose(rep: FunctionRep, rtol: float = 1e-10) -> Decomposition:
    """``f = F + f_cs + s_f`` with ``F = int_a^x f'``, ``s_f`` the saltus
    function and ``f_cs`` the continuous singular remainder."""
    f = _exact(rep, "three_part_decompose")
    if math.isinf(total_variation_exact(f)):
        raise NotBV(f"{f!r} has unbounded variation")
    s = saltus_function(f)
    Fx = _primitive_of_derivative(f, rtol)
    # F' = f' a.e. keeps one sign on every monotone piece of f, so F is
    # monotone on the same pieces (constant where the piece integral vanishes)
    vals = Fx(f.t)
    dirs = np.sign(np.diff(vals)).astype(np.int8)
    if f.residual is not None:
        dirs[0] = f.directions[0]
    F = PiecewiseMonotone(f.t, Fx, dirs, left=vals, values=vals, right=vals, deriv=f.deriv,
                          residual=f.residual, name=f"ac({f.name})")
    fcs = BlackBox(f.interval, lambda x: f(x) - Fx(x) - s(x), breakpoints=f.t,
                   continuous=True, name=f"cs({f.name})")
    return Decomposition(F, fcs, s)


# -- AC classification ---------------------------------------------------------------

class ACVerdict(str, enum.Enum):
    ABSOLUTELY_CONTINUOUS = "AbsolutelyContinuous"
    SINGULAR_PART_PRESENT = "SingularPartPresent"
    NOT_BV = "NotBV"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ACReport:
    verdict: ACVerdict
    total_variation: float
    integral_abs_derivative: float

    def to_dict(self) -> dict:
        T, I = self.total_variation, self.integral_abs_derivative
        return {"classification": self.verdict.value,
                "total_variation": T if math.isfinite(T) else "inf",
                "integral_abs_derivative": I if math.isfinite(I) else "inf"}


def ac_report(rep: FunctionRep, tol: float = 1e-6) -> ACReport:
    T = total_variation_exact(rep)
    if math.isinf(T):
        return ACReport(ACVerdict.NOT_BV, T, math.inf)
    I = integral_abs_derivative(rep)
    slack = tol * max(1.0, T)
    if abs(T - I) <= slack:
        return ACReport(ACVerdict.ABSOLUTELY_CONTINUOUS, T, I)
    if I + slack < T:
        return ACReport(ACVerdict.SINGULAR_PART_PRESENT, T, I)
    raise QuadratureFailure(f"int |f'| = {I} exceeds T_f = {T}: derivative data inconsistent")


def classify_ac(rep: FunctionRep, tol: float = 1e-6) -> ACVerdict:
    """Compare ``T_f[a, b]`` with ``int |f'|`` (relative tolerance ``tol``)."""
    return ac_report(rep, tol).verdict


# -- Dini derivatives ----------------------------------------------------------------

@dataclass(frozen=True)
class DiniQuad:
    upper_right: float
    lower_right: float
    upper_left: float
    lower_left: float
    exact: bool = False
    reliable: bool = True
    notes: tuple = field(default=())

    def as_tuple(self):
        return (self.upper_right, self.lower_right, self.upper_left, self.lower_left)


def _one_sided_exact(f: PiecewiseMonotone, x: float, side: int) -> Optional[float]:
    """One-sided derivative from stored data, or None if it is not determined."""
    i = int(np.searchsorted(f.t, x))
    at_break = i < f.t.size and f.t[i] == x
    if at_break:
        jump = (f.right[i] - f.values[i]) if side > 0 else (f.values[i] - f.left[i])
        if jump != 0:
            return math.copysign(math.inf, jump)
        piece = i if side > 0 else i - 1
    else:
        piece = i - 1
    if f.directions[piece] == OSCILLATING and (at_break and piece == 0):
        return None
    probe = np.nextafter(x, math.inf if side > 0 else -math.inf)
    return float(_safe(f.deriv, np.array([probe]))[0])


def dini(rep: FunctionRep, x: float, *, h0: float = 1e-2, J: int = 40,
         per_octave: int = 16) -> DiniQuad:
    """The four Dini derivatives at ``x``.

    Exact where the representation stores a derivative and no singular
    behaviour is possible; otherwise difference quotients over
    ``h = h0 (b - a) 2^-s`` for s = 0, 1/per_octave, ..., J: max/min over the
    tail half of the admissible steps, with ``reliable`` set when that tail
    has settled.
    """
    x = float(x)
    nan = math.nan
    a, b = rep.a, rep.b
    if not a <= x <= b:
        raise DomainError(f"x = {x} outside [{a}, {b}]")
    if isinstance(rep, PiecewiseMonotone) and rep.deriv is not None and not rep.singular:
        r = _one_sided_exact(rep, x, +1) if x < b else nan
        l_ = _one_sided_exact(rep, x, -1) if x > a else nan
        if r is not None and l_ is not None:
            return DiniQuad(r, r, l_, l_, exact=True, reliable=True)
    if isinstance(rep, BlackBox) and rep.right_deriv is not None and rep.left_deriv is not None:
        r = float(rep.right_deriv(x)) if x < b else nan
        l_ = float(rep.left_deriv(x)) if x > a else nan
        return DiniQuad(r, r, l_, l_, exact=True, reliable=True)
    return _dini_numeric(rep, x, h0, J, per_octave)


def _dini_numeric(rep: FunctionRep, x: float, h0: float, J: int, per_octave: int) -> DiniQuad:
    fx = float(rep(x))
    h = h0 * (rep.b - rep.a) * np.exp2(-np.arange(J * per_octave + 1) / per_octave)
    out, settled, notes = [], True, []
    for side in (+1, -1):
        room = (rep.b - x) if side > 0 else (x - rep.a)
        steps = (x + side * h) - x  # the steps actually realised in floating point
        ok = (np.abs(steps) > 0) & (np.abs(steps) <= room)
        if not ok.any():
            out += [math.nan, math.nan]
            continue
        hs = steps[ok]
        fxh = rep(x + hs)
        q = (fxh - fx) / hs
        # roundoff in the quotient is about eps (|f(x)| + |f(x+h)|) / h; keep
        # only steps where that stays below 1e-6 of the quotient's size
        noise = np.finfo(float).eps * (abs(fx) + np.abs(fxh)) / np.abs(hs)
        q = q[noise <= 1e-6 * np.maximum(1.0, np.abs(q))]
        if q.size == 0:
            out += [math.nan, math.nan]
            notes.append(f"no admissible steps on side {side:+d}")
            continue
        tail = q[q.size // 2:]
        hi, lo = float(tail.max()), float(tail.min())
        out += [hi, lo]
        if hi - lo > 1e-6 * max(1.0, abs(hi)):
            settled = False
    return DiniQuad(out[0], out[1], out[2], out[3], exact=False, reliable=settled,
                    notes=tuple(notes))


__all__ = [
    "JumpRecord", "SaltusData", "Decomposition", "ACVerdict", "ACReport", "DiniQuad",
    "detect_jumps", "saltus_function", "derivative_ae", "integral_abs_derivative",
    "piece_derivative_integrals", "three_part_decompose", "classify_ac", "ac_report", "dini",
]
