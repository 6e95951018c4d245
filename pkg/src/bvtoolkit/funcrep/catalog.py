"""The classical examples, addressable by name.

Each entry builds an exact representation when one exists (piecewise
monotone with critical points placed analytically) and a black box
otherwise.  Interval endpoints can be overridden with ``a``/``b`` wherever
the example does not fix them.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from ..errors import BadParameter, UnknownName
from .base import (CONSTANT, INCREASING, BlackBox, FunctionRep, Interval, PiecewiseMonotone,
                   PointSpikes, StepFunction, dispatch)
from .special import CantorFunction, OscillatingSine, dini_example as _dini_formula

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    parameters: tuple[str, ...]
    builder: Callable[..., FunctionRep]
    description: str = ""

    def build(self, **params) -> FunctionRep:
        return self.builder(**params)


def smooth(a, b, f, df, F=None, critical=(), name=None) -> PiecewiseMonotone:
    """Continuous piecewise-monotone rep of a smooth ``f`` whose critical
    points in ``]a, b[`` are exactly ``critical`` (sign changes of ``df``).

    ``F`` is any antiderivative; it is shifted so that ``G(a) = 0``.
    """
    crit = np.asarray(sorted(c for c in critical if a < c < b), dtype=float)
    t = np.concatenate([[a], crit, [b]])
    mids = 0.5 * (t[:-1] + t[1:])
    dirs = np.sign(df(mids)).astype(np.int8)
    anti = None
    if F is not None:
        Fa = float(F(np.array([a]))[0])
        anti = lambda x, _F=F: np.asarray(_F(np.asarray(x, dtype=float))) - Fa  # noqa: E731
    return PiecewiseMonotone(t, f, dirs, deriv=df, antiderivative=anti, name=name)


def _lattice(offset, period, a, b):
    """Points ``offset + k * period`` inside ``]a, b[``."""
    k0 = math.ceil((a - offset) / period) - 1
    k1 = math.floor((b - offset) / period) + 1
    return [offset + k * period for k in range(k0, k1 + 1)
            if a < offset + k * period < b]


_HALF_PI = 0.5 * math.pi


def snapped_trig(kind: str, arg):
    """``sin``/``cos`` that return the exact values 0, +-1 when ``arg`` is
    within two ulps of a multiple of pi/2.

    The float nearest 2 pi is not 2 pi, and ``sin`` of it is -2.4e-16;
    snapping treats such arguments as the multiples they stand for, so
    critical values and zeros on the lattice are exact.
    """
    arg = np.asarray(arg, dtype=float)
    out = np.sin(arg) if kind == "sin" else np.cos(arg)
    k = np.rint(arg / _HALF_PI)
    near = np.abs(arg - k * _HALF_PI) <= 2 * np.spacing(np.maximum(np.abs(arg), _HALF_PI))
    if np.any(near):
        q = np.mod(k[near].astype(np.int64) + (1 if kind == "cos" else 0), 4)
        out = np.array(out, dtype=float, copy=True)
        out[near] = np.array([0.0, 1.0, 0.0, -1.0])[q]
    return out


def _interval(a, b) -> tuple[float, float]:
    iv = Interval(float(a), float(b))
    return iv.a, iv.b


# -- builders ---------------------------------------------------------------

def const(c: float = 0.0, a: float = 0.0, b: float = 1.0) -> StepFunction:
    a, b = _interval(a, b)
    return StepFunction([a, b], [float(c)], name=f"const({c:g})")


def linear(m: float = 1.0, c: float = 0.0, a: float = 0.0, b: float = 1.0):
    a, b = _interval(a, b)
    m, c = float(m), float(c)
    return smooth(a, b, lambda x: m * np.asarray(x) + c, lambda x: np.full(np.shape(x), m),
                  lambda x: 0.5 * m * x * x + c * x, name=f"linear({m:g},{c:g})")


def power(n: int = 2, a: float = -1.0, b: float = 1.0):
    n = _positive_int(n, "n", allow_zero=True)
    a, b = _interval(a, b)
    if n == 0:
        return const(1.0, a, b)
    crit = [0.0] if n % 2 == 0 else []
    return smooth(a, b, lambda x: np.asarray(x) ** n, lambda x: n * np.asarray(x) ** (n - 1),
                  lambda x: x ** (n + 1) / (n + 1), critical=crit, name=f"power({n})")


def sine(a: float = 0.0, b: float = TWO_PI):
    a, b = _interval(a, b)
    return smooth(a, b, lambda x: snapped_trig("sin", x), lambda x: snapped_trig("cos", x),
                  lambda x: -np.cos(x), critical=_lattice(0.5 * math.pi, math.pi, a, b),
                  name="sin")


def cosine(a: float = 0.0, b: float = TWO_PI):
    a, b = _interval(a, b)
    return smooth(a, b, lambda x: snapped_trig("cos", x), lambda x: -snapped_trig("sin", x),
                  np.sin, critical=_lattice(0.0, math.pi, a, b), name="cos")


def absolute(a: float = -1.0, b: float = 1.0):
    a, b = _interval(a, b)
    crit = [0.0]
    return smooth(a, b, np.abs, np.sign, lambda x: 0.5 * x * np.abs(x), critical=crit, name="abs")


def x_sin_inv(n_critical: int = 1 << 14):
    return OscillatingSine(1, _positive_int(n_critical, "n_critical"))


def x2_sin_inv(n_critical: int = 1 << 14):
    return OscillatingSine(2, _positive_int(n_critical, "n_critical"))


def cantor(level: int = 20):
    return CantorFunction(_positive_int(level, "level", allow_zero=True))


def calkin_wilf_unit(count: int) -> list[Fraction]:
    """First ``count`` rationals in ``]0, 1[`` in Calkin-Wilf breadth-first order.

    The Calkin-Wilf sequence visits every positive rational exactly once
    (``q -> 1 / (2 floor(q) - q + 1)``); keeping those below 1 gives
    1/2, 1/3, 2/3, 1/4, 3/5, 2/5, 3/4, ...
    """
    out: list[Fraction] = []
    q = Fraction(1)
    while len(out) < count:
        q = 1 / (2 * math.floor(q) - q + 1)
        if q < 1:
            out.append(q)
    return out


def spikes(c: float = 0.5, K: int = 10):
    """``c**k`` at the k-th rational of ]0, 1[ (k = 1..K), zero elsewhere."""
    c = float(c)
    if not 0.0 < c < 1.0:
        raise BadParameter(f"spikes needs 0 < c < 1, got {c}")
    K = _positive_int(K, "K")
    locs = [float(q) for q in calkin_wilf_unit(K)]
    vals = [c ** k for k in range(1, K + 1)]
    if any(v == 0.0 for v in vals):
        raise BadParameter("c**K underflows to zero; lower K")
    return PointSpikes((0.0, 1.0), locs, vals, name=f"spikes({c:g},{K})")


def heaviside(c: float = 0.5, at: float | None = None, jump: float = 1.0,
              a: float = 0.0, b: float = 1.0):
    """0 on ``[a, c[``, ``jump`` on ``]c, b]``, value ``at`` at ``c``
    (default ``jump``, i.e. right-continuous)."""
    a, b = _interval(a, b)
    c, jump = float(c), float(jump)
    if not a < c < b:
        raise BadParameter(f"jump location {c} must lie inside ]{a}, {b}[")
    at = jump if at is None else float(at)
    return StepFunction([a, c, b], [0.0, jump], values=[0.0, at, jump],
                        name=f"heaviside({c:g})")


def indicator(t: float = 0.5, a: float = 0.0, b: float = 1.0):
    """Characteristic function of the single point ``{t}``."""
    a, b = _interval(a, b)
    return PointSpikes((a, b), [float(t)], [1.0], name=f"indicator({t:g})")


def xn_family(n: int = 1):
    n = _positive_int(n, "n", allow_zero=True)
    if n == 0:
        return const(1.0)
    return smooth(0.0, 1.0, lambda x: np.asarray(x) ** n, lambda x: n * np.asarray(x) ** (n - 1),
                  lambda x: x ** (n + 1) / (n + 1), name=f"x^{n}")


def _scaled_sine(n: int, freq: float, name: str):
    crit = _lattice(0.5 * math.pi / freq, math.pi / freq, 0.0, TWO_PI)
    return smooth(0.0, TWO_PI, lambda x: snapped_trig("sin", freq * np.asarray(x)) / n,
                  lambda x: (freq / n) * snapped_trig("cos", freq * np.asarray(x)),
                  lambda x: -np.cos(freq * x) / (n * freq), critical=crit, name=name)


def sin_n(n: int = 1):
    """``sin(n x) / n`` on [0, 2 pi]."""
    n = _positive_int(n, "n")
    return _scaled_sine(n, float(n), f"sin_n({n})")


def sin_n2(n: int = 1):
    """``sin(n^2 x) / n`` on [0, 2 pi]."""
    n = _positive_int(n, "n")
    return _scaled_sine(n, float(n * n), f"sin_n2({n})")


def ramp():
    """``x`` on ``]0, 1]``, ``1`` on ``]1, 2[`` (closed up at the ends)."""
    t = np.array([0.0, 1.0, 2.0])
    return PiecewiseMonotone(
        t, dispatch(t, [lambda x: np.asarray(x, float), lambda x: np.ones(np.shape(x))]),
        [INCREASING, CONSTANT],
        deriv=dispatch(t, [lambda x: np.ones(np.shape(x)), lambda x: np.zeros(np.shape(x))]),
        antiderivative=lambda x: np.where(np.asarray(x) <= 1, 0.5 * np.asarray(x) ** 2,
                                          np.asarray(x) - 0.5),
        name="ramp")


def dini(a: float = 1.0, b: float = 2.0, c: float = -1.0, d: float = 3.0):
    """``a x sin^2(1/x) + b x cos^2(1/x)`` for x > 0, same with ``c, d``
    for x < 0, on [-1, 1]: Dini derivatives ``b, a`` on the right and
    ``d, c`` on the left at 0."""
    return BlackBox((-1.0, 1.0), _dini_formula(float(a), float(b), float(c), float(d)),
                    continuous=True, name=f"dini({a:g},{b:g},{c:g},{d:g})")


def _positive_int(v, label, allow_zero=False) -> int:
    try:
        iv = int(v)
    except (TypeError, ValueError) as exc:
        raise BadParameter(f"{label} must be an integer") from exc
    if iv != v or iv < (0 if allow_zero else 1):
        raise BadParameter(f"{label} must be a {'non-negative' if allow_zero else 'positive'}"
                           f" integer, got {v!r}")
    return iv


def _entry(name, builder, description):
    params = tuple(inspect.signature(builder).parameters)
    return CatalogEntry(name, params, builder, description)


CATALOG: dict[str, CatalogEntry] = {e.name: e for e in [
    _entry("const", const, "constant c"),
    _entry("linear", linear, "m x + c"),
    _entry("power", power, "x^n on [-1, 1]"),
    _entry("sin", sine, "sin x on [0, 2 pi]"),
    _entry("cos", cosine, "cos x on [0, 2 pi]"),
    _entry("abs", absolute, "|x| on [-1, 1]"),
    _entry("x_sin_inv", x_sin_inv, "x sin(1/x) on [0, 1], 0 at 0 (not BV)"),
    _entry("x2_sin_inv", x2_sin_inv, "x^2 sin(1/x) on [0, 1], 0 at 0"),
    _entry("cantor", cantor, "Cantor-Lebesgue function on [0, 1]"),
    _entry("spikes", spikes, "c^k at the k-th rational of ]0, 1[, k <= K"),
    _entry("heaviside", heaviside, "unit step at c"),
    _entry("indicator", indicator, "characteristic function of {t}"),
    _entry("xn_family", xn_family, "x^n on [0, 1]"),
    _entry("sin_n", sin_n, "sin(n x)/n on [0, 2 pi]"),
    _entry("sin_n2", sin_n2, "sin(n^2 x)/n on [0, 2 pi]"),
    _entry("ramp", ramp, "x on ]0, 1], 1 on ]1, 2["),
    _entry("dini", dini, "oscillating example with four distinct Dini derivatives at 0"),
]}


def catalog_get(name: str, *args, **params) -> FunctionRep:
    """Build catalog entry ``name``; positional args fill parameters in order."""
    try:
        entry = CATALOG[name]
    except KeyError:
        raise UnknownName(f"no catalog entry {name!r}; known: {', '.join(sorted(CATALOG))}") \
            from None
    if len(args) > len(entry.parameters):
        raise BadParameter(f"{name} takes at most {len(entry.parameters)} parameters")
    for key, val in zip(entry.parameters, args):
        if key in params:
            raise BadParameter(f"{name}: parameter {key!r} given twice")
        params[key] = val
    unknown = set(params) - set(entry.parameters)
    if unknown:
        raise BadParameter(f"{name}: unknown parameter(s) {sorted(unknown)}")
    return entry.build(**params)
