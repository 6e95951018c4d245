"""Representations with bespoke structure: the Cantor function and x^p sin(1/x)."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import polygamma, sici

from ..errors import BadParameter
from .base import INCREASING, OSCILLATING, PiecewiseMonotone, Residual

_SHIFT = 62
_ONE = np.uint64(1) << np.uint64(_SHIFT)
_MASK = _ONE - np.uint64(1)
_MAX_DIGITS = 64


def _ternary_scan(x, level=None, integral=False):
    """Shared ternary-digit loop for the Cantor function and its relatives.

    Each x in [0, 1] is held exactly as ``N / 2**62`` (uint64).  Digits are
    produced by ``3N >> 62``.  With ``level`` the scan stops after that many
    digits and interpolates linearly on the remaining fraction; with
    ``integral`` it accumulates ``int_0^x Theta`` instead of ``Theta(x)``.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    scaled = np.ldexp(x, _SHIFT)
    exact = (scaled == np.floor(scaled)) & (x < 1.0)
    ones = x >= 1.0
    out[ones] = 0.5 if integral else 1.0
    slow = ~exact & ~ones
    if slow.any():
        out[slow] = [_ternary_scan_exact(v, level, integral) for v in x[slow]]
    if not exact.any():
        return out
    N = scaled[exact].astype(np.uint64)
    acc = np.zeros(N.shape)
    weight = np.ones(N.shape)  # 2**-k for Theta, 6**-k for the integral
    alive = np.ones(N.shape, dtype=bool)
    steps = _MAX_DIGITS if level is None else level
    three = np.uint64(3)
    for _ in range(steps):
        if not alive.any():
            break
        tN = N * three
        digit = (tN >> np.uint64(_SHIFT)).astype(np.int64)
        N = np.where(alive, tN & _MASK, N)
        y = N.astype(float) / float(_ONE)
        if integral:
            d1 = alive & (digit == 1)
            d2 = alive & (digit == 2)
            acc = np.where(d1, acc + weight * (1 / 12 + y / 6), acc)
            acc = np.where(d2, acc + weight * (1 / 4 + y / 6), acc)
            weight = np.where(alive, weight / 6, weight)
        else:
            weight = np.where(alive, weight * 0.5, weight)
            acc = np.where(alive & (digit >= 1), acc + weight, acc)
        alive &= digit != 1
    if level is not None and not integral:
        acc = np.where(alive, acc + weight * (N.astype(float) / float(_ONE)), acc)
    out[exact] = acc
    return out


def _ternary_scan_exact(v, level, integral):
    from fractions import Fraction

    r = Fraction(v)
    acc, weight = Fraction(0), Fraction(1)
    steps = _MAX_DIGITS if level is None else level
    for _ in range(steps):
        r *= 3
        d = int(r)
        r -= d
        if integral:
            if d == 1:
                return float(acc + weight * (Fraction(1, 12) + r / 6))
            if d == 2:
                acc += weight * (Fraction(1, 4) + r / 6)
            weight /= 6
        else:
            weight /= 2
            if d >= 1:
                acc += weight
            if d == 1:
                return float(acc)
    if level is not None and not integral:
        acc += weight * r
    return float(acc)


def cantor_exact(x):
    """Cantor-Lebesgue function: ternary digits, 2 -> 1, stop after the first 1."""
    return _ternary_scan(x)


def cantor_approximant(x, n: int):
    """Level-``n`` approximant: linear on the 2^n surviving intervals of
    length 3^-n, constant on the removed ones."""
    if n < 0:
        raise BadParameter("level must be >= 0")
    return _ternary_scan(x, level=n)


def cantor_integral(x):
    """``int_0^x Theta`` via self-similarity (no quadrature)."""
    return _ternary_scan(x, integral=True)


class CantorFunction(PiecewiseMonotone):
    """The Cantor-Lebesgue function on [0, 1] as one increasing piece.

    The derivative is zero off the Cantor set, which is what distinguishes it
    from an absolutely continuous increasing function downstream.
    """

    singular = True

    def __init__(self, level: int = 20):
        if level < 0:
            raise BadParameter("level must be >= 0")
        self.level = int(level)
        super().__init__([0.0, 1.0], cantor_exact, [INCREASING],
                         left=[0.0, 1.0], values=[0.0, 1.0], right=[0.0, 1.0],
                         deriv=lambda x: np.zeros(np.shape(x)),
                         antiderivative=cantor_integral, name=f"cantor({self.level})")

    def approximant(self, x, n=None):
        return cantor_approximant(x, self.level if n is None else n)

    def approximant_rep(self, n=None) -> PiecewiseMonotone:
        """Level-n approximant as its own (absolutely continuous) representation."""
        n = self.level if n is None else int(n)
        return PiecewiseMonotone([0.0, 1.0], lambda x, _n=n: cantor_approximant(x, _n),
                                 [INCREASING], left=[0.0, 1.0], values=[0.0, 1.0],
                                 right=[0.0, 1.0], name=f"cantor_approx({n})")


def critical_u(k, p: int):
    """Roots ``u_k`` in ``(k pi, (k + 1/2) pi)`` of ``p sin u = u cos u``.

    ``x = 1/u_k`` are the critical points of ``x^p sin(1/x)``.
    """
    k = np.asarray(k, dtype=float)
    w = (k + 0.5) * np.pi
    u = w - p / w
    for _ in range(8):
        g = p * np.sin(u) - u * np.cos(u)
        gp = (p - 1) * np.cos(u) + u * np.sin(u)
        u = u - g / gp
    return u


def _abs_peak(u, p):
    # |f(1/u)| for f = x^p sin(1/x)
    return np.abs(np.sin(u)) / u ** p


class OscillatingSine(PiecewiseMonotone):
    """``x^p sin(1/x)`` on [0, 1] (value 0 at 0), for ``p`` in {1, 2}.

    Breakpoints are the ``n_critical`` largest critical points; the piece
    ``[0, x_K]`` left below them is kept as an oscillating residual whose
    variation is known in closed form (infinite for ``p = 1``).  Deeper
    truncations come from :meth:`materialize` or :meth:`breakpoints_at_depth`.
    """

    _TAIL_EXPLICIT = 64

    def __init__(self, power: int, n_critical: int = 1 << 14):
        if power not in (1, 2):
            raise BadParameter("power must be 1 or 2")
        if n_critical < 1:
            raise BadParameter("need at least one critical point")
        p = self.power = int(power)
        self.n_critical = int(n_critical)
        crit = 1.0 / critical_u(np.arange(self.n_critical, 0, -1), p)
        t = np.concatenate([[0.0], crit, [1.0]])
        vals = np.concatenate([[0.0], self._f(t[1:])])
        dirs = np.sign(np.diff(vals)).astype(np.int8)
        dirs[0] = OSCILLATING
        super().__init__(t, self._f, dirs, left=vals, values=vals, right=vals,
                         deriv=self._df, antiderivative=self._primitive,
                         residual=Residual(self._residual_variation),
                         name=("x_sin_inv" if p == 1 else "x2_sin_inv"))

    def _f(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return np.where(x > 0, x ** self.power * np.sin(1.0 / np.where(x > 0, x, 1.0)), 0.0)

    def _df(self, x):
        x = np.asarray(x, dtype=float)
        p = self.power
        with np.errstate(all="ignore"):
            xs = np.where(x > 0, x, 1.0)
            d = p * xs ** (p - 1) * np.sin(1 / xs) - xs ** (p - 2) * np.cos(1 / xs)
            return np.where(x > 0, d, 0.0)

    def _primitive(self, x):
        """``int_0^x t^p sin(1/t) dt`` in closed form through Si / Ci."""
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            xs = np.where(x > 0, x, 1.0)
            s, c = np.sin(1 / xs), np.cos(1 / xs)
            si, ci = sici(1 / xs)
            if self.power == 1:
                g = 0.5 * xs * xs * s + 0.5 * xs * c + 0.5 * si - 0.25 * np.pi
            else:
                g = xs ** 3 * s / 3 + xs * xs * c / 6 - xs * s / 6 + ci / 6
        return np.where(x > 0, g, 0.0)

    def materialize(self, n_critical: int) -> "OscillatingSine":
        return OscillatingSine(self.power, n_critical)

    def breakpoints_at_depth(self, depth: int) -> np.ndarray:
        """The ``2**depth`` largest critical points plus the endpoints.

        Nested in ``depth``, so partitions built from them only refine.
        """
        k = 1 << int(depth)
        if k == self.n_critical:
            return self.t
        crit = 1.0 / critical_u(np.arange(k, 0, -1), self.power)
        return np.concatenate([[0.0], crit, [1.0]])

    def peak_bound(self) -> float:
        """Bound on ``|f|`` over the residual piece."""
        return float(self.t[1] ** self.power)

    def tail_sum(self, k0: int) -> float:
        """``sum_{k > k0} |f(x_k)|`` (finite for p = 2 only)."""
        if self.power == 1:
            return math.inf
        m = self._TAIL_EXPLICIT
        u = critical_u(np.arange(k0 + 1, k0 + m + 1), self.power)
        explicit = float(np.sum(_abs_peak(u, self.power)))
        z = k0 + m + 1.5
        tail = polygamma(1, z) / np.pi ** 2 + polygamma(3, z) / (3 * np.pi ** 4)
        return explicit + float(tail)

    def _residual_variation(self, x: float) -> float:
        x = float(x)
        if x <= 0.0:
            return 0.0
        if self.power == 1:
            return math.inf
        big_u = 1.0 / x
        k0 = max(int(big_u / np.pi) - 1, 1)
        while critical_u(k0, self.power) < big_u:
            k0 += 1
        uk = float(critical_u(k0, self.power))
        fk = math.sin(uk) / uk ** self.power
        fx = float(self._f(np.array([x]))[0])
        return abs(fx - fk) + abs(fk) + 2.0 * self.tail_sum(k0)


def dini_example(a: float, b: float, c: float, d: float):
    """Piecewise oscillating function whose four Dini derivatives at 0 are
    ``b, a, d, c`` (upper/lower right, upper/lower left)."""

    def f(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            xs = np.where(x != 0, x, 1.0)
            s2, c2 = np.sin(1 / xs) ** 2, np.cos(1 / xs) ** 2
            pos = a * x * s2 + b * x * c2
            neg = c * x * s2 + d * x * c2
        return np.where(x > 0, pos, np.where(x < 0, neg, 0.0))

    return f
