"""Finite signed measures on an open interval, the derivative measure Df and
Riemann-Stieltjes integration through it.

A measure here is ``density dx + sum of point masses + continuous singular
parts``.  Every cumulative quantity uses the half-open convention
``mu(]a, x[)``, so atoms at ``x`` are not yet counted at ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .decompose import (_primitive_of_derivative, detect_jumps, integral_abs_derivative)
from .errors import (BadParameter, DiscontinuousIntegrand, DomainError, NotBV,
                     QuadratureFailure, UnsupportedRep)
from .funcrep.base import (BlackBox, FunctionRep, GridFunction, Interval, PiecewiseMonotone,
                           _safe, as_interval)
from .funcrep.special import CantorFunction, cantor_exact
from .quadrature import integrate_intervals
from .variation import Partition, total_variation_exact

# grid resolution for numerically built singular CDFs
_SINGULAR_GRID_DEPTH = 16


@dataclass(frozen=True)
class SingularPart:
    """A continuous singular component: ``cdf(x) = part(]a, x[)``, ``cdf(a) = 0``.

    ``mass`` is its total variation.  ``kind`` is ``"cantor"`` for a multiple
    of the Cantor measure (exact CDF) and ``"grid"`` for a CDF sampled on a
    fine uniform grid.
    """

    kind: str
    cdf: Callable
    mass: float

    def __post_init__(self):
        if self.kind not in ("cantor", "grid"):
            raise BadParameter(f"unknown singular kind {self.kind!r}")
        if not (math.isfinite(self.mass) and self.mass >= 0):
            raise BadParameter("singular mass must be finite and >= 0")


@dataclass(frozen=True)
class FiniteSignedMeasure:
    """``mu = density dx + sum_k w_k delta_{x_k} + singular parts`` on ``]a, b[``.

    Optional exact data speeds things up and removes quadrature error:
    ``density_primitive(x) = int_a^x density``, ``density_mass = int |density|``.
    ``oscillatory`` lists sub-intervals where the density oscillates too fast
    for quadrature; integrals against it there go through the primitive.
    """

    interval: Interval
    density: Optional[Callable] = None
    atoms: tuple = ()
    singular_parts: tuple = ()
    density_breakpoints: np.ndarray = field(default_factory=lambda: np.zeros(0))
    density_primitive: Optional[Callable] = None
    density_mass: Optional[float] = None
    oscillatory: tuple = ()

    def __post_init__(self):
        iv = as_interval(self.interval)
        object.__setattr__(self, "interval", iv)
        atoms = tuple(sorted((float(x), float(w)) for x, w in self.atoms))
        locs = [x for x, _ in atoms]
        if any(not (iv.a < x < iv.b) for x in locs):
            raise BadParameter("atoms must lie in the open interval")
        if len(set(locs)) != len(locs):
            raise BadParameter("atom locations must be distinct")
        if any(w == 0.0 or not math.isfinite(w) for _, w in atoms):
            raise BadParameter("atom weights must be finite and nonzero")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "singular_parts", tuple(self.singular_parts))
        bp = np.asarray(self.density_breakpoints, dtype=float).reshape(-1)
        bp = np.unique(bp[(bp > iv.a) & (bp < iv.b)])
        object.__setattr__(self, "density_breakpoints", bp)

    @property
    def a(self) -> float:
        return self.interval.a

    @property
    def b(self) -> float:
        return self.interval.b

    def _edges(self) -> np.ndarray:
        return np.concatenate([[self.a], self.density_breakpoints, [self.b]])

    def to_dict(self, grid_n: int = 256) -> dict:
        """Measure JSON: sampled density, atom list and singular masses."""
        nodes = self.interval.nodes(int(grid_n))
        dens = (np.zeros(nodes.size) if self.density is None
                else _safe(self.density, nodes))
        dens = np.where(np.isfinite(dens), dens, 0.0)
        return {
            "interval": [self.a, self.b],
            "density": {"n": int(grid_n), "samples": dens.tolist()},
            "atoms": [[x, w] for x, w in self.atoms],
            "singular": [{"kind": p.kind, "mass": p.mass} for p in self.singular_parts],
        }


def measure_from_dict(obj: dict) -> FiniteSignedMeasure:
    """Inverse of :meth:`FiniteSignedMeasure.to_dict`.

    The density is read back as the linear interpolant of its samples;
    ``"cantor"`` parts become ``mass * Theta`` rescaled to the interval.
    ``"grid"`` parts need their CDF samples under ``"cdf"``.
    """
    try:
        a, b = (float(v) for v in obj["interval"])
        iv = Interval(a, b)
        dens = obj.get("density")
        density = None
        if dens is not None:
            density = GridFunction(iv, dens["samples"])
        parts = []
        for p in obj.get("singular", []):
            kind, mass = p["kind"], float(p["mass"])
            if kind == "cantor":
                cdf = (lambda x, _m=mass: _m * cantor_exact((np.asarray(x, float) - a) / (b - a)))
            elif kind == "grid":
                cdf = GridFunction(iv, p["cdf"])
            else:
                raise BadParameter(f"unknown singular kind {kind!r}")
            parts.append(SingularPart(kind, cdf, mass))
        return FiniteSignedMeasure(iv, density, tuple((float(x), float(w)) for x, w in
                                                       obj.get("atoms", [])), tuple(parts))
    except (KeyError, TypeError, ValueError) as exc:
        raise BadParameter(f"malformed measure: {exc}") from exc


# -- the derivative measure -------------------------------------------------------

def _require_bv(rep: FunctionRep, what: str) -> PiecewiseMonotone:
    if not isinstance(rep, PiecewiseMonotone):
        raise UnsupportedRep(f"{what} needs an exact representation, got {rep!r}")
    if math.isinf(total_variation_exact(rep)):
        raise NotBV(f"{rep!r} has unbounded variation")
    return rep


def derivative_measure(rep: FunctionRep) -> FiniteSignedMeasure:
    """``Df`` on ``]a, b[``: density ``f'``, atoms ``f(x_k+) - f(x_k-)`` at
    interior jumps, and the continuous singular part of f.

    Point values that differ from both one-sided limits (removable
    discontinuities) carry no mass: they do not change ``f`` as a
    distribution.
    """
    f = _require_bv(rep, "derivative_measure")
    jumps = detect_jumps(f)
    atoms = tuple((j.location, j.right_limit - j.left_limit) for j in jumps.jumps
                  if j.right_limit != j.left_limit)
    density_mass = integral_abs_derivative(f)
    primitive = _primitive_of_derivative(f, 1e-10)
    parts = []
    if f.singular:
        T = total_variation_exact(f)
        open_T = T - abs(jumps.start_term) - abs(jumps.end_term)
        mass = max(0.0, open_T - density_mass - sum(abs(w) for _, w in atoms))
        if isinstance(f, CantorFunction):
            parts.append(SingularPart("cantor", cantor_exact, 1.0))
        elif mass > 0.0:
            parts.append(SingularPart("grid", _singular_grid_cdf(f, primitive, atoms), mass))
    oscillatory = ((float(f.t[0]), float(f.t[1])),) if f.residual is not None else ()
    return FiniteSignedMeasure(f.interval, f.deriv, atoms, tuple(parts),
                               density_breakpoints=f.t, density_primitive=primitive,
                               density_mass=density_mass, oscillatory=oscillatory)


def _singular_grid_cdf(f: PiecewiseMonotone, primitive, atoms) -> GridFunction:
    """``f_cs(x) - f_cs(a+)`` sampled on a fine grid, with ``f_cs = f - F - jumps``."""
    iv = f.interval
    nodes = iv.nodes(1 << _SINGULAR_GRID_DEPTH)
    vals = np.asarray(f.right_limit(nodes[:-1]), dtype=float)
    vals = np.append(vals, f.left[-1])
    vals = vals - primitive(nodes)
    for x, w in atoms:
        vals = vals - w * (nodes > x)
    vals = vals - vals[0]
    return GridFunction(iv, vals)


# -- cumulative functions ------------------------------------------------------------

def _density_cumulative(mu: FiniteSignedMeasure, x: np.ndarray) -> np.ndarray:
    if mu.density is None:
        return np.zeros(x.shape)
    if mu.density_primitive is not None:
        return np.asarray(mu.density_primitive(x), dtype=float)
    edges = mu._edges()
    dens = lambda z: _safe(mu.density, z)  # noqa: E731
    per, err = integrate_intervals(dens, edges[:-1], edges[1:])
    cum = np.concatenate([[0.0], np.cumsum(per)])
    i = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, edges.size - 2)
    part, err2 = integrate_intervals(dens, edges[i], x)
    if max(err, err2) > 1e-8 * max(1.0, float(np.sum(np.abs(per)))):
        raise QuadratureFailure(f"density primitive: error estimate {max(err, err2):.3g}")
    return cum[i] + part


def accumulate(mu: FiniteSignedMeasure, x, closed: bool = False):
    """``mu(]a, x[)``, or ``mu(]a, x]`` with ``closed=True`` (vectorized)."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(arr <= mu.a) or np.any(arr >= mu.b):
        raise DomainError(f"cdf is defined on the open interval ]{mu.a}, {mu.b}[")
    out = _density_cumulative(mu, arr)
    if mu.atoms:
        locs = np.array([p for p, _ in mu.atoms])
        cw = np.concatenate([[0.0], np.cumsum([w for _, w in mu.atoms])])
        out = out + cw[np.searchsorted(locs, arr, side="right" if closed else "left")]
    for part in mu.singular_parts:
        out = out + np.asarray(part.cdf(arr), dtype=float)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def cdf(mu: FiniteSignedMeasure, x):
    """``mu(]a, x[)`` for ``x`` in ``]a, b[``: left-continuous in x."""
    return accumulate(mu, x, closed=False)


def measure_total_variation(mu: FiniteSignedMeasure) -> float:
    """``|mu|(]a, b[) = int |density| + sum |w_k| + sum of singular masses``."""
    total = sum(abs(w) for _, w in mu.atoms) + sum(p.mass for p in mu.singular_parts)
    if mu.density is None:
        return float(total)
    if mu.density_mass is not None:
        return float(total + mu.density_mass)
    edges = mu._edges()
    vals, err = integrate_intervals(lambda z: np.abs(_safe(mu.density, z)),
                                    edges[:-1], edges[1:])
    dm = float(np.sum(vals))
    if err > 1e-8 * max(1.0, dm):
        raise QuadratureFailure(f"int |density|: error estimate {err:.3g}")
    return float(total + dm)


# -- Stieltjes integration ----------------------------------------------------------

def _require_continuous(f: FunctionRep) -> None:
    if isinstance(f, PiecewiseMonotone):
        if not f.is_continuous():
            raise DiscontinuousIntegrand(f"{f!r} has jumps; the integrand must be continuous")
    elif isinstance(f, BlackBox) and f.continuous is False:
        raise DiscontinuousIntegrand(f"{f!r} is flagged discontinuous")


def _by_parts(f: FunctionRep, D: Callable, lo: float, hi: float, depth: int) -> float:
    """``int_lo^hi f dD = f D |_lo^hi - int D df``; the last term by midpoint sums."""
    x = np.linspace(lo, hi, (1 << depth) + 1)
    fx = f(x)
    mid = 0.5 * (x[:-1] + x[1:])
    Dlo, Dhi = (float(v) for v in D(np.array([lo, hi])))
    return float(fx[-1] * Dhi - fx[0] * Dlo - np.sum(D(mid) * np.diff(fx)))


def integrate_against(f: FunctionRep, mu: FiniteSignedMeasure, depth: int = 16) -> float:
    """``int_]a,b[ f dmu`` for continuous f.

    Density part by Gauss-Kronrod on the pieces (by parts on oscillatory
    pieces), atoms exactly, singular parts by midpoint Riemann-Stieltjes sums
    on ``2**depth`` equal cells.
    """
    _require_continuous(f)
    total = 0.0
    if mu.density is not None:
        edges = mu._edges()
        if isinstance(f, PiecewiseMonotone):
            edges = np.union1d(edges, f.t[(f.t > mu.a) & (f.t < mu.b)])
        elif isinstance(f, BlackBox):
            edges = np.union1d(edges, f.breakpoints[(f.breakpoints > mu.a)
                                                     & (f.breakpoints < mu.b)])
        lo, hi = edges[:-1], edges[1:]
        keep = np.ones(lo.size, dtype=bool)
        for (olo, ohi) in mu.oscillatory:
            keep &= ~((lo >= olo) & (hi <= ohi))
            D = lambda z: _density_cumulative(mu, np.asarray(z, dtype=float))  # noqa: E731
            total += _by_parts(f, D, olo, ohi, depth)
        vals, err = integrate_intervals(lambda z: f(z) * _safe(mu.density, z),
                                        lo[keep], hi[keep], rtol=1e-12)
        s = float(np.sum(vals))
        if err > 1e-8 * max(1.0, abs(s)):
            raise QuadratureFailure(f"int f * density: error estimate {err:.3g}")
        total += s
    if mu.atoms:
        locs = np.array([x for x, _ in mu.atoms])
        total += float(np.sum(f(locs) * np.array([w for _, w in mu.atoms])))
    if mu.singular_parts:
        x = mu.interval.nodes(1 << depth)
        fm = f(0.5 * (x[:-1] + x[1:]))
        for part in mu.singular_parts:
            c = np.asarray(part.cdf(x), dtype=float)
            total += float(np.sum(fm * np.diff(c)))
    return total


def stieltjes(f: FunctionRep, g: FunctionRep, depth: int = 16) -> float:
    """``int_a^b f dg`` for continuous f and BV g, through ``Dg``.

    ``= f(a) (g(a+) - g(a)) + int_]a,b[ f dDg + f(b) (g(b) - g(b-))``.
    """
    _require_continuous(f)
    gg = _require_bv(g, "stieltjes")
    if f.interval != gg.interval:
        raise DomainError(f"f lives on {f.interval}, g on {gg.interval}")
    mu = derivative_measure(gg)
    fa, fb = float(f(gg.a)), float(f(gg.b))
    ends = fa * (gg.right[0] - gg.values[0]) + fb * (gg.values[-1] - gg.left[-1])
    return float(ends + integrate_against(f, mu, depth))


def riemann_stieltjes_sum(f: FunctionRep, g: FunctionRep, P, tags: str = "mid") -> float:
    """``sum f(xi_i) (g(x_i) - g(x_{i-1}))`` with left, right or midpoint tags."""
    pts = P.points if isinstance(P, Partition) else np.asarray(P, dtype=float)
    if tags == "left":
        xi = pts[:-1]
    elif tags == "right":
        xi = pts[1:]
    elif tags == "mid":
        xi = 0.5 * (pts[:-1] + pts[1:])
    else:
        raise BadParameter("tags must be 'left', 'right' or 'mid'")
    return float(np.sum(f(xi) * np.diff(g(pts))))


# -- normalized BV ---------------------------------------------------------------------

class NormalizedBV(PiecewiseMonotone):
    """``g*(x) = g(x+) - g(a)`` inside, ``g*(a) = 0``, ``g*(b) = g(b) - g(a)``.

    ``offset`` is the subtracted ``g(a)``.
    """

    def __init__(self, g: PiecewiseMonotone):
        ga = float(g.values[0])
        self.offset = ga
        self.source = g
        left = g.left - ga
        right = g.right - ga
        values = right.copy()
        values[0] = 0.0
        values[-1] = g.values[-1] - ga
        right[0] = g.right[0] - ga
        anti = None
        if g.antiderivative is not None:
            anti = lambda x, _G=g.antiderivative: (np.asarray(_G(x)) - ga  # noqa: E731
                                                   * (np.asarray(x, dtype=float) - g.a))
        super().__init__(g.t, lambda x, _f=g.func: np.asarray(_f(x)) - ga, g.directions,
                         left=left, values=values, right=right, deriv=g.deriv,
                         antiderivative=anti, residual=g.residual, name=f"nbv({g.name})")
        self.singular = g.singular
        if hasattr(g, "deriv_integral"):
            self.deriv_integral = g.deriv_integral

    @property
    def starts_at_zero(self) -> bool:
        return self.values[0] == 0.0

    @property
    def right_continuous(self) -> bool:
        return bool(np.all(self.values[1:-1] == self.right[1:-1]))


def normalize_nbv(g: FunctionRep) -> NormalizedBV:
    """The normalized representative of g (same Stieltjes functional)."""
    return NormalizedBV(_require_bv(g, "normalize_nbv"))


def functional_norm(g: FunctionRep) -> float:
    """``||f -> int f dg||`` on ``C[a, b]``, i.e. ``T_{g*}[a, b]``."""
    return total_variation_exact(normalize_nbv(g))


__all__ = [
    "SingularPart", "FiniteSignedMeasure", "NormalizedBV", "measure_from_dict",
    "derivative_measure", "measure_total_variation", "cdf", "accumulate",
    "integrate_against", "stieltjes", "riemann_stieltjes_sum", "normalize_nbv",
    "functional_norm",
]
