"""Batched adaptive Gauss-Kronrod (7/15) quadrature.

Many intervals are integrated at once: every round evaluates the integrand on
all active intervals in one vectorized call, accepts intervals whose local
error is within their share of the tolerance and bisects the rest.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureFailure

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.concatenate([_WG[:-1], _WG[::-1]])


def gk15(f, lo, hi):
    """One Gauss-Kronrod step on each interval; returns (estimate, error)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = center[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    kron = fx @ KRONROD_WEIGHTS * half
    gauss = fx[:, 1::2] @ GAUSS_WEIGHTS * half
    return kron, np.abs(kron - gauss)


def integrate_intervals(f, lo, hi, *, atol=1e-13, rtol=1e-11,
                        max_rounds=100, max_active=1 << 18):
    """Integrate ``f`` over each ``[lo[i], hi[i]]``.

    Returns ``(values, error)`` where ``values[i]`` is the integral over the
    i-th interval and ``error`` the summed Kronrod error estimate of all
    accepted subintervals.  The tolerance budget is shared in proportion to
    interval length.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    values = np.zeros(lo.shape)
    if lo.size == 0:
        return values, 0.0
    keep = hi > lo
    owner = np.flatnonzero(keep)
    a, b = lo[keep], hi[keep]
    total_len = float(np.sum(b - a))
    if total_len == 0.0:
        return values, 0.0
    err_total = 0.0
    budget = None
    for rnd in range(max_rounds):
        est, err = gk15(f, a, b)
        if not np.all(np.isfinite(est)):
            raise QuadratureFailure("integrand produced non-finite values")
        if budget is None:
            budget = max(atol, rtol * float(np.sum(np.abs(est))))
        width = b - a
        mid = 0.5 * (a + b)
        done = (err <= budget * width / total_len) | (mid <= a) | (mid >= b)
        if rnd == max_rounds - 1 or 2 * np.count_nonzero(~done) > max_active:
            done[:] = True
        np.add.at(values, owner[done], est[done])
        err_total += float(np.sum(err[done]))
        if done.all():
            break
        a, b, m, owner = a[~done], b[~done], mid[~done], owner[~done]
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        owner = np.concatenate([owner, owner])
    return values, err_total


def integrate(f, a, b, *, breakpoints=(), atol=1e-13, rtol=1e-11, fail_tol=1e-6):
    """Integral of ``f`` over ``[a, b]``, split at the given breakpoints."""
    if b < a:
        return -integrate(f, b, a, breakpoints=breakpoints, atol=atol, rtol=rtol,
                          fail_tol=fail_tol)
    pts = np.asarray(breakpoints, dtype=float)
    pts = pts[(pts > a) & (pts < b)]
    edges = np.unique(np.concatenate([[a], pts, [b]]))
    vals, err = integrate_intervals(f, edges[:-1], edges[1:], atol=atol, rtol=rtol)
    total = float(np.sum(vals))
    if err > max(fail_tol, 1e3 * rtol * abs(total)):
        raise QuadratureFailure(f"estimated error {err:.3g} on [{a}, {b}]")
    return total
