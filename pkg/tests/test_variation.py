from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bvtoolkit.errors import NotBV, PartitionMismatch, UnsupportedRep
from bvtoolkit.funcrep import catalog_get, scale
from bvtoolkit.variation import (CONVERGED, EXCEEDED, Partition,
                                 jordan_decompose, oscillation_variation, pos_neg_variation,
                                 total_variation, total_variation_exact,
                                 total_variation_refine, variation_function,
                                 variation_on_partition)

from _pool import BV_CATALOG, algebra_violations, pool_member, seeds

TWO_PI = 2 * math.pi
HALF_PI = math.pi / 2


# -- examples -------------------------------------------------------------------------

def test_variation_on_partition_examples():
    sin = catalog_get("sin")
    assert variation_on_partition(sin, Partition([0, HALF_PI, 3 * HALF_PI, TWO_PI])) == 4.0
    assert variation_on_partition(catalog_get("const", 3), Partition.uniform((0, 1), 17)) == 0
    f = catalog_get("power", n=3)
    P = Partition(np.sort(np.concatenate([[-1, 1], np.random.default_rng(0).uniform(-1, 1, 50)])))
    assert variation_on_partition(f, P) == pytest.approx(2.0, abs=1e-14)
    with pytest.raises(PartitionMismatch):
        variation_on_partition(sin, Partition([0, 1]))
    with pytest.raises(PartitionMismatch):
        Partition([0, 0.5, 0.5, 1])


def test_total_variation_exact_examples():
    assert total_variation_exact(catalog_get("sin")) == 4.0
    assert total_variation_exact(catalog_get("spikes", c=0.5, K=10)) == pytest.approx(
        2 * (1 - 2.0 ** -10), abs=1e-15)
    assert total_variation_exact(catalog_get("cantor")) == 1.0
    with pytest.raises(UnsupportedRep):
        total_variation_exact(catalog_get("dini"))


def test_total_variation_exact_known_values():
    assert total_variation_exact(catalog_get("abs")) == 2.0
    assert total_variation_exact(catalog_get("heaviside", c=0.3, at=0.5)) == 1.0
    assert total_variation_exact(catalog_get("indicator", t=0.3)) == 2.0
    assert total_variation_exact(catalog_get("sin_n2", n=5)) == pytest.approx(20.0, abs=1e-12)
    assert math.isinf(total_variation_exact(catalog_get("x_sin_inv")))


def test_refine_examples():
    rep = total_variation_refine(catalog_get("x_sin_inv"), bound=10)
    assert rep.verdict == EXCEEDED and rep.value > 10
    f2 = catalog_get("x2_sin_inv")
    rep = total_variation_refine(f2)
    assert rep.verdict == CONVERGED
    assert rep.value == pytest.approx(total_variation_exact(f2), abs=1e-6)
    rep = total_variation_refine(catalog_get("sin"), max_depth=12)
    assert rep.verdict == CONVERGED and rep.value == pytest.approx(4.0, abs=1e-4)
    assert all(b >= a for a, b in zip(rep.lower_bounds, rep.lower_bounds[1:]))


def test_refine_blackbox():
    rep = total_variation_refine(catalog_get("dini"), max_depth=14)
    assert rep.lower_bounds == sorted(rep.lower_bounds)
    assert total_variation(catalog_get("sin")) == 4.0


def test_oscillation_examples():
    sin = catalog_get("sin")
    assert oscillation_variation(sin, Partition([0, TWO_PI])) == 2.0
    assert oscillation_variation(sin, Partition.dyadic(sin.interval, 10)) == pytest.approx(
        4.0, abs=1e-3)
    f = catalog_get("linear", m=2)
    assert oscillation_variation(f, Partition.uniform((0, 1), 7)) == pytest.approx(2.0)
    with pytest.raises(UnsupportedRep):
        oscillation_variation(catalog_get("dini"), Partition.uniform((-1, 1), 4))


def test_pos_neg_examples():
    assert pos_neg_variation(catalog_get("linear", m=3)) == (3.0, 0.0)
    assert pos_neg_variation(catalog_get("sin")) == (2.0, 2.0)
    assert pos_neg_variation(scale(catalog_get("sin"), -1)) == (2.0, 2.0)
    with pytest.raises(NotBV):
        pos_neg_variation(catalog_get("x_sin_inv"))


def test_variation_function_examples():
    sin = catalog_get("sin")
    assert variation_function(sin, HALF_PI) == pytest.approx(1.0, abs=1e-15)
    assert variation_function(sin, TWO_PI) == 4.0
    for name, params in BV_CATALOG:
        f = catalog_get(name, **params)
        assert variation_function(f, f.a) == 0.0


def test_jordan_examples():
    f = catalog_get("linear", m=2, c=1)
    p, n = jordan_decompose(f)
    x = np.linspace(0, 1, 101)
    np.testing.assert_allclose(p(x) - n(x), f(x), atol=1e-14)
    assert np.ptp(n(x)) == 0
    p, n = jordan_decompose(catalog_get("sin"))
    assert p(TWO_PI) - n(TWO_PI) == pytest.approx(0, abs=1e-15)
    assert p(TWO_PI) + n(TWO_PI) == pytest.approx(4)
    p, n = jordan_decompose(catalog_get("const", 2))
    assert np.ptp(p(x)) == 0 and np.ptp(n(x)) == 0


# -- invariants -------------------------------------------------------------------------

@given(seeds)
def test_refinement_never_decreases(seed):
    rng = np.random.default_rng(seed)
    f = pool_member(rng)
    P = Partition(np.unique(np.concatenate([[-1, 1], rng.uniform(-1, 1, 10)])))
    Q = P.refine(rng.uniform(-1, 1, 5))
    assert variation_on_partition(f, P) <= variation_on_partition(f, Q) + 1e-12


def test_algebra_suite_200_pairs():
    rng = np.random.default_rng(2024)
    failures = []
    for _ in range(200):
        f, g = pool_member(rng), pool_member(rng)
        failures += [(f.name, g.name, v) for v in algebra_violations(f, g, rng)]
    assert failures == []


@given(seeds)
def test_algebra_properties(seed):
    rng = np.random.default_rng(seed)
    assert algebra_violations(pool_member(rng), pool_member(rng), rng) == []


@given(seeds, st.integers(min_value=1, max_value=40))
def test_partition_le_oscillation_le_total(seed, n):
    rng = np.random.default_rng(seed)
    f = pool_member(rng)
    P = Partition(np.unique(np.concatenate([[-1, 1], rng.uniform(-1, 1, n)])))
    v = variation_on_partition(f, P)
    o = oscillation_variation(f, P)
    assert v <= o + 1e-12
    assert o <= total_variation_exact(f) + 1e-12


@pytest.mark.parametrize("name,params", BV_CATALOG)
def test_jordan_parts_nondecreasing(name, params):
    f = catalog_get(name, **params)
    p, n = jordan_decompose(f)
    x = np.unique(np.concatenate([np.linspace(f.a, f.b, 1000), f.t[:2000]]))
    T = total_variation_exact(f)
    tol = 1e-9 * max(1.0, T)
    assert np.all(np.diff(p(x)) >= -tol)
    assert np.all(np.diff(n(x)) >= -tol)
    np.testing.assert_allclose(p(x) - n(x), f(x), atol=tol)
    Tp, Tn = pos_neg_variation(f)
    assert Tp + Tn == pytest.approx(T, abs=tol)
    assert Tp - Tn == pytest.approx(float(f(f.b)) - float(f(f.a)), abs=tol)


@pytest.mark.parametrize("name,params", BV_CATALOG)
def test_variation_function_is_monotone_and_additive(name, params):
    f = catalog_get(name, **params)
    x = np.linspace(f.a, f.b, 257)
    V = variation_function(f, x)
    assert np.all(np.diff(V) >= -1e-12)
    assert V[-1] == pytest.approx(total_variation_exact(f), abs=1e-12)
    c = x[100]
    assert total_variation_exact(f, (f.a, c)) == pytest.approx(V[100], abs=1e-12)
