from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bvtoolkit.decompose import ACVerdict, classify_ac, integral_abs_derivative
from bvtoolkit.errors import BadParameter, DiscontinuousInput, DomainError, NotBV
from bvtoolkit.funcrep import catalog_get
from bvtoolkit.mollify import (MeanParams, aitken_limit, default_schedule, integral_mean,
                               mean_variation, variation_via_means)
from bvtoolkit.variation import total_variation_exact

TWO_PI = 2 * math.pi


def test_mean_of_constant_and_line():
    p = MeanParams(0.2, 0.05)
    x = np.linspace(0, 0.8, 101)
    np.testing.assert_allclose(integral_mean(catalog_get("const", 3.5), p)(x), 3.5, atol=1e-14)
    m = -1.7
    got = integral_mean(catalog_get("linear", m=m), p)(x)
    np.testing.assert_allclose(got, m * x + m * 0.05 / 2, atol=1e-14)


def test_mean_domain():
    f = integral_mean(catalog_get("sin"), MeanParams(0.3, 0.1))
    assert f.a == 0.0 and f.b == pytest.approx(TWO_PI - 0.3)


def test_mean_matches_quadrature_oracle():
    f = catalog_get("cantor")
    h = 0.01
    mean = integral_mean(f, MeanParams(0.1, h))
    x = np.random.default_rng(0).uniform(0, 0.9, 30)
    t = np.linspace(0, h, 20001)
    for xi in x:
        vals = f(xi + t)
        ref = np.sum(0.5 * (vals[1:] + vals[:-1])) * (t[1] - t[0]) / h
        assert mean(xi) == pytest.approx(ref, abs=1e-6)


def test_sup_distance_shrinks():
    sin = catalog_get("sin")
    x = np.linspace(0, TWO_PI - 0.2, 1000)
    dist = [np.max(np.abs(integral_mean(sin, MeanParams(0.2, h))(x) - sin(x)))
            for h in (0.1, 0.01, 0.001)]
    assert dist[0] > dist[1] > dist[2]
    assert dist[-1] <= 0.001  # modulus of continuity of sin: |sin(x+t) - sin x| <= t


def test_mean_variation_examples():
    p = MeanParams(0.25, 0.1)
    for m in (2.0, -0.5):
        assert mean_variation(catalog_get("linear", m=m), p) == pytest.approx(abs(m) * 0.75)
        assert mean_variation(catalog_get("linear", m=m), p, sub=(0.1, 0.3)) == pytest.approx(
            abs(m) * 0.2)
    assert mean_variation(catalog_get("const", 1.0), p) == pytest.approx(0.0, abs=1e-14)


def test_mean_variation_equals_variation_of_mean():
    for name in ("sin", "cantor", "x2_sin_inv", "abs"):
        f = catalog_get(name)
        p = MeanParams((f.b - f.a) / 8, (f.b - f.a) / 64)
        assert mean_variation(f, p) == pytest.approx(
            total_variation_exact(integral_mean(f, p)), rel=1e-9)


def test_errors():
    with pytest.raises(DiscontinuousInput):
        integral_mean(catalog_get("heaviside"), MeanParams(0.2, 0.1))
    with pytest.raises(NotBV):
        integral_mean(catalog_get("x_sin_inv"), MeanParams(0.2, 0.1))
    with pytest.raises(BadParameter):
        integral_mean(catalog_get("sin"), MeanParams(0.1, 0.2))
    with pytest.raises(DomainError):
        mean_variation(catalog_get("sin"), MeanParams(0.2, 0.1), sub=(0, TWO_PI))


def test_sin_sweep_example():
    sin = catalog_get("sin")
    sub = (0.0, TWO_PI - 0.25)
    sweep = variation_via_means(sin, [0.2, 0.1, 0.05, 0.025], sub=sub)
    vals = [v for _, v in sweep.rows]
    assert vals == sorted(vals)
    ref = total_variation_exact(sin, sub)
    assert ref == pytest.approx(4 - math.sin(0.25), abs=1e-14)  # up 1, down 2, up 1 - sin .25
    assert all(v <= sweep.bound + 1e-9 for v in vals)
    assert sweep.limit == pytest.approx(ref, abs=2e-3)


def test_cantor_sweep():
    f = catalog_get("cantor")
    sweep = variation_via_means(f, sub=(0.0, 0.99), delta=0.01,
                                h_schedule=default_schedule(0.01, 6))
    assert all(v <= sweep.bound + 1e-9 for _, v in sweep.rows)
    ref = total_variation_exact(f, (0.0, 0.99))  # Cantor value at 0.99
    assert ref == 61 / 64  # 0.99 = 0.222201..._3 -> 0.111101_2
    assert sweep.limit == pytest.approx(ref, abs=2e-2)


def test_cantor_sweep_near_full_interval_reaches_one():
    f = catalog_get("cantor")
    sweep = variation_via_means(f, default_schedule(0.001, 6), sub=(0.0, 0.999), delta=0.001)
    assert sweep.bound == 1.0
    assert sweep.limit == pytest.approx(1.0, abs=2e-2)


def test_x2_sin_inv_sweep_matches_integral_abs_derivative():
    f = catalog_get("x2_sin_inv")
    sweep = variation_via_means(f, default_schedule(0.125, 12))
    ref = integral_abs_derivative(f.restrict(0.0, 0.875))
    assert sweep.limit == pytest.approx(ref, abs=1e-3)


@given(st.sampled_from(["sin", "cantor", "x2_sin_inv", "abs", "cos"]),
       st.floats(min_value=0.05, max_value=0.3), st.floats(min_value=0.01, max_value=0.9))
def test_mean_variation_bound(name, delta_frac, h_frac):
    f = catalog_get(name)
    L = f.b - f.a
    delta = delta_frac * L
    p = MeanParams(delta, h_frac * delta)
    sub_b = f.b - delta
    assert mean_variation(f, p) <= total_variation_exact(f, (f.a, sub_b + delta)) + 1e-9


@pytest.mark.parametrize("name", ["sin", "cantor", "x2_sin_inv"])
def test_means_are_absolutely_continuous(name):
    f = catalog_get(name)
    p = MeanParams((f.b - f.a) / 8, (f.b - f.a) / 100)
    assert classify_ac(integral_mean(f, p)) == ACVerdict.ABSOLUTELY_CONTINUOUS


@given(st.sampled_from(["sin", "cantor", "abs"]), st.integers(0, 2**32 - 1))
def test_mean_lipschitz_bound(name, seed):
    f = catalog_get(name)
    h = (f.b - f.a) / 50
    mean = integral_mean(f, MeanParams((f.b - f.a) / 8, h))
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(mean.a, mean.b, (2, 100))
    M = 1.0  # sup |f| for all three
    assert np.all(np.abs(mean(y) - mean(x)) <= 2 * M / h * np.abs(y - x) + 1e-12)


def test_aitken():
    vals = [1 - 0.5 ** k for k in range(1, 8)]
    assert aitken_limit(vals) == pytest.approx(1.0, abs=1e-12)
    assert aitken_limit([1.0, 1.0, 1.0]) == 1.0
    assert aitken_limit([2.0]) == 2.0
    assert default_schedule(0.2, 3) == [0.1, 0.05, 0.025]
