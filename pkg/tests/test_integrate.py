import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halfosc.integrate import (LimitKind, PanelGrid, TailKind, Trend, estimate_liminf, estimate_limsup,
                               geometric_grid, integrate, integrate_to_infinity, limit_from_samples)


def simpson_to_infinity(f, a, n=200_000):
    """Fixed-step composite Simpson rule after the substitution s = a / x."""
    x = np.linspace(1e-12, 1.0, n + 1)
    g = f(a / x) * a / x ** 2
    h = x[1] - x[0]
    return h / 3 * (g[0] + g[-1] + 4 * g[1:-1:2].sum() + 2 * g[2:-1:2].sum())


def test_improper_integral_matches_simpson():
    f = lambda s: s ** (-12 / 5)
    res = integrate(f, 1.0, math.inf)
    assert res.value == pytest.approx(5 / 7, rel=1e-10)
    assert simpson_to_infinity(f, 1.0) == pytest.approx(res.value, rel=1e-8)


def test_tail_converges_to_one_twentieth():
    res = integrate_to_infinity(lambda s: s ** -21.0, 1.0)
    assert res.kind is TailKind.CONVERGED
    assert res.value == pytest.approx(1 / 20, rel=1e-10)


@pytest.mark.parametrize("f,exponent", [(lambda s: s ** 6.0, 7.0), (lambda s: 1.0 / s, 0.0),
                                        (lambda s: s ** -0.5, 0.5)])
def test_tail_divergence_with_growth_exponent(f, exponent):
    res = integrate_to_infinity(f, 1.0)
    assert res.kind is TailKind.DIVERGED
    assert res.growth_exponent == pytest.approx(exponent, abs=0.05)


def test_finite_interval_and_degenerate():
    assert integrate(lambda s: s ** 6, 1.0, 2.0).value == pytest.approx(127 / 7, rel=1e-12)
    assert integrate(math.exp, 1.0, 1.0).value == 0.0
    with pytest.raises(ValueError):
        integrate(math.exp, 2.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(1.1, 6.0), st.floats(0.5, 3.0))
def test_tail_value_is_power_law_antiderivative(p, a):
    res = integrate_to_infinity(lambda s: s ** -p, a)
    assert res.converged
    assert res.value == pytest.approx(a ** (1 - p) / (p - 1), rel=1e-8)


def test_panel_grid_cumulative_matches_antiderivative():
    g = PanelGrid([1.0, 10.0, 1e4], grade_at=[1.0], max_ratio=1.25)
    vals = g.cumulative((g.x - 1.0) ** (1 / 3))
    exact = 0.75 * (g.x - 1.0) ** (4 / 3)
    assert np.allclose(vals, exact, rtol=1e-10, atol=1e-13)
    assert g.total(g.x ** 2) == pytest.approx((1e12 - 1) / 3, rel=1e-12)


@pytest.mark.parametrize("kind,g,expected", [
    (LimitKind.LIMSUP, lambda t: 2 - 1 / t, 2.0),
    (LimitKind.LIMINF, lambda t: 0.5 + 1 / t, 0.5),
    (LimitKind.LIMSUP, lambda t: 1 + 0.3 * np.sin(np.log(t)), 1.3),
])
def test_limit_estimates(kind, g, expected):
    est = (estimate_limsup if kind is LimitKind.LIMSUP else estimate_liminf)(g, 1.0, horizon=1e8)
    assert est.estimate == pytest.approx(expected, abs=1e-3)


def test_trend_classification():
    grid = geometric_grid(1.0, 1e4, 1.25)
    assert limit_from_samples(LimitKind.LIMSUP, grid, np.ones_like(grid)).trend is Trend.PLATEAU
    assert limit_from_samples(LimitKind.LIMSUP, grid, grid).trend is Trend.RISING
    assert limit_from_samples(LimitKind.LIMSUP, grid, 1 / grid).trend is Trend.FALLING
