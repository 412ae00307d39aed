import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depbounds.marginals import (
    DegenerateInputError,
    DiamondDist,
    diamond_cdf,
    diamond_quantile,
    empirical,
    gini_m,
    m2_cross,
    parse_marginal,
    point,
    quantile,
    uniform,
)

# -- closed-form oracles -------------------------------------------------------


@pytest.mark.parametrize(
    "dist, u, expected",
    [
        (uniform(0, 1), 0.5, 0.5),
        (uniform(0, 4), 0.25, 1.0),
        (point(3), 0.9, 3.0),
        (empirical([3.0, 1.0, 2.0]), 0.5, 2.0),
        (empirical([1.0, 2.0]), 0.5, 1.0),
    ],
)
def test_quantile_values(dist, u, expected):
    assert quantile(dist, u) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_quantile_rejects_levels_outside_open_interval(u):
    with pytest.raises(ValueError):
        quantile(uniform(0, 1), u)


@pytest.mark.parametrize("x, expected", [(0.5, 0.75), (0.0, 0.0), (1.0, 1.0), (0.25, 0.4375), (3.0, 1.0)])
def test_diamond_cdf_uniform_pair(x, expected):
    # |U - V| has cdf 2x - x^2 on [0, 1]
    assert diamond_cdf(uniform(0, 1), uniform(0, 1), x) == pytest.approx(expected, abs=1e-14)


def test_diamond_cdf_negative_argument():
    with pytest.raises(ValueError):
        diamond_cdf(uniform(0, 1), uniform(0, 1), -0.1)


@pytest.mark.parametrize(
    "f, g, u, expected",
    [
        (uniform(0, 1), uniform(0, 1), 0.75, 0.5),
        (uniform(0, 1), uniform(0, 1), 1e-12, 0.0),
        (point(0), uniform(0, 1), 0.5, 0.5),
        (uniform(0, 1), point(0), 0.3, 0.3),
        (point(1), point(4), 0.5, 3.0),
    ],
)
def test_diamond_quantile_values(f, g, u, expected):
    assert diamond_quantile(f, g, u) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("u", [0.01, 0.2, 0.5, 0.9, 0.999])
def test_diamond_quantile_uniform_closed_form(u):
    assert diamond_quantile(uniform(0, 1), uniform(0, 1), u) == pytest.approx(1 - math.sqrt(1 - u), abs=1e-12)


@pytest.mark.parametrize("u", [0.0, 1.0])
def test_diamond_quantile_domain(u):
    with pytest.raises(ValueError):
        diamond_quantile(uniform(0, 1), uniform(0, 1), u)


@pytest.mark.parametrize(
    "beta, expected", [(1.0, 1 / 3), (2.0, 1 / 6), (0.5, 8 / 15), (1.5, 2 / 2.5 - 2 / 3.5)]
)
def test_gini_uniform(beta, expected):
    assert gini_m(uniform(0, 1), uniform(0, 1), beta) == pytest.approx(expected, abs=1e-14)
    assert gini_m(uniform(0, 1), uniform(0, 1), beta, method="quadrature") == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("a, b", [(0, 1), (-2, 3), (5, 5.5)])
def test_gini_uniform_scale(a, b):
    assert gini_m(uniform(a, b), uniform(a, b), 1.0) == pytest.approx((b - a) / 3, rel=1e-12)


@pytest.mark.parametrize("beta", [0.0, -1.0, 2.5])
def test_gini_beta_domain(beta):
    with pytest.raises(ValueError):
        gini_m(uniform(0, 1), uniform(0, 1), beta)


@pytest.mark.parametrize(
    "f, g, expected",
    [
        (uniform(0, 1), uniform(0, 1), 1 / 6),
        (point(2.5), point(2.5), 0.0),
        (uniform(0, 4), uniform(0, 1), 11 / 3),
        (point(0), uniform(0, 1), 1 / 3),
    ],
)
def test_m2_cross_values(f, g, expected):
    assert m2_cross(f, g) == pytest.approx(expected, abs=1e-14)


def test_m2_cross_monte_carlo():
    rng = np.random.default_rng(11)
    x = rng.uniform(0, 4, 10**6)
    y = rng.uniform(0, 1, 10**6)
    z = (x - y) ** 2
    assert abs(z.mean() - 11 / 3) < 4 * z.std() / math.sqrt(z.size)


def test_m2_cross_degenerate_empirical():
    with pytest.raises(DegenerateInputError):
        m2_cross(empirical([1.0]), uniform(0, 1))


# -- cross-family agreement ----------------------------------------------------

MIXED = [
    (uniform(0, 1), uniform(0, 1)),
    (uniform(0, 4), uniform(0, 1)),
    (uniform(-1, 0.5), uniform(0.2, 3)),
    (point(0.3), uniform(0, 1)),
    (empirical([0.1, 0.4, 0.45, 0.9]), uniform(0, 2)),
    (empirical([0.0, 1.0, 3.0]), empirical([0.5, 2.0])),
]


@pytest.mark.parametrize("f, g", MIXED)
@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5, 2.0])
def test_gini_closed_form_matches_quadrature(f, g, beta):
    assert gini_m(f, g, beta) == pytest.approx(gini_m(f, g, beta, method="quadrature"), abs=1e-8)


@pytest.mark.parametrize("f, g", MIXED)
@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
def test_gini_symmetric(f, g, beta):
    assert gini_m(f, g, beta) == pytest.approx(gini_m(g, f, beta), abs=1e-10)


@pytest.mark.parametrize("f, g", MIXED)
def test_gini_beta_two_is_m2(f, g):
    assert gini_m(f, g, 2.0) == pytest.approx(m2_cross(f, g), abs=1e-10)


@pytest.mark.parametrize("f, g", MIXED)
def test_diamond_cdf_matches_empirical(f, g):
    rng = np.random.default_rng(3)
    u, v = rng.random((2, 10**5))
    z = np.sort(np.abs(f._ppf(u) - g._ppf(v)))
    grid = np.unique(np.r_[z[::97], z[-1]])
    ecdf = np.searchsorted(z, grid, side="right") / z.size
    model = diamond_cdf(f, g, grid)
    assert np.max(np.abs(ecdf - model)) < 0.01


@pytest.mark.parametrize("f, g", MIXED)
def test_diamond_dist_invariants(f, g):
    dd = DiamondDist(f, g)
    x = np.linspace(0, 10, 400)
    c = dd.cdf(x)
    assert c[0] >= 0 and np.all(np.diff(c) >= -1e-14)
    assert dd.cdf(1e6) == pytest.approx(1.0)
    u = np.linspace(0.005, 0.995, 100)
    assert np.all(dd.cdf(dd.quantile(u)) >= u - 1e-9)


@pytest.mark.parametrize("x, y", [(0.5, 0.7), (0.55, 1.0), (0.6, 0.61), (0.5, 1.0)])
def test_stochastic_order_of_distance_to_point(x, y):
    t = np.linspace(0, 1, 201)
    fx = diamond_cdf(uniform(0, 1), point(x), t)
    fy = diamond_cdf(uniform(0, 1), point(y), t)
    assert np.all(fx >= fy - 1e-15)


# -- properties ----------------------------------------------------------------

bounds_ab = st.tuples(
    st.floats(-50, 50, allow_nan=False), st.floats(0.01, 50, allow_nan=False)
).map(lambda p: (p[0], p[0] + p[1]))


@given(bounds_ab, st.lists(st.floats(0.001, 0.999), min_size=2, max_size=20))
def test_quantile_nondecreasing(ab, us):
    us = np.sort(us)
    q = uniform(*ab).quantile(us)
    assert np.all(np.diff(q) >= 0)


@given(bounds_ab, st.floats(0.001, 0.999))
def test_quantile_symmetry_center(ab, u):
    m = uniform(*ab)
    assert m.quantile(u) + m.quantile(1 - u) == pytest.approx(2 * m.mu, abs=1e-9 * (1 + abs(m.mu)))


@given(bounds_ab)
def test_uniform_moments(ab):
    a, b = ab
    m = uniform(a, b)
    assert m.mean == pytest.approx((a + b) / 2)
    assert m.var == pytest.approx((b - a) ** 2 / 12)


@settings(max_examples=50)
@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=30))
def test_empirical_sorted(values):
    m = empirical(values)
    assert list(m.atoms) == sorted(values)


@pytest.mark.parametrize("a, b", [(1, 1), (2, 1)])
def test_uniform_requires_order(a, b):
    with pytest.raises(ValueError):
        uniform(a, b)


def test_empirical_requires_values():
    with pytest.raises(ValueError):
        empirical([])


def test_parse_marginal(tmp_path):
    assert parse_marginal("uniform:0,4") == uniform(0, 4)
    assert parse_marginal("point:3") == point(3)
    path = tmp_path / "s.txt"
    path.write_text("0.5\n0.1\n0.3\n")
    assert parse_marginal(f"empirical:{path}") == empirical([0.1, 0.3, 0.5])
    for bad in ("uniform", "uniform:1", "gamma:1,2", "point:x"):
        with pytest.raises(ValueError):
            parse_marginal(bad)
