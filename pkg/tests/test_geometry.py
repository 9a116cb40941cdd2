import dataclasses
import math

import numpy as np
import pytest

from epct.core_types import GOLDEN, SQRT2, AuxState, Envelope, ThresholdParams
from epct.errors import DegenerateLeading
from epct.geometry import (
    SurfaceFuncs,
    default_x_grid,
    discriminant,
    flux_dot_product,
    flux_positivity,
    flux_quadratic,
    leading_margin,
    lemma_sides,
    rest_point_astar,
    root_Rstar,
    surface_F,
    surface_gradient,
    verify_lemma,
)


def test_surface_examples(poly_params):
    f = SurfaceFuncs(poly_params)
    assert surface_F(AuxState(0.0, 0.0, 1.0), f) == pytest.approx(poly_params.n_star)
    assert poly_params.n_star > 0
    a0 = poly_params.n_star / poly_params.m_star
    assert surface_F(AuxState(a0, 0.0, 1.0), f) == pytest.approx(0.0, abs=1e-12)
    assert surface_F(AuxState(1.0, 1.0, 2.0), f) == pytest.approx(1.0 - f.m(1.0) + f.n(1.0))


def test_surface_funcs_signs(poly_params, exp_params):
    x = default_x_grid(200)
    for p in (poly_params, exp_params):
        f = SurfaceFuncs(p)
        assert np.all(f.m(x) > 0) and np.all(f.n(x) > 0) and np.all(f.dm(x) > 0)
        assert np.all(f.dn(x) > 0) == (p.N > 0)
    assert SurfaceFuncs(poly_params).m(0.0) == pytest.approx(poly_params.m_star)


def test_derivatives_match_finite_differences(poly_params):
    f = SurfaceFuncs(poly_params)
    h = 1e-6
    for x in (0.0, 1.0, 50.0):
        assert f.dm(x) == pytest.approx((f.m(x + h) - f.m(x)) / h, rel=1e-4)
        assert f.dn(x) == pytest.approx((f.n(x + h) - f.n(x)) / h, rel=1e-4)


def test_flux_quadratic_examples(poly_params):
    f = SurfaceFuncs(poly_params)
    assert flux_quadratic(f.intercept(0.0), 0.0, f) > 0
    n, dn = f.n(0.0), f.dn(0.0)
    assert flux_quadratic(0.0, 0.0, f) == pytest.approx(-0.5 * n * n + dn + 1.0)
    assert flux_quadratic(0.0, 0.0, f) < 0
    assert flux_quadratic(f.intercept(100.0), 100.0, f) > 0


@pytest.mark.parametrize("fixture", ["poly_params", "exp_params"])
def test_flux_quadratic_is_dot_product_on_surface(fixture, request):
    p = request.getfixturevalue(fixture)
    f = SurfaceFuncs(p)
    for x in (0.0, 0.7, 12.0):
        for a in (0.01, 0.3, 2.0):
            b = f.m(x) * a - f.n(x)  # on F = 0
            state = AuxState(a, b, x + 1.0)
            assert flux_dot_product(state, f) == pytest.approx(flux_quadratic(a, x, f), rel=1e-10, abs=1e-10)
            assert surface_gradient(state, f)[1] == 1.0


def test_root_below_intercept(poly_params):
    f = SurfaceFuncs(poly_params)
    r = root_Rstar(0.0, f)
    assert r is not None and r < f.intercept(0.0)
    assert flux_quadratic(r, 0.0, f) == pytest.approx(0.0, abs=1e-9)


def test_root_exists_for_exponential_constants(exp_params):
    # the discriminant stays positive for these constants (see notes)
    f = SurfaceFuncs(exp_params)
    for x in (0.0, 1.0, 100.0):
        assert discriminant(x, f) > 0
        assert root_Rstar(x, f) is not None


def test_degenerate_leading(poly_params):
    p = dataclasses.replace(poly_params, m1=SQRT2, m2=1.0)
    with pytest.raises(DegenerateLeading):
        root_Rstar(0.0, SurfaceFuncs(p))


def test_rest_point():
    for s in (1.0, 2.0, 5.0):
        assert rest_point_astar(0.0, "poly", s) == pytest.approx(GOLDEN - 1.0, rel=1e-15)
    assert rest_point_astar(0.0, "exp") == pytest.approx(GOLDEN - 1.0, rel=1e-15)
    x = np.geomspace(1e-3, 1e6, 100)
    a = rest_point_astar(x, "poly", 1.0)
    assert np.all(np.diff(a) < 0) and a[-1] < 1e-3
    # root of -B a^2 - a + 1
    B = 7.0
    assert -B * rest_point_astar(6.0) ** 2 - rest_point_astar(6.0) + 1 == pytest.approx(0.0, abs=1e-15)


def test_default_grid():
    x = default_x_grid()
    assert x.size == 10_001 and x[0] == 0.0 and x[-1] == pytest.approx(1e3)


@pytest.mark.parametrize("lemma", ["4.1", "4.2"])
def test_polynomial_lemmas_pass(lemma, poly_params):
    rep = verify_lemma(lemma, poly_params)
    assert rep.passed and rep.worst_margin > 0 and rep.n_points == 10_001


def test_lemma_5_2_passes(exp_params):
    assert verify_lemma("5.2", exp_params).passed


def test_lemma_5_1_fails_for_exponential_constants(exp_params):
    rep = verify_lemma("5.1", exp_params)
    assert not rep.passed
    lhs, rhs = lemma_sides("5.1", exp_params, np.array([0.0]))
    assert lhs[0] < rhs[0]


def test_lemma_5_1_deliberate_violation(exp_params):
    p = dataclasses.replace(exp_params, M=exp_params.m2 * SQRT2 * 0.9)
    rep = verify_lemma("5.1", p)
    assert not rep.passed and math.isfinite(rep.worst_x)


def test_unknown_lemma(poly_params):
    with pytest.raises(ValueError):
        verify_lemma("9.9", poly_params)


def test_leading_and_flux_checks(poly_params, exp_params):
    assert leading_margin(poly_params).passed
    assert leading_margin(exp_params).passed
    assert flux_positivity(poly_params).passed
    # the exponential flux is not positive at the intercept near x = 0
    rep = flux_positivity(exp_params)
    assert not rep.passed and rep.worst_x < 1.0


def test_report_dict(poly_params):
    d = verify_lemma("4.2", poly_params).to_dict()
    assert set(d) == {"lemma", "pass", "worst_margin", "worst_x", "n_points"}
