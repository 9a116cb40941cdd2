import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epct.core_types import (
    SQRT2,
    AuxState,
    Envelope,
    EnvelopeSpec,
    GradientDecomposition,
    PhaseState,
    ScalarField2D,
    ThresholdParams,
    decompose_gradient,
    make_threshold_params,
    polynomial_m2_bound,
    threshold_conditions,
)
from epct.errors import ValidationError


def poly_raw(m1=1.5):
    raw = dict(m1=m1, n1=2.8, n2=1.5, N=0.5, s=1.0, M=2.0)
    raw["m2"] = polynomial_m2_bound(1.5, 2.8, 1.5, 2.0, 0.5, 1.0) * 1.01
    return raw


def test_polynomial_example_validates():
    p = make_threshold_params(**poly_raw(), envelope="poly")
    assert p.envelope is Envelope.POLYNOMIAL
    assert p.m_star == pytest.approx(p.m1 * p.m2**p.M)
    assert p.n_star == pytest.approx(2.8 * 1.5**0.5)


def test_small_m1_is_reported_by_name():
    with pytest.raises(ValidationError) as info:
        make_threshold_params(**poly_raw(m1=1.0), envelope="poly")
    names = [v.name for v in info.value.violations]
    assert "m1 > sqrt(2)" in names
    v = next(v for v in info.value.violations if v.name == "m1 > sqrt(2)")
    assert v.lhs == 1.0 and v.rhs == pytest.approx(SQRT2)


def test_every_violation_is_listed():
    with pytest.raises(ValidationError) as info:
        make_threshold_params(m1=1.0, m2=0.5, n1=1.0, n2=0.5, M=0.1, N=2.0, envelope="poly")
    assert len(info.value.violations) >= 6


def test_exponential_example():
    # M = 5 exceeds m2 sqrt(2) = 4.243 and n2 = 2 exceeds the max term
    p = make_threshold_params(m1=1.5, m2=3.0, n1=1.0, n2=2.0, M=5.0, N=-1.0, envelope="exp")
    assert p.s == 1.0
    with pytest.raises(ValidationError) as info:
        make_threshold_params(m1=1.5, m2=3.0, n1=1.0, n2=2.0, M=4.0, N=-1.0, envelope="exp")
    assert [v.name for v in info.value.violations] == ["M > m2 sqrt(2)"]


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        make_threshold_params(m1=math.nan, m2=1, n1=1, n2=1, M=1, N=0.5)


def test_boundary_value_is_not_accepted():
    raw = poly_raw()
    raw["m1"] = SQRT2
    with pytest.raises(ValidationError):
        make_threshold_params(**raw)


def test_dict_round_trip():
    p = make_threshold_params(**poly_raw())
    assert ThresholdParams.from_dict(p.to_dict()) == p


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0, 100.0))
def test_increasing_m2_keeps_validity(factor):
    raw = poly_raw()
    raw["m2"] *= factor
    make_threshold_params(**raw)


def test_condition_margins_match_sides():
    for c in threshold_conditions(**poly_raw(), envelope="poly"):
        if c.strict:
            assert c.margin == pytest.approx((c.lhs - c.rhs) / max(abs(c.lhs), abs(c.rhs)))


@pytest.mark.parametrize(
    "M, expected",
    [
        (np.eye(2), (2.0, 0.0, 0.0, 0.0)),
        ([[0, -1], [1, 0]], (0.0, 2.0, 0.0, 0.0)),
        ([[1, 2], [3, 4]], (5.0, 1.0, -3.0, 5.0)),
    ],
)
def test_decompose_examples(M, expected):
    assert decompose_gradient(M).as_tuple() == expected


def test_decompose_round_trip_random():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        M = rng.normal(size=(2, 2)) * 10.0 ** rng.uniform(-3, 3)
        back = decompose_gradient(M).to_matrix()
        np.testing.assert_allclose(back, M, rtol=1e-14, atol=1e-14 * np.abs(M).max())


@given(st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=4))
def test_reconstruct_then_decompose(vals):
    g = GradientDecomposition(*vals)
    again = decompose_gradient(g.to_matrix())
    np.testing.assert_allclose(again.as_tuple(), vals, atol=1e-9 * (1 + max(map(abs, vals))))


def test_state_invariants():
    with pytest.raises(ValueError):
        PhaseState(rho=0.0, d=1.0)
    with pytest.raises(ValueError):
        AuxState(a=1.0, b=0.0, B=0.5)
    assert PhaseState(1.0, 2.0).as_array().tolist() == [1.0, 2.0]


def test_envelope_spec():
    poly = EnvelopeSpec("poly", s=2.0, upper=0.5)
    assert poly.lower(1.0) == -4.0
    assert poly.B(3.0) == 4.0
    assert poly.contains(0.5, 10.0) and not poly.contains(0.6, 0.0)
    exp = EnvelopeSpec("exp", s=3.0, upper=0.0)
    assert exp.s == 1.0
    assert exp.lower(1.0) == pytest.approx(-math.e)
    np.testing.assert_allclose(exp.lower(np.array([0.0, 1.0])), [-1.0, -math.e])
    assert EnvelopeSpec.from_vorticity("poly", 2.0, 1.0).upper == 2.0
    with pytest.raises(ValueError):
        EnvelopeSpec("poly", upper=-2.0)


def test_scalar_field():
    f = ScalarField2D.from_function(lambda x, y: np.cos(x), 16, 8)
    assert (f.nx, f.ny) == (16, 8)
    assert f.dx == pytest.approx(2 * math.pi / 16)
    assert abs(f.mean()) < 1e-15
    assert (f + 1.0).mean() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ScalarField2D(np.zeros((12, 16)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0
