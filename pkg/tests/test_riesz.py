import numpy as np
import pytest

from epct.core_types import ScalarField2D
from epct.errors import GridMismatch, NonzeroMean
from epct.riesz import A_of_t, forcing_fields, riesz_apply, riesz_symbol, strain_integrals


def field(func, n=64):
    return ScalarField2D.from_function(func, n)


def random_field(rng, n=64, band=12):
    hat = np.zeros((n, n), complex)
    hat[:band, :band] = rng.normal(size=(band, band)) + 1j * rng.normal(size=(band, band))
    hat[0, 0] = 0.0
    v = np.fft.ifft2(hat).real
    return ScalarField2D(v - v.mean())


def test_single_mode_examples():
    h = field(lambda x, y: np.cos(x))
    assert np.max(np.abs(riesz_apply(h, 1, 1).values - h.values)) < 1e-12
    assert np.max(np.abs(riesz_apply(h, 2, 2).values)) < 1e-12
    assert np.max(np.abs(riesz_apply(h, 1, 2).values)) < 1e-12
    g = field(lambda x, y: np.cos(x + y))
    assert np.max(np.abs(riesz_apply(g, 1, 2).values - 0.5 * g.values)) < 1e-12


def test_trace_identity_and_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(50):
        h = random_field(rng)
        tr = riesz_apply(h, 1, 1).values + riesz_apply(h, 2, 2).values
        assert np.max(np.abs(tr - h.values)) < 1e-10
        assert np.array_equal(riesz_apply(h, 1, 2).values, riesz_apply(h, 2, 1).values)


def test_parseval_bound():
    rng = np.random.default_rng(1)
    h = ScalarField2D(rng.normal(size=(32, 32)))
    h = h - h.mean()
    for i, j in ((1, 1), (2, 2), (1, 2)):
        assert np.linalg.norm(riesz_apply(h, i, j).values) <= np.linalg.norm(h.values) * (1 + 1e-14)


def test_symbol_properties():
    s = riesz_symbol(1, 2, 16, 16, 2 * np.pi, 2 * np.pi)
    assert s[0, 0] == 0.0 and np.all(np.abs(s) <= 0.5)
    with pytest.raises(ValueError):
        riesz_symbol(0, 1, 16, 16, 1.0, 1.0)


def test_nonzero_mean_rejected():
    with pytest.raises(NonzeroMean):
        riesz_apply(field(lambda x, y: 1.0 + np.cos(x)), 1, 1)


def test_forcing_examples():
    eps = 0.01
    f1, f2 = forcing_fields(field(lambda x, y: 1.0 + 0 * x))
    assert np.max(np.abs(f1.values)) == 0.0 and np.max(np.abs(f2.values)) == 0.0
    rho = field(lambda x, y: 1.0 + eps * np.cos(x))
    f1, f2 = forcing_fields(rho, k=-1.0, c_b=1.0)
    assert np.max(np.abs(f1.values + eps * np.cos(rho_x(rho)))) < 1e-14
    assert np.max(np.abs(f2.values)) < 1e-14
    rho = field(lambda x, y: 1.0 + eps * np.cos(x + y))
    f1, f2 = forcing_fields(rho, k=-1.0)
    assert np.max(np.abs(f1.values)) < 1e-14
    assert np.max(np.abs(f2.values + (rho.values - 1.0))) < 1e-14
    with pytest.raises(NonzeroMean):
        forcing_fields(field(lambda x, y: 1.5 + 0 * x))


def rho_x(rho):
    return np.arange(rho.nx)[:, None] * rho.dx * np.ones((1, rho.ny))


def test_A_of_t_examples():
    t = np.linspace(0.0, 2.0, 41)
    zero, one = np.zeros_like(t), np.ones_like(t)
    A = A_of_t(t, zero, zero, one, 0.7, 0.2, 0.3, 1.4)
    np.testing.assert_allclose(A, 0.5 * (0.5**2 - (0.2 / 1.4) ** 2 - (0.3 / 1.4) ** 2))
    A = A_of_t(t, zero, zero, one, 0.7, 0.0, 0.0, 1.4)
    np.testing.assert_allclose(A, 0.5 * 0.5**2)
    A = A_of_t(t, one, zero, one, 0.0, 0.0, 0.0, 1.0)
    np.testing.assert_allclose(A, -0.5 * t**2, atol=1e-14)
    # the upper bound holds for any forcing
    rng = np.random.default_rng(3)
    f = rng.normal(size=(2, t.size))
    assert np.all(A_of_t(t, f[0], f[1], one, 0.7, 0.1, -0.4, 1.2) <= 0.5 * (0.7 / 1.2) ** 2 + 1e-15)


def test_simpson_is_more_accurate():
    t = np.linspace(0.0, 1.0, 21)
    f = np.cos(t)
    one = np.ones_like(t)
    err = {m: abs(strain_integrals(t, f, f, one, m)[0][-1] - np.sin(1.0)) for m in ("trapezoid", "simpson")}
    assert err["simpson"] < err["trapezoid"] / 100


def test_grid_mismatch():
    t = np.linspace(0.0, 1.0, 5)
    with pytest.raises(GridMismatch):
        A_of_t(t, np.zeros(4), np.zeros(5), np.ones(5), 0, 0, 0, 1)
    with pytest.raises(GridMismatch):
        A_of_t(t[::-1], np.zeros(5), np.zeros(5), np.ones(5), 0, 0, 0, 1)
    with pytest.raises(ValueError):
        strain_integrals(t, t, t, t + 1, method="midpoint")
