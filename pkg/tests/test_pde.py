import math

import numpy as np
import pytest
from scipy.integrate import cumulative_simpson

from epct.core_types import ScalarField2D, grid_coordinates
from epct.errors import CflViolation, FlowAborted
from epct.pde import (
    CharacteristicTrace,
    FlowState,
    cfl_limit,
    default_starts,
    run_flow,
    smooth_initial_state,
    step_flow,
    trace_characteristic,
    verify_flow,
    verify_reduction,
)


def state_from(rho, u1, u2, t=0.0):
    r = ScalarField2D(rho)
    return FlowState(r, r.with_values(u1), r.with_values(u2), t)


def uniform(n, c=(0.0, 0.0), rho=None):
    x1, x2 = grid_coordinates(n, n)
    rho = np.ones((n, n)) if rho is None else rho(x1, x2)
    return state_from(rho, np.full((n, n), c[0]), np.full((n, n), c[1]))


def test_equilibrium_is_fixed():
    s = uniform(32)
    out = step_flow(s, 0.1)
    assert np.array_equal(out.rho.values, s.rho.values)
    assert np.max(np.abs(out.u1.values)) == 0.0 and out.t == pytest.approx(0.1)


def test_translation_without_coupling():
    c = (0.5, -0.25)
    s = uniform(64, c, rho=lambda x, y: 1.0 + 0.1 * np.cos(x + 2 * y))
    hist = run_flow(s, 0.5, k=0.0)
    end = hist.states[-1]
    x1, x2 = grid_coordinates(64, 64)
    exact = 1.0 + 0.1 * np.cos((x1 - c[0] * 0.5) + 2 * (x2 - c[1] * 0.5))
    assert np.max(np.abs(end.rho.values - exact)) < 1e-8
    assert np.max(np.abs(end.u1.values - c[0])) < 1e-14


def test_linear_mode_grows_like_cosh():
    eps = 1e-6
    s = uniform(64, rho=lambda x, y: 1.0 + eps * np.cos(x))
    hist = run_flow(s, 0.5)
    x1, _ = grid_coordinates(64, 64)
    for st in hist.states:
        rho1 = (st.rho.values - 1.0) / eps
        u1 = st.u1.values / eps
        assert np.max(np.abs(rho1 - np.cos(x1) * np.cosh(st.t))) < 1e-4
        assert np.max(np.abs(u1 + np.sin(x1) * np.sinh(st.t))) < 1e-4


def test_cfl_violation():
    s = uniform(32, (2.0, 0.0))
    limit = cfl_limit(s)
    assert limit == pytest.approx(0.5 * (2 * math.pi / 32) / 2.0)
    step_flow(s, limit)
    with pytest.raises(CflViolation):
        step_flow(s, 1.01 * limit)
    with pytest.raises(CflViolation):
        step_flow(s, 0.0)


def test_mass_conservation():
    hist = run_flow(smooth_initial_state(64), 0.3)
    means = [st.rho.mean() for st in hist.states]
    assert np.max(np.abs(np.diff(means))) < 1e-12
    assert np.all([st.rho.values.min() > 0 for st in hist.states])


def test_abort_on_gradient_growth():
    x1, _ = grid_coordinates(64, 64)
    s = state_from(np.ones((64, 64)), -3.0 * np.sin(x1), np.zeros((64, 64)))
    with pytest.raises(FlowAborted):
        run_flow(s, 0.5, k=0.0)


def test_trace_at_rest_and_constant_drift():
    hist = run_flow(uniform(32), 0.4)
    tr = trace_characteristic(hist, (1.0, 2.0))
    assert np.allclose(tr.x1, 1.0) and np.allclose(tr.x2, 2.0)
    rep = verify_reduction(tr)
    assert rep.max_rel == 0.0 and max(rep.omega_abs, rep.strain_abs, rep.divergence_abs) < 1e-14
    hist = run_flow(uniform(32, (1.0, 0.0)), 0.4, k=0.0)
    tr = trace_characteristic(hist, (6.0, 2.0))
    np.testing.assert_allclose(tr.x1, np.mod(6.0 + tr.t, 2 * math.pi), atol=1e-12)
    np.testing.assert_allclose(tr.x2, 2.0, atol=1e-12)


def test_density_follows_divergence():
    hist = run_flow(smooth_initial_state(64), 0.3)
    for x0 in default_starts(4):
        tr = trace_characteristic(hist, x0)
        integral = cumulative_simpson(tr.d, x=tr.t, initial=0.0)
        np.testing.assert_allclose(tr.rho, tr.rho[0] * np.exp(-integral), rtol=1e-4)


def test_smooth_run_residuals():
    rep, traces = verify_flow(64, 0.3, default_starts(4))
    assert rep.n_traces == 4 and len(traces) == 4
    assert rep.max_rel < 1e-2
    assert rep.note.startswith("periodic torus")
    assert isinstance(traces[0], CharacteristicTrace)
    assert len(traces[0].rows()[0]) == len(CharacteristicTrace.COLUMNS)


def test_irrotational_data_stays_irrotational():
    _, traces = verify_flow(64, 0.3, default_starts(4), irrotational=True)
    assert max(np.max(np.abs(t.omega)) for t in traces) < 1e-6


def test_initial_amplitude_is_grid_independent():
    for n in (32, 128):
        s = smooth_initial_state(n, amplitude=0.1)
        assert np.max(np.abs(s.rho.values - 1.0)) <= 0.1 + 1e-12
        assert abs(s.rho.mean() - 1.0) < 1e-14
