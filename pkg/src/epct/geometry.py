"""Geometry of the invariant region of the auxiliary 3x3 systems.

The region is bounded by the surface ``F(a, b, B) = b - m(B-1) a + n(B-1) = 0``
and the plane ``b = 0``. Everything here is expressed in the shifted
variable ``x = B - 1 >= 0``. Functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_types import DEFAULT_SLACK, AuxState, Envelope, ThresholdParams, relative_margin
from .errors import DegenerateLeading

LEMMA_IDS = ("4.1", "4.2", "5.1", "5.2")


@dataclass(frozen=True)
class SurfaceFuncs:
    """The envelope functions ``m(x) = m1 (x+m2)^M`` and ``n(x) = n1 (x+n2)^N``."""

    params: ThresholdParams

    @property
    def kind(self) -> Envelope:
        return self.params.envelope

    def m(self, x):
        p = self.params
        return p.m1 * np.power(np.asarray(x, float) + p.m2, p.M)

    def n(self, x):
        p = self.params
        return p.n1 * np.power(np.asarray(x, float) + p.n2, p.N)

    def dm(self, x):
        p = self.params
        return p.M * p.m1 * np.power(np.asarray(x, float) + p.m2, p.M - 1.0)

    def dn(self, x):
        p = self.params
        return p.N * p.n1 * np.power(np.asarray(x, float) + p.n2, p.N - 1.0)

    def intercept(self, x):
        """a-intercept ``n(x)/m(x)`` of the surface at fixed ``B = x + 1``."""
        return self.n(x) / self.m(x)


def _clock_power(x, kind: Envelope, s: float):
    # B^s for the polynomial law, plain B for the exponential one
    B = np.asarray(x, float) + 1.0
    return np.power(B, s) if Envelope.parse(kind) is Envelope.POLYNOMIAL else B


def surface_F(state: AuxState, funcs: SurfaceFuncs) -> float:
    """Evaluate ``F(a, b, B) = b - m(B-1) a + n(B-1)``; positive inside the region."""
    x = state.B - 1.0
    return float(state.b - funcs.m(x) * state.a + funcs.n(x))


def surface_gradient(state: AuxState, funcs: SurfaceFuncs) -> np.ndarray:
    """``grad F`` with components ordered ``(a, b, B)``."""
    x = state.B - 1.0
    return np.array(
        [-funcs.m(x), 1.0, -funcs.dm(x) * state.a + funcs.dn(x)], dtype=float
    )


def flux_coefficients(x, funcs: SurfaceFuncs, kind: Envelope | str | None = None):
    """Coefficients ``(c2, c1, c0)`` of the flux quadratic ``c2 a^2 + c1 a + c0``.

    Restricted to the surface, ``<a', b', B'> . grad F`` equals this quadratic
    in ``a``. For the exponential law ``B' = B`` so the ``m'``, ``n'`` terms
    carry an extra factor ``B``.
    """
    kind = funcs.kind if kind is None else Envelope.parse(kind)
    x = np.asarray(x, float)
    m, n, dm, dn = funcs.m(x), funcs.n(x), funcs.dm(x), funcs.dn(x)
    Bs = _clock_power(x, kind, funcs.params.s)
    if kind is Envelope.EXPONENTIAL:
        B = x + 1.0
        dm, dn = B * dm, B * dn
    c2 = 0.5 * m * m - Bs
    c1 = -(1.0 + dm)
    c0 = -0.5 * n * n + dn + 1.0
    return c2, c1, c0


def flux_quadratic(a, x, funcs: SurfaceFuncs, kind: Envelope | str | None = None):
    """Normal component of the vector field on the surface at ``(a, B = x + 1)``.

    Positive values mean trajectories on the surface move into the region.
    """
    c2, c1, c0 = flux_coefficients(x, funcs, kind)
    a = np.asarray(a, float)
    out = (c2 * a + c1) * a + c0
    return out if np.ndim(out) else float(out)


def flux_dot_product(state: AuxState, funcs: SurfaceFuncs) -> float:
    """Direct ``<a', b', B'> . grad F`` at an arbitrary point (not only on the surface)."""
    from .dynamics import rhs_aux

    vel = np.asarray(rhs_aux(state, funcs.kind, funcs.params.s))
    return float(vel @ surface_gradient(state, funcs))


def discriminant(x, funcs: SurfaceFuncs, kind: Envelope | str | None = None):
    """``D = c1^2 - 4 c2 c0`` of the flux quadratic."""
    c2, c1, c0 = flux_coefficients(x, funcs, kind)
    out = c1 * c1 - 4.0 * c2 * c0
    return out if np.ndim(out) else float(out)


def root_Rstar(x: float, funcs: SurfaceFuncs, kind: Envelope | str | None = None) -> float | None:
    """Larger root of the flux quadratic, or ``None`` when it has no real root.

    With no real root the quadratic is positive for every ``a``.

    Raises
    ------
    DegenerateLeading
        If ``m(x)^2 - 2 B^s`` is not positive (up to a relative ``1e-12``),
        so the quadratic does not open upward.
    """
    c2, c1, c0 = (float(v) for v in flux_coefficients(x, funcs, kind))
    kind = funcs.kind if kind is None else Envelope.parse(kind)
    # a rounding-level leading coefficient counts as zero
    if not c2 > DEFAULT_SLACK * float(_clock_power(x, kind, funcs.params.s)):
        raise DegenerateLeading(f"leading coefficient m^2/2 - B^s = {c2:.6g} at x={x}")
    D = c1 * c1 - 4.0 * c2 * c0
    if D < 0.0:
        return None
    return (-c1 + math.sqrt(D)) / (2.0 * c2)


def rest_point_astar(x, kind: Envelope | str = Envelope.POLYNOMIAL, s: float = 1.0):
    """Root ``a^*`` of ``-B^s a^2 - a + 1`` on the plane ``b = 0``.

    Written as ``2 / (1 + sqrt(1 + 4 B^s))`` to avoid cancellation for large ``B``.
    """
    c = _clock_power(x, kind, s)
    out = 2.0 / (1.0 + np.sqrt(1.0 + 4.0 * c))
    return out if np.ndim(out) else float(out)


def default_x_grid(num: int = 10_000, x_max: float = 1e3, x_min: float = 1e-8) -> np.ndarray:
    """Log-spaced grid on ``(0, x_max]`` with the endpoint ``0`` prepended."""
    return np.concatenate([[0.0], np.geomspace(x_min, x_max, num)])


@dataclass(frozen=True)
class LemmaReport:
    lemma: str
    passed: bool
    worst_margin: float
    worst_x: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "pass": self.passed,
            "worst_margin": self.worst_margin,
            "worst_x": self.worst_x,
            "n_points": self.n_points,
        }


def _report(name: str, lhs, rhs, x) -> LemmaReport:
    lhs = np.asarray(lhs, float)
    rhs = np.asarray(rhs, float)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    with np.errstate(invalid="ignore", divide="ignore"):
        margin = np.where(scale > 0, (lhs - rhs) / scale, 0.0)
    margin = np.where(np.isfinite(margin), margin, -np.inf)
    k = int(np.argmin(margin))
    worst = float(margin[k])
    return LemmaReport(name, bool(worst > 0.0), worst, float(x[k]), int(len(x)))


def lemma_sides(lemma_id: str, params: ThresholdParams, x):
    """Both sides ``(lhs, rhs)`` of the concluding inequality ``lhs > rhs``."""
    funcs = SurfaceFuncs(params)
    x = np.asarray(x, float)
    m, n, dm, dn = funcs.m(x), funcs.n(x), funcs.dm(x), funcs.dn(x)
    B = x + 1.0
    if lemma_id == "4.1":
        lhs = (1.0 + dn) * m * m
        rhs = (1.0 + dm) * m * n + np.power(B, params.s) * n * n
    elif lemma_id == "4.2":
        lhs = rest_point_astar(x, Envelope.POLYNOMIAL, params.s)
        rhs = n / m
    elif lemma_id == "5.1":
        # D < 0 rearranged as -(m^2 - 2B)(n^2 - 2B n' - 2) > (1 + B m')^2
        lhs = -(m * m - 2.0 * B) * (n * n - 2.0 * B * dn - 2.0)
        rhs = (1.0 + B * dm) ** 2
    elif lemma_id == "5.2":
        lhs = rest_point_astar(x, Envelope.EXPONENTIAL)
        rhs = n / m
    else:
        raise ValueError(f"unknown lemma id {lemma_id!r}; expected one of {LEMMA_IDS}")
    return lhs, rhs


def verify_lemma(lemma_id: str, params: ThresholdParams, x_grid=None) -> LemmaReport:
    """Evaluate a lemma's concluding inequality at every grid point.

    Passing requires a strictly positive relative margin at every point.
    Failure is reported, never raised.
    """
    x = default_x_grid() if x_grid is None else np.asarray(x_grid, float)
    lhs, rhs = lemma_sides(str(lemma_id), params, x)
    return _report(str(lemma_id), lhs, rhs, x)


def leading_margin(params: ThresholdParams, x_grid=None) -> LemmaReport:
    """Check ``m(x)^2 > 2 B^s`` (``2 B`` for the exponential law) on the grid."""
    x = default_x_grid() if x_grid is None else np.asarray(x_grid, float)
    funcs = SurfaceFuncs(params)
    m = funcs.m(x)
    return _report("leading", m * m, 2.0 * _clock_power(x, params.envelope, params.s), x)


def flux_positivity(params: ThresholdParams, x_grid=None) -> LemmaReport:
    """Check the flux quadratic is positive for every ``a >= n(x)/m(x)``.

    The quadratic opens upward, so it suffices to test the intercept and,
    when it lies to the right of the intercept, the vertex.
    """
    x = default_x_grid() if x_grid is None else np.asarray(x_grid, float)
    funcs = SurfaceFuncs(params)
    c2, c1, c0 = flux_coefficients(x, funcs)
    a0 = funcs.intercept(x)
    vertex = -c1 / (2.0 * c2)
    a = np.where((c2 > 0) & (vertex > a0), vertex, a0)
    value = (c2 * a + c1) * a + c0
    # relative to the size of the individual terms
    scale = np.abs(c2 * a * a) + np.abs(c1 * a) + np.abs(c0)
    margin = np.where(c2 > 0, value / scale, -np.inf)
    k = int(np.argmin(margin))
    worst = float(margin[k])
    return LemmaReport("flux", bool(worst > 0.0), worst, float(x[k]), int(len(x)))


def intercept_below_rest_point(params: ThresholdParams) -> bool:
    """``n*/m* < a^*(0)``; a single-point consequence of the rest-point lemmas."""
    return relative_margin(rest_point_astar(0.0, params.envelope, params.s),
                           params.n_star / params.m_star) > 0.0
