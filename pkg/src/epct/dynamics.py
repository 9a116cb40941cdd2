"""Right-hand sides, coefficient trajectories and the numerical experiments.

Systems
-------
reduced
    ``rho' = -rho d``, ``d' = -d^2/2 + A(t) rho^2 - (rho - 1)``.
auxiliary (3x3, autonomous in ``(a, b, B)``)
    ``a' = -b a``, ``b' = -b^2/2 - B^s a^2 - a + 1`` with ``B' = 1``
    (polynomial law) or ``b' = -b^2/2 - B a^2 - a + 1`` with ``B' = B``
    (exponential law).
Lagrangian
    the five scalars ``(d, omega, eta, xi, rho)`` along a characteristic of
    the full Euler-Poisson flow with prescribed nonlocal forcings.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core_types import AuxState, Envelope, EnvelopeSpec, GradientDecomposition, PhaseState
from .errors import EnvelopeViolation, PositivityLost, PreconditionError
from .ode import OdeResult, Status, integrate
from .thresholds import ThresholdRegion, membership

#: gap tolerance for the comparison ordering
ORDERING_TOL = 1e-9


class CoefficientTrajectory:
    """A prescribed nonlocal coefficient ``A(t)`` with its admissible envelope.

    Every evaluation is checked against ``envelope``; leaving the band
    raises :class:`EnvelopeViolation`.
    """

    def __init__(self, func: Callable[[float], float], envelope: EnvelopeSpec, check: bool = True):
        self.func = func
        self.envelope = envelope
        self.check = check

    def __call__(self, t: float) -> float:
        value = float(self.func(t))
        if self.check and not self.envelope.contains(value, t):
            raise EnvelopeViolation(
                f"A({t:.6g}) = {value:.6g} outside [{self.envelope.lower(t):.6g}, {self.envelope.upper:.6g}]"
            )
        return value

    @classmethod
    def constant(cls, value: float, envelope: EnvelopeSpec) -> "CoefficientTrajectory":
        return cls(_Constant(value), envelope)

    @classmethod
    def upper_bound(cls, envelope: EnvelopeSpec) -> "CoefficientTrajectory":
        return cls(_Constant(envelope.upper), envelope)

    @classmethod
    def lower_bound(cls, envelope: EnvelopeSpec) -> "CoefficientTrajectory":
        return cls(_Lower(envelope), envelope)


@dataclass(frozen=True)
class _Constant:
    value: float

    def __call__(self, t):
        return self.value


@dataclass(frozen=True)
class _Lower:
    envelope: EnvelopeSpec

    def __call__(self, t):
        return self.envelope.lower(t)


@dataclass(frozen=True)
class _Blend:
    """``lower(t) + u(t) (upper - lower(t))`` with a smooth ``u`` valued in (0, 1)."""

    envelope: EnvelopeSpec
    amps: tuple
    freqs: tuple
    phases: tuple
    bias: float

    def weight(self, t: float) -> float:
        z = self.bias + sum(a * math.sin(w * t + p) for a, w, p in zip(self.amps, self.freqs, self.phases))
        return 0.5 * (1.0 + math.tanh(z))

    def __call__(self, t):
        lo = self.envelope.lower(t)
        return lo + self.weight(t) * (self.envelope.upper - lo)


@dataclass(frozen=True)
class AdmissibleFamily:
    """Seeded random coefficients that respect the envelope by construction.

    Member ``i`` is ``A(t) = lower(t) + u(t) (upper - lower(t))`` where
    ``u = (1 + tanh(z))/2`` and ``z`` is a random trigonometric sum.
    """

    envelope: EnvelopeSpec
    seed: int = 0
    modes: int = 4
    max_freq: float = 2.0

    def member(self, index: int) -> CoefficientTrajectory:
        rng = np.random.default_rng([self.seed, index])
        amps = tuple(float(v) for v in rng.normal(0.0, 1.0, self.modes))
        freqs = tuple(float(v) for v in rng.uniform(0.05, self.max_freq, self.modes))
        phases = tuple(float(v) for v in rng.uniform(0.0, 2 * math.pi, self.modes))
        bias = float(rng.normal(0.0, 1.0))
        return CoefficientTrajectory(_Blend(self.envelope, amps, freqs, phases, bias), self.envelope)


def _coef(A, t):
    return A(t) if callable(A) else float(A)


def rhs_reduced(state: PhaseState, A) -> tuple[float, float]:
    """``(rho', d')`` of the reduced system; ``A`` is a trajectory or a number."""
    a_t = _coef(A, state.t)
    rho, d = state.rho, state.d
    return (-rho * d, -0.5 * d * d + a_t * rho * rho - (rho - 1.0))


def rhs_aux(state: AuxState, kind: Envelope | str = Envelope.POLYNOMIAL, s: float = 1.0):
    """``(a', b', B')`` of the auxiliary system."""
    a, b, B = state.a, state.b, state.B
    if Envelope.parse(kind) is Envelope.POLYNOMIAL:
        return (-b * a, -0.5 * b * b - B**s * a * a - a + 1.0, 1.0)
    return (-b * a, -0.5 * b * b - B * a * a - a + 1.0, B)


def rhs_lagrangian(
    g: GradientDecomposition,
    rho: float,
    f1: float = 0.0,
    f2: float = 0.0,
    k: float = -1.0,
    c_b: float = 1.0,
) -> tuple[float, float, float, float, float]:
    """Material derivatives ``(d', omega', eta', xi', rho')`` along a characteristic.

    ``f1``, ``f2`` are the nonlocal forcings evaluated at the current time.
    """
    d, w, eta, xi = g.d, g.omega, g.eta, g.xi
    dd = -0.5 * d * d - 0.5 * eta * eta + 0.5 * w * w - 0.5 * xi * xi + k * (rho - c_b)
    return (dd, -w * d, -eta * d + f1, -xi * d + f2, -rho * d)


# vector fields for the integrator ------------------------------------------


def reduced_field(A):
    def f(t, y):
        rho, d = y
        a_t = _coef(A, t)
        return np.array([-rho * d, -0.5 * d * d + a_t * rho * rho - (rho - 1.0)])

    return f


def aux_field(kind: Envelope | str = Envelope.POLYNOMIAL, s: float = 1.0):
    poly = Envelope.parse(kind) is Envelope.POLYNOMIAL

    def f(t, y):
        a, b, B = y
        Bs = B**s if poly else B
        return np.array([-b * a, -0.5 * b * b - Bs * a * a - a + 1.0, 1.0 if poly else B])

    return f


def lagrangian_field(f1: Callable[[float], float], f2: Callable[[float], float], k=-1.0, c_b=1.0):
    def f(t, y):
        g = GradientDecomposition(y[0], y[1], y[2], y[3])
        return np.array(rhs_lagrangian(g, y[4], f1(t), f2(t), k, c_b))

    return f


def _positivity_guard(index: int, label: str):
    def guard(t, y):
        if not y[index] > 0.0:
            raise PositivityLost(f"{label} = {y[index]:.6g} at t = {t:.6g}")

    return guard


def simulate_reduced(rho0, d0, A, t_end, tol=1e-9, t_eval=None) -> OdeResult:
    """Integrate the reduced ``(rho, d)`` system; blow-up is watched on ``d``."""
    if not rho0 > 0:
        raise PreconditionError("rho0 must be positive")
    return integrate(
        reduced_field(A), [rho0, d0], t_end, tol,
        t_eval=t_eval, blowup_index=[1], on_step=_positivity_guard(0, "rho"),
    )


def simulate_aux(a0, b0, kind=Envelope.POLYNOMIAL, s=1.0, t_end=50.0, tol=1e-9, t_eval=None) -> OdeResult:
    """Integrate the auxiliary system from ``(a0, b0, B0 = 1)``; blow-up watched on ``b``."""
    if not a0 > 0:
        raise PreconditionError("a0 must be positive")
    return integrate(
        aux_field(kind, s), [a0, b0, 1.0], t_end, tol,
        t_eval=t_eval, blowup_index=[1], on_step=_positivity_guard(0, "a"),
    )


def simulate_lagrangian(g0: GradientDecomposition, rho0, f1, f2, t_end, tol=1e-9, k=-1.0, c_b=1.0, t_eval=None):
    y0 = [g0.d, g0.omega, g0.eta, g0.xi, rho0]
    return integrate(
        lagrangian_field(f1, f2, k, c_b), y0, t_end, tol,
        t_eval=t_eval, blowup_index=[0], on_step=_positivity_guard(4, "rho"),
    )


# comparison principle ---------------------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    ordering_held: bool
    min_gap_d_minus_b: float
    min_gap_a_minus_rho: float
    status: Status
    t_stop: float

    def to_dict(self) -> dict:
        return {
            "ordering_held": self.ordering_held,
            "min_gap_d_minus_b": self.min_gap_d_minus_b,
            "min_gap_a_minus_rho": self.min_gap_a_minus_rho,
            "status": self.status.value,
            "t_stop": self.t_stop,
        }


def comparison_field(A: CoefficientTrajectory):
    env = A.envelope
    poly = env.kind is Envelope.POLYNOMIAL
    s = env.s

    def f(t, y):
        rho, d, a, b, B = y
        a_t = A(t)
        Bs = B**s if poly else B
        return np.array(
            [
                -rho * d,
                -0.5 * d * d + a_t * rho * rho - (rho - 1.0),
                -b * a,
                -0.5 * b * b - Bs * a * a - a + 1.0,
                1.0 if poly else B,
            ]
        )

    return f


def run_comparison(rho0, d0, a0, b0, A: CoefficientTrajectory, t_end=20.0, tol=1e-9) -> ComparisonReport:
    """Integrate the reduced and auxiliary systems jointly and check their ordering.

    Both systems share one step controller, so gaps are compared at
    identical times. The ordering holds if ``d - b`` and ``a - rho`` stay
    above ``-1e-9`` at every accepted step.

    Raises
    ------
    PreconditionError
        Unless ``b0 < d0`` and ``0 < rho0 < a0``.
    """
    if not (b0 < d0 and 0.0 < rho0 < a0):
        raise PreconditionError("need b0 < d0 and 0 < rho0 < a0")
    res = integrate(comparison_field(A), [rho0, d0, a0, b0, 1.0], t_end, tol, blowup_index=[1, 3])
    Y = res.step_states
    gap_db = float(np.min(Y[:, 1] - Y[:, 3]))
    gap_ar = float(np.min(Y[:, 2] - Y[:, 0]))
    held = gap_db > -ORDERING_TOL and gap_ar > -ORDERING_TOL
    return ComparisonReport(held, gap_db, gap_ar, res.status, res.t_stop)


def upper_bound_d(rho_M: float, d0: float, w: float) -> float:
    """Upper bound ``max(d0, sqrt(2 max(1, w rho_M^2 - rho_M + 1)))`` on the divergence.

    ``w = (omega0/rho0)^2 / 2`` is the upper bound of ``A`` and ``rho_M``
    a bound on the density along the characteristic.
    """
    if not rho_M > 0:
        raise ValueError("rho_M must be positive")
    return max(d0, math.sqrt(2.0 * max(1.0, w * rho_M * rho_M - rho_M + 1.0)))


# invariant region trials --------------------------------------------------


def sample_region(params, rng: np.random.Generator, size: int, a_factor=2.0, b_span=5.0):
    """Random ``(a0, b0)`` strictly inside ``{a > 0, b > 0, b > m* a - n*}``."""
    m_s, n_s = params.m_star, params.n_star
    a = rng.uniform(0.0, a_factor * n_s / m_s, size)
    a = np.where(a > 0, a, 0.5 * n_s / m_s)
    lo = np.maximum(0.0, m_s * a - n_s)
    b = lo + rng.uniform(1e-3, 1.0, size) * b_span
    return a, b


@dataclass(frozen=True)
class InvariantTrial:
    a0: float
    b0: float
    status: Status
    b_min: float
    a_max_ratio: float

    @property
    def held(self) -> bool:
        return self.status is Status.REACHED_T and self.b_min > 0.0 and self.a_max_ratio <= 1.0 + 1e-9


def invariant_trial(a0, b0, kind, s=1.0, t_end=50.0, tol=1e-9) -> InvariantTrial:
    """Integrate one auxiliary trajectory and summarize the invariant-region checks."""
    res = simulate_aux(a0, b0, kind, s, t_end, tol)
    Y = res.step_states
    return InvariantTrial(a0, b0, res.status, float(Y[:, 1].min()), float(Y[:, 0].max() / a0))


# sweeps -------------------------------------------------------------------------


class Outcome(str, enum.Enum):
    GLOBAL = "Global"
    BLOW_UP = "BlowUp"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class SweepRow:
    index: int
    rho0: float
    d0: float
    member: bool | None
    status: Outcome
    t_end_or_blow: float
    d_max: float
    d_bound: float

    def bound_held(self, rel_tol: float = 1e-8) -> bool:
        """``max d(t) <= upper_bound_d`` up to a relative integration allowance."""
        return self.d_max <= self.d_bound * (1.0 + rel_tol)


@dataclass(frozen=True)
class _SweepTask:
    region: ThresholdRegion | None
    family: AdmissibleFamily
    t_end: float
    tol: float


def _classify_point(task: _SweepTask, index: int, rho0: float, d0: float) -> SweepRow:
    A = task.family.member(index)
    res = simulate_reduced(rho0, d0, A, task.t_end, task.tol)
    Y = res.step_states
    if res.status is Status.REACHED_T:
        outcome = Outcome.GLOBAL
    elif res.status is Status.BLOW_UP:
        outcome = Outcome.BLOW_UP
    else:
        outcome = Outcome.UNDECIDED
    rho_M = float(Y[:, 0].max())
    bound = upper_bound_d(rho_M, d0, task.family.envelope.upper)
    member = None if task.region is None else membership(task.region, rho0, d0)
    return SweepRow(index, float(rho0), float(d0), member, outcome, res.t_stop, float(Y[:, 1].max()), bound)


def _classify_star(args):
    return _classify_point(*args)


def default_jobs() -> int:
    """Worker count from ``EPCT_JOBS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("EPCT_JOBS", "1")))
    except ValueError:
        return 1


def sweep_classify(
    region: ThresholdRegion | None,
    rho_values: Sequence[float],
    d_values: Sequence[float],
    family: AdmissibleFamily,
    t_end: float = 50.0,
    tol: float = 1e-9,
    jobs: int | None = None,
) -> list[SweepRow]:
    """Classify every ``(rho0, d0)`` of the tensor grid as global, blow-up or undecided.

    Point ``i`` (row-major over ``rho_values x d_values``) uses
    ``family.member(i)`` as its coefficient, so results do not depend on
    the worker count. Rows are returned in grid order.
    """
    task = _SweepTask(region, family, float(t_end), float(tol))
    pts = [(task, i, float(r), float(d))
           for i, (r, d) in enumerate((r, d) for r in rho_values for d in d_values)]
    if not pts:
        return []
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1:
        return [_classify_point(*p) for p in pts]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_classify_star, pts, chunksize=max(1, len(pts) // (4 * jobs))))
