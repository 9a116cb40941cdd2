"""Threshold line ``d = m* rho - n*``, membership tests and a constant search."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_types import (
    SQRT2,
    SQRT3,
    Envelope,
    ThresholdParams,
    exponential_n2_bound,
    make_threshold_params,
    polynomial_m2_bound,
)
from .errors import SearchFailed, ValidationError

#: relative headroom kept above every open lower bound during the search
SEARCH_HEADROOM = 1e-3
#: factor applied to the explicit dependent bound (m2, resp. n2)
DEPENDENT_FACTOR = 1.0 + 1e-2
#: exponential-law search keeps ``N`` in ``(-EXP_N_RANGE, 0)``
EXP_N_RANGE = 2.0


@dataclass(frozen=True)
class ThresholdRegion:
    """The open set ``{rho > 0, d > 0, d > m* rho - n*}``."""

    m_star: float
    n_star: float
    params: ThresholdParams | None = None

    @classmethod
    def from_params(cls, params: ThresholdParams) -> "ThresholdRegion":
        return cls(params.m_star, params.n_star, params)

    @property
    def rho_intercept(self) -> float:
        return self.n_star / self.m_star

    def line(self, rho):
        return self.m_star * np.asarray(rho, float) - self.n_star


def membership(region: ThresholdRegion, rho0: float, d0: float) -> bool:
    """True iff ``rho0 > 0``, ``d0 > 0`` and ``d0 > m* rho0 - n*``."""
    return bool(rho0 > 0.0 and d0 > 0.0 and d0 > region.m_star * rho0 - region.n_star)


@dataclass(frozen=True)
class RegionBoundary:
    rho: np.ndarray
    d: np.ndarray
    note: str = ""

    @property
    def empty(self) -> bool:
        return self.rho.size == 0

    def points(self) -> list[tuple[float, float]]:
        return [(float(r), float(v)) for r, v in zip(self.rho, self.d)]


def region_boundary(region: ThresholdRegion, rho_max: float, num_points: int = 100) -> RegionBoundary:
    """Sample the threshold line on ``[n*/m*, rho_max]`` where it lies in ``d >= 0``."""
    if not rho_max > 0:
        raise ValueError("rho_max must be positive")
    if num_points < 2:
        raise ValueError("num_points must be >= 2")
    r0 = region.rho_intercept
    if r0 > rho_max:
        empty = np.empty(0)
        return RegionBoundary(empty, empty, "region starts beyond rho_max")
    rho = np.linspace(max(r0, 0.0), rho_max, num_points)
    d = np.maximum(region.line(rho), 0.0)
    return RegionBoundary(rho, d)


def _sigmoid(u: float) -> float:
    return 1.0 / (1.0 + math.exp(-u)) if u >= 0 else math.exp(u) / (1.0 + math.exp(u))


def _above(bound: float, u: float) -> float:
    # values strictly above ``bound`` with relative headroom
    return bound * (1.0 + SEARCH_HEADROOM + math.exp(u))


def _decode_poly(u: np.ndarray, s: float) -> dict:
    m1 = _above(SQRT2, u[0])
    n1 = _above(1.0 + SQRT3, u[1])
    n2 = _above(1.0, u[2])
    N = SEARCH_HEADROOM + (1.0 - 2.0 * SEARCH_HEADROOM) * _sigmoid(u[3])
    M = _above(N + s, u[4])
    m2 = polynomial_m2_bound(m1, n1, n2, M, N, s) * DEPENDENT_FACTOR
    return dict(m1=m1, m2=m2, n1=n1, n2=n2, M=M, N=N, s=s)


def _decode_exp(u: np.ndarray) -> dict:
    m1 = _above(SQRT2, u[0])
    n1 = math.exp(u[1])
    N = -(SEARCH_HEADROOM + (EXP_N_RANGE - 2.0 * SEARCH_HEADROOM) * _sigmoid(u[2]))
    M = _above(SQRT2, u[3])
    n2 = exponential_n2_bound(m1, n1, M, N) * DEPENDENT_FACTOR
    m2 = n2 * DEPENDENT_FACTOR
    return dict(m1=m1, m2=m2, n1=n1, n2=n2, M=M, N=N, s=1.0)


def _log_m_star(v: dict) -> float:
    return math.log(v["m1"]) + v["M"] * math.log(v["m2"])


@dataclass
class SearchResult:
    params: ThresholdParams
    m_star: float
    evaluations: int
    trajectory: list

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "m_star": self.m_star,
            "n_star": self.params.n_star,
            "evaluations": self.evaluations,
        }


def find_feasible_params(
    envelope: Envelope | str = Envelope.POLYNOMIAL,
    s: float = 1.0,
    budget: int = 10_000,
    seed: int = 0,
    starts: int = 4,
    return_result: bool = False,
):
    """Seeded coordinate descent for valid constants with small ``m*``.

    The dependent bound (``m2`` for the polynomial law, ``n2`` and then
    ``m2`` for the exponential one) is set just above its explicit lower
    bound, which removes one search dimension. Every other constant is
    parametrized so that it stays above its open bound with relative
    headroom ``SEARCH_HEADROOM``.

    Parameters
    ----------
    envelope : {'poly', 'exp'}
    s : float
        Polynomial exponent, ``s >= 1``; ignored for ``'exp'``.
    budget : int
        Maximum number of objective evaluations across all starts.
    seed : int
        Seed for the start points and the coordinate order.

    Raises
    ------
    SearchFailed
        If no candidate validates within the budget.
    """
    envelope = Envelope.parse(envelope)
    if envelope is Envelope.POLYNOMIAL and s < 1.0:
        raise ValueError("s must be >= 1 for the polynomial envelope")
    if envelope is Envelope.EXPONENTIAL:
        s = 1.0
    rng = np.random.default_rng(seed)
    dim = 5 if envelope is Envelope.POLYNOMIAL else 4
    decode = (lambda u: _decode_poly(u, s)) if envelope is Envelope.POLYNOMIAL else _decode_exp

    evals = 0

    def objective(u):
        nonlocal evals
        evals += 1
        try:
            v = decode(u)
        except (OverflowError, ValueError, ZeroDivisionError):
            return math.inf, None
        if not all(math.isfinite(x) for x in v.values()):
            return math.inf, None
        try:
            p = make_threshold_params(envelope=envelope, slack=SEARCH_HEADROOM / 2, **v)
        except ValidationError:
            return math.inf, None
        return _log_m_star(v), p

    best_val, best_p, best_traj = math.inf, None, []
    per_start = max(budget // max(starts, 1), dim * 4)
    for k in range(max(starts, 1)):
        if evals >= budget:
            break
        # first start from the origin of the search coordinates
        u = np.zeros(dim) if k == 0 else rng.normal(0.0, 1.0, size=dim)
        val, p = objective(u)
        traj = [(evals, val)]
        step = 1.0
        limit = min(budget, evals + per_start)
        while step > 1e-9 and evals < limit:
            improved = False
            for i in rng.permutation(dim):
                for sign in (+1.0, -1.0):
                    if evals >= limit:
                        break
                    trial = u.copy()
                    trial[i] += sign * step
                    tv, tp = objective(trial)
                    if tv < val:
                        u, val, p = trial, tv, tp
                        traj.append((evals, val))
                        improved = True
                        break
            if not improved:
                step *= 0.5
        if p is not None and val < best_val:
            best_val, best_p, best_traj = val, p, traj
    if best_p is None:
        raise SearchFailed(f"no feasible {envelope.value} constants within {budget} evaluations")
    if return_result:
        return SearchResult(best_p, best_p.m_star, evals, best_traj)
    return best_p
