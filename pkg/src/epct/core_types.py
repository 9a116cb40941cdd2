"""Domain types for the two-dimensional Euler-Poisson threshold laboratory.

All types are frozen dataclasses and may be shared freely between workers.
Real powers ``x**p`` below are only ever taken with ``x > 0`` (shifted
arguments ``x + m2``, ``x + n2``, ``t + 1`` with ``x, t >= 0``, or validated
positive constants), so no branch cuts arise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT5 = math.sqrt(5.0)
GOLDEN = (1.0 + SQRT5) / 2.0

#: relative slack applied to every strict inequality
DEFAULT_SLACK = 1e-12


class Envelope(str, enum.Enum):
    """Lower-bound law assumed for the nonlocal coefficient A(t)."""

    POLYNOMIAL = "poly"
    EXPONENTIAL = "exp"

    @classmethod
    def parse(cls, value) -> "Envelope":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "poly": cls.POLYNOMIAL,
            "polynomial": cls.POLYNOMIAL,
            "exp": cls.EXPONENTIAL,
            "exponential": cls.EXPONENTIAL,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown envelope kind {value!r}") from None


def relative_margin(lhs: float, rhs: float) -> float:
    """Relative gap of the strict inequality ``lhs > rhs``.

    Positive iff the inequality holds; scaled by the larger magnitude so
    thresholds are scale free.
    """
    if math.isinf(rhs) and rhs > 0:
        return -math.inf
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return (lhs - rhs) / scale


@dataclass(frozen=True)
class Violation:
    """One violated strict inequality ``lhs > rhs``."""

    name: str
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return relative_margin(self.lhs, self.rhs)

    def __str__(self) -> str:
        return f"{self.name} (lhs={self.lhs:.6g}, rhs={self.rhs:.6g})"


@dataclass(frozen=True)
class Condition:
    """A named strict inequality together with its evaluated sides."""

    name: str
    lhs: float
    rhs: float
    strict: bool = True

    @property
    def margin(self) -> float:
        return relative_margin(self.lhs, self.rhs)

    def holds(self, slack: float = DEFAULT_SLACK) -> bool:
        if not np.isfinite(self.lhs):
            return False
        if not self.strict:
            return self.lhs >= self.rhs
        return self.margin > slack


def _pow(base: float, exponent: float) -> float:
    # base > 0 by construction; exp/log keeps non-integer exponents real
    if base <= 0.0:
        return math.nan
    try:
        return math.exp(exponent * math.log(base))
    except OverflowError:
        return math.inf


def polynomial_m2_bound(m1: float, n1: float, n2: float, M: float, N: float, s: float) -> float:
    """Smallest admissible ``m2`` (exclusive) for the polynomial envelope."""
    terms = [n2]
    if N < 1.0:
        c = (m1 * n1 + M * m1 * m1 * n1 + n1 * n1) / (m1 * m1)
        terms.append(_pow(c, 1.0 / (1.0 - N)))
    else:
        terms.append(math.inf)
    if M - N - s > 0.0:
        terms.append(_pow(n1 / (2.0 * m1) * (1.0 + SQRT5), 1.0 / (M - N - s)))
    else:
        terms.append(math.inf)
    return max(terms)


def exponential_n2_bound(m1: float, n1: float, M: float, N: float) -> float:
    """Smallest admissible ``n2`` (exclusive) for the exponential envelope."""
    if M - N - 1.0 <= 0.0:
        return math.inf
    return max(1.0, _pow(n1 / (2.0 * m1) * (1.0 + SQRT5), 1.0 / (M - N - 1.0)))


def threshold_conditions(
    m1: float,
    m2: float,
    n1: float,
    n2: float,
    M: float,
    N: float,
    s: float,
    envelope: Envelope,
) -> list[Condition]:
    """List every strict inequality the constants must satisfy."""
    envelope = Envelope.parse(envelope)
    if envelope is Envelope.POLYNOMIAL:
        conds = [
            Condition("s >= 1", s, 1.0, strict=False),
            Condition("N > 0", N, 0.0),
            Condition("1 > N", 1.0, N),
            Condition("M > N + s", M, N + s),
            Condition("n1 > 1 + sqrt(3)", n1, 1.0 + SQRT3),
            Condition("n2 > 1", n2, 1.0),
            Condition("m1 > sqrt(2)", m1, SQRT2),
            Condition("m2 > n2", m2, n2),
        ]
        if m1 > 0 and N < 1.0:
            c = (m1 * n1 + M * m1 * m1 * n1 + n1 * n1) / (m1 * m1)
            rhs = _pow(c, 1.0 / (1.0 - N))
        else:
            rhs = math.inf
        conds.append(Condition("m2 > ((m1 n1 + M m1^2 n1 + n1^2)/m1^2)^(1/(1-N))", m2, rhs))
        if m1 > 0 and M - N - s > 0:
            rhs = _pow(n1 / (2.0 * m1) * (1.0 + SQRT5), 1.0 / (M - N - s))
        else:
            rhs = math.inf
        conds.append(Condition("m2 > ((n1/(2 m1))(1+sqrt(5)))^(1/(M-N-s))", m2, rhs))
    else:
        conds = [
            Condition("0 > N", 0.0, N),
            Condition("M > m2 sqrt(2)", M, m2 * SQRT2),
            Condition("m1 > sqrt(2)", m1, SQRT2),
            Condition("m2 > n2", m2, n2),
            Condition("n1 > 0", n1, 0.0),
            Condition("n2 > 1", n2, 1.0),
            Condition("M > N + 1", M, N + 1.0),
        ]
        if m1 > 0 and n1 > 0 and M - N - 1.0 > 0:
            rhs = _pow(n1 / (2.0 * m1) * (1.0 + SQRT5), 1.0 / (M - N - 1.0))
        else:
            rhs = math.inf
        conds.append(Condition("n2 > ((n1/(2 m1))(1+sqrt(5)))^(1/(M-N-1))", n2, rhs))
    return conds


@dataclass(frozen=True)
class ThresholdParams:
    """Validated constants defining ``m(x) = m1 (x+m2)^M`` and ``n(x) = n1 (x+n2)^N``.

    Construct through :func:`make_threshold_params`; direct construction
    skips validation. ``s`` is ignored (and stored as 1) for the
    exponential envelope.
    """

    m1: float
    m2: float
    n1: float
    n2: float
    M: float
    N: float
    s: float
    envelope: Envelope

    @property
    def m_star(self) -> float:
        return self.m1 * _pow(self.m2, self.M)

    @property
    def n_star(self) -> float:
        return self.n1 * _pow(self.n2, self.N)

    def conditions(self) -> list[Condition]:
        return threshold_conditions(
            self.m1, self.m2, self.n1, self.n2, self.M, self.N, self.s, self.envelope
        )

    def min_margin(self) -> float:
        """Smallest relative gap over the strict conditions."""
        return min(c.margin for c in self.conditions() if c.strict)

    def to_dict(self) -> dict:
        return {
            "m1": self.m1,
            "m2": self.m2,
            "n1": self.n1,
            "n2": self.n2,
            "M": self.M,
            "N": self.N,
            "s": self.s,
            "envelope": self.envelope.value,
        }

    @classmethod
    def from_dict(cls, data: dict, slack: float = DEFAULT_SLACK) -> "ThresholdParams":
        return make_threshold_params(
            data["m1"],
            data["m2"],
            data["n1"],
            data["n2"],
            data["M"],
            data["N"],
            data.get("s", 1.0),
            data.get("envelope", "poly"),
            slack=slack,
        )


def make_threshold_params(
    m1: float,
    m2: float,
    n1: float,
    n2: float,
    M: float,
    N: float,
    s: float = 1.0,
    envelope: Envelope | str = Envelope.POLYNOMIAL,
    slack: float = DEFAULT_SLACK,
) -> ThresholdParams:
    """Validate raw constants and return :class:`ThresholdParams`.

    Raises
    ------
    ValidationError
        Listing every violated inequality with both sides' values.
    ValueError
        If any raw value is not finite.
    """
    envelope = Envelope.parse(envelope)
    raw = dict(m1=m1, m2=m2, n1=n1, n2=n2, M=M, N=N, s=s)
    bad = [k for k, v in raw.items() if not math.isfinite(float(v))]
    if bad:
        raise ValueError(f"non-finite constants: {', '.join(bad)}")
    vals = {k: float(v) for k, v in raw.items()}
    if envelope is Envelope.EXPONENTIAL:
        vals["s"] = 1.0
    conds = threshold_conditions(envelope=envelope, **vals)
    violations = [Violation(c.name, c.lhs, c.rhs) for c in conds if not c.holds(slack)]
    if violations:
        raise ValidationError(violations)
    return ThresholdParams(envelope=envelope, **vals)


@dataclass(frozen=True)
class PhaseState:
    """Density and divergence along one characteristic of the reduced system."""

    rho: float
    d: float
    t: float = 0.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive (non-vacuum)")
        if self.t < 0:
            raise ValueError("t must be nonnegative")

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.d])


@dataclass(frozen=True)
class AuxState:
    """State ``(a, b, B)`` of the auxiliary 3x3 system; ``B`` carries time."""

    a: float
    b: float
    B: float = 1.0

    def __post_init__(self):
        if self.B < 1.0:
            raise ValueError("B must be >= 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.B])


@dataclass(frozen=True)
class EnvelopeSpec:
    """Admissible band ``lower(t) <= A(t) <= upper`` for the nonlocal coefficient.

    ``upper`` is the squared vorticity bound ``0.5 * (omega0/rho0)**2``.
    """

    kind: Envelope
    s: float = 1.0
    upper: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Envelope.parse(self.kind))
        if self.kind is Envelope.EXPONENTIAL:
            object.__setattr__(self, "s", 1.0)
        if self.upper < self.lower(0.0):
            raise ValueError("upper bound lies below the envelope at t=0")

    @classmethod
    def from_vorticity(cls, kind, omega0: float, rho0: float, s: float = 1.0) -> "EnvelopeSpec":
        return cls(kind, s, 0.5 * (omega0 / rho0) ** 2)

    def lower(self, t):
        if isinstance(t, (float, int)):
            if self.kind is Envelope.POLYNOMIAL:
                return -((t + 1.0) ** self.s)
            return -math.exp(t)
        t = np.asarray(t, dtype=float)
        if self.kind is Envelope.POLYNOMIAL:
            out = -np.power(t + 1.0, self.s)
        else:
            out = -np.exp(t)
        return out if out.ndim else float(out)

    def B(self, t):
        """Auxiliary clock ``B(t)`` with ``B(0) = 1``."""
        t = np.asarray(t, dtype=float)
        out = t + 1.0 if self.kind is Envelope.POLYNOMIAL else np.exp(t)
        return out if out.ndim else float(out)

    def contains(self, A: float, t: float, tol: float = 1e-12) -> bool:
        lo = self.lower(t)
        return lo - tol * max(1.0, abs(lo)) <= A <= self.upper + tol * max(1.0, abs(self.upper))


@dataclass(frozen=True)
class GradientDecomposition:
    """The scalars ``(d, omega, eta, xi)`` of a 2x2 velocity gradient ``M[i, j] = du_i/dx_j``."""

    d: float
    omega: float
    eta: float
    xi: float

    def to_matrix(self) -> np.ndarray:
        return np.array(
            [
                [(self.d + self.eta) / 2.0, (self.xi - self.omega) / 2.0],
                [(self.xi + self.omega) / 2.0, (self.d - self.eta) / 2.0],
            ]
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.d, self.omega, self.eta, self.xi)


def decompose_gradient(M: Sequence[Sequence[float]] | np.ndarray) -> GradientDecomposition:
    """Split a velocity gradient into divergence, vorticity and the two strain scalars.

    >>> decompose_gradient([[1, 2], [3, 4]]).as_tuple()
    (5.0, 1.0, -3.0, 5.0)
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    return GradientDecomposition(
        d=float(M[0, 0] + M[1, 1]),
        omega=float(M[1, 0] - M[0, 1]),
        eta=float(M[0, 0] - M[1, 1]),
        xi=float(M[0, 1] + M[1, 0]),
    )


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class ScalarField2D:
    """Samples of a scalar on a uniform periodic grid ``[0, lx) x [0, ly)``.

    ``values[i, j]`` sits at ``(i * lx / nx, j * ly / ny)``.
    """

    values: np.ndarray
    lx: float = 2.0 * math.pi
    ly: float = 2.0 * math.pi
    nx: int = field(init=False)
    ny: int = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValueError("values must be a 2-D array")
        nx, ny = vals.shape
        if not (_is_pow2(nx) and _is_pow2(ny)):
            raise ValueError(f"grid sizes must be powers of two, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "nx", nx)
        object.__setattr__(self, "ny", ny)

    @classmethod
    def from_function(cls, func, nx: int, ny: int | None = None, lx=2 * math.pi, ly=2 * math.pi):
        ny = nx if ny is None else ny
        x1, x2 = grid_coordinates(nx, ny, lx, ly)
        return cls(np.asarray(func(x1, x2), dtype=float) * np.ones((nx, ny)), lx, ly)

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    def mean(self) -> float:
        return float(self.values.mean())

    def with_values(self, values) -> "ScalarField2D":
        return ScalarField2D(values, self.lx, self.ly)

    def __sub__(self, other):
        if isinstance(other, ScalarField2D):
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __add__(self, other):
        if isinstance(other, ScalarField2D):
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)


def grid_coordinates(nx: int, ny: int, lx: float = 2 * math.pi, ly: float = 2 * math.pi):
    """Meshgrid (``indexing='ij'``) of grid node coordinates."""
    x1 = np.arange(nx) * (lx / nx)
    x2 = np.arange(ny) * (ly / ny)
    return np.meshgrid(x1, x2, indexing="ij")
