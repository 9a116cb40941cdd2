"""Adaptive Dormand-Prince 5(4) integrator with PI step control and dense output.

Written for explosive Riccati dynamics: integration stops cleanly on a
blow-up threshold or when the step size collapses, and reports which one
happened instead of raising.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Butcher tableau (Hairer, Norsett & Wanner, Solving ODEs I, table 5.2)
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    np.zeros(0),
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
A = [np.asarray(row, float) for row in A]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
E = B5 - B4
# continuous extension coefficients (Hairer's contd5)
DENSE = np.array(
    [
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    ]
)

# PI controller constants
SAFETY = 0.9
BETA = 0.04
EXPO = 0.2 - 0.75 * BETA
FAC_MIN = 0.2
FAC_MAX = 10.0

BLOWUP_THRESHOLD = 1e8
COLLAPSE_FACTOR = 1e-12


class Status(str, enum.Enum):
    REACHED_T = "ReachedT"
    BLOW_UP = "BlowUp"
    STEP_COLLAPSE = "StepCollapse"


@dataclass
class OdeResult:
    """Outcome of :func:`integrate`.

    ``times``/``states`` hold either the accepted steps or, when sample
    times were requested, the dense-output samples reached before stopping.
    ``t_stop`` is the last accepted time; for a blow-up it is a lower bound
    on the blow-up time.
    """

    times: np.ndarray
    states: np.ndarray
    status: Status
    t_stop: float
    steps: int = 0
    rejections: int = 0
    step_times: np.ndarray = field(default=None, repr=False)
    step_states: np.ndarray = field(default=None, repr=False)

    @property
    def t_blow(self) -> float | None:
        return self.t_stop if self.status is Status.BLOW_UP else None

    @property
    def ok(self) -> bool:
        return self.status is Status.REACHED_T

    @property
    def y_final(self) -> np.ndarray:
        return self.step_states[-1]


def _dense_eval(theta, y0, y1, h, K):
    # 4th-order continuous extension of the 5th-order solution
    r2 = y1 - y0
    r3 = h * K[0] - r2
    r4 = r2 - h * K[6] - r3
    r5 = h * (DENSE @ K)
    t1 = 1.0 - theta
    return y0 + theta * (r2 + t1 * (r3 + theta * (r4 + t1 * r5)))


def _initial_step(f, t0, y0, f0, direction_len, atol, rtol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_len)
    y1 = y0 + h0 * f0
    f1 = np.asarray(f(t0 + h0, y1), float)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, direction_len)


def integrate(
    rhs: Callable[[float, np.ndarray], Sequence[float]],
    y0: Sequence[float],
    t_end: float,
    tol: float = 1e-9,
    *,
    t0: float = 0.0,
    atol: float | None = None,
    t_eval: Sequence[float] | None = None,
    blowup_index: Sequence[int] | None = None,
    blowup_threshold: float = BLOWUP_THRESHOLD,
    on_step: Callable[[float, np.ndarray], None] | None = None,
    first_step: float | None = None,
    adaptive: bool = True,
    max_steps: int = 1_000_000,
) -> OdeResult:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t_end``.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y) -> dy/dt``.
    tol : float
        Relative tolerance; also the absolute tolerance unless ``atol`` is given.
    t_eval : sequence of float, optional
        Sample times for dense output (sorted, inside ``[t0, t_end]``).
    blowup_index : sequence of int, optional
        Components watched for blow-up; all components by default.
    on_step : callable, optional
        Called as ``on_step(t, y)`` after every accepted step, including
        the initial point. May raise to abort the run.
    first_step : float, optional
        Initial step; with ``adaptive=False`` the constant step size.

    Step collapse is declared when the step falls below
    ``1e-12 * max(1, |t|)``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    rtol = float(tol)
    atol = rtol if atol is None else float(atol)
    y = np.array(y0, dtype=float)
    t = float(t0)
    t_end = float(t_end)
    if t_end < t:
        raise ValueError("t_end must not precede t0")
    watch = np.arange(y.size) if blowup_index is None else np.asarray(blowup_index, int)
    samples_t = None if t_eval is None else np.asarray(t_eval, float)
    out_t: list[float] = []
    out_y: list[np.ndarray] = []
    k_sample = 0
    if samples_t is not None:
        while k_sample < samples_t.size and samples_t[k_sample] <= t:
            out_t.append(float(samples_t[k_sample]))
            out_y.append(y.copy())
            k_sample += 1

    step_t = [t]
    step_y = [y.copy()]
    if on_step is not None:
        on_step(t, y)

    K = np.empty((7, y.size))
    K[0] = np.asarray(rhs(t, y), float)
    span = t_end - t
    if span == 0.0:
        return _finish(samples_t, out_t, out_y, step_t, step_y, Status.REACHED_T, t, 0, 0)
    if first_step is not None:
        h = float(first_step)
    else:
        h = _initial_step(rhs, t, y, K[0], span, atol, rtol)
    err_old = 1e-4
    steps = rejections = 0
    status = Status.REACHED_T

    while t < t_end:
        if steps + rejections >= max_steps:
            status = Status.STEP_COLLAPSE
            break
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        if h < COLLAPSE_FACTOR * max(1.0, abs(t)) and not last:
            status = Status.STEP_COLLAPSE
            break
        for i in range(1, 7):
            yi = y + h * (A[i] @ K[:i])
            K[i] = np.asarray(rhs(t + C[i] * h, yi), float)
        y_new = y + h * (B5 @ K)
        if not adaptive:
            err = 0.0
        else:
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_vec = h * (E @ K) / scale
            err = float(np.sqrt(np.mean(err_vec**2)))
            if not math.isfinite(err) or not np.all(np.isfinite(y_new)):
                err = math.inf

        if err <= 1.0:
            t_new = t_end if last else t + h
            if samples_t is not None:
                while k_sample < samples_t.size and samples_t[k_sample] <= t_new:
                    theta = (samples_t[k_sample] - t) / h if h > 0 else 1.0
                    out_t.append(float(samples_t[k_sample]))
                    out_y.append(_dense_eval(theta, y, y_new, h, K))
                    k_sample += 1
            t, y = t_new, y_new
            K[0] = K[6]
            steps += 1
            step_t.append(t)
            step_y.append(y.copy())
            if on_step is not None:
                on_step(t, y)
            if np.any(np.abs(y[watch]) > blowup_threshold):
                status = Status.BLOW_UP
                break
            if adaptive:
                fac11 = err**EXPO if err > 0 else 0.0
                fac = fac11 / err_old**BETA
                fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFETY))
                h = h / fac
                err_old = max(err, 1e-4)
        else:
            rejections += 1
            if math.isinf(err):
                h *= FAC_MIN
            else:
                fac11 = err**EXPO
                h = h / min(1.0 / FAC_MIN, fac11 / SAFETY)

    return _finish(samples_t, out_t, out_y, step_t, step_y, status, t, steps, rejections)


def _finish(samples_t, out_t, out_y, step_t, step_y, status, t, steps, rejections):
    st = np.asarray(step_t)
    sy = np.asarray(step_y)
    if samples_t is None:
        times, states = st, sy
    else:
        times = np.asarray(out_t)
        states = np.asarray(out_y).reshape(len(out_t), sy.shape[1])
    return OdeResult(times, states, status, float(t), steps, rejections, st, sy)
