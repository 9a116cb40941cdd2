"""Riesz transforms and the nonlocal forcings on the periodic torus.

``R_ij[h] = F^{-1}{ k_i k_j / |k|^2 * h_hat }``, the Hessian of the inverse
Laplacian, applied exactly in Fourier space. The zero mode is mapped to 0,
which is the mean-zero gauge required for solvability on the torus.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .core_types import ScalarField2D
from .errors import GridMismatch, NonzeroMean

MEAN_TOL = 1e-12


@lru_cache(maxsize=32)
def wavenumbers(nx: int, ny: int, lx: float, ly: float):
    """Angular wavenumber meshes ``(k1, k2)`` in full ``fft2`` ordering."""
    k1 = 2.0 * np.pi * np.fft.fftfreq(nx, d=lx / nx)
    k2 = 2.0 * np.pi * np.fft.fftfreq(ny, d=ly / ny)
    K1, K2 = np.meshgrid(k1, k2, indexing="ij")
    K1.setflags(write=False)
    K2.setflags(write=False)
    return K1, K2


@lru_cache(maxsize=32)
def riesz_symbol(i: int, j: int, nx: int, ny: int, lx: float, ly: float) -> np.ndarray:
    """Multiplier ``k_i k_j / |k|^2`` with the zero mode set to 0."""
    if i not in (1, 2) or j not in (1, 2):
        raise ValueError("Riesz indices must be 1 or 2")
    K1, K2 = wavenumbers(nx, ny, lx, ly)
    ks = (K1, K2)
    k2 = K1 * K1 + K2 * K2
    with np.errstate(divide="ignore", invalid="ignore"):
        sym = np.where(k2 > 0, ks[i - 1] * ks[j - 1] / k2, 0.0)
    # Nyquist rows carry an unpaired sign for odd symbols; drop them so the
    # result stays real and R12 = R21 holds exactly
    if i != j:
        if nx % 2 == 0:
            sym[nx // 2, :] = 0.0
        if ny % 2 == 0:
            sym[:, ny // 2] = 0.0
    sym.setflags(write=False)
    return sym


def _check_mean(h: ScalarField2D) -> None:
    scale = float(np.max(np.abs(h.values))) if h.values.size else 0.0
    if abs(h.mean()) > MEAN_TOL * max(scale, np.finfo(float).tiny):
        raise NonzeroMean(f"field mean {h.mean():.3e} exceeds {MEAN_TOL:g} * max|h| = {MEAN_TOL * scale:.3e}")


def riesz_apply(h: ScalarField2D, i: int, j: int) -> ScalarField2D:
    """Apply ``R_ij`` to a mean-zero periodic field.

    Raises
    ------
    NonzeroMean
        If ``|mean(h)| > 1e-12 * max|h|``.
    """
    _check_mean(h)
    sym = riesz_symbol(i, j, h.nx, h.ny, h.lx, h.ly)
    out = np.fft.ifft2(sym * np.fft.fft2(h.values)).real
    return h.with_values(out)


def forcing_fields(rho: ScalarField2D, k: float = -1.0, c_b: float = 1.0):
    """Nonlocal forcings ``f1 = k (R11 - R22)[rho - c_b]`` and ``f2 = 2 k R12[rho - c_b]``."""
    pert = rho - c_b
    _check_mean(pert)
    hat = np.fft.fft2(pert.values)
    args = (rho.nx, rho.ny, rho.lx, rho.ly)
    s11, s22, s12 = riesz_symbol(1, 1, *args), riesz_symbol(2, 2, *args), riesz_symbol(1, 2, *args)
    f1 = k * np.fft.ifft2((s11 - s22) * hat).real
    f2 = 2.0 * k * np.fft.ifft2(s12 * hat).real
    return rho.with_values(f1), rho.with_values(f2)


QUADRATURES = {"trapezoid": cumulative_trapezoid, "simpson": cumulative_simpson}


def strain_integrals(times, f1, f2, rho, method: str = "trapezoid"):
    """Running integrals ``int_0^t f_i / rho``.

    ``method`` is ``'trapezoid'`` (default) or ``'simpson'``; the latter is
    fourth order on uniform grids and is what the flow verifier uses.
    """
    if method not in QUADRATURES:
        raise ValueError(f"unknown quadrature {method!r}")
    times = np.asarray(times, float)
    f1, f2, rho = (np.asarray(v, float) for v in (f1, f2, rho))
    n = times.size
    if not (f1.shape == f2.shape == rho.shape == (n,)):
        raise GridMismatch(
            f"histories have shapes {f1.shape}, {f2.shape}, {rho.shape} for {n} times"
        )
    if n > 1 and np.any(np.diff(times) <= 0):
        raise GridMismatch("time grid must be strictly increasing")
    if n < 2:
        return np.zeros(n), np.zeros(n)
    quad = QUADRATURES[method]
    I1 = quad(f1 / rho, x=times, initial=0.0)
    I2 = quad(f2 / rho, x=times, initial=0.0)
    return I1, I2


def A_of_t(
    times, f1, f2, rho, omega0: float, eta0: float, xi0: float, rho0: float, method: str = "trapezoid"
) -> np.ndarray:
    """The coefficient ``A(t)`` of ``rho^2`` in the closed divergence equation.

    ``A = ((omega0/rho0)^2 - (eta0/rho0 + I1)^2 - (xi0/rho0 + I2)^2) / 2``
    with ``I_i = int_0^t f_i/rho``, sampled on ``times``. By construction it
    never exceeds ``(omega0/rho0)^2 / 2``.

    Raises
    ------
    GridMismatch
        If the histories are not sampled on the same strictly increasing grid.
    """
    I1, I2 = strain_integrals(times, f1, f2, rho, method)
    return 0.5 * ((omega0 / rho0) ** 2 - (eta0 / rho0 + I1) ** 2 - (xi0 / rho0 + I2) ** 2)
