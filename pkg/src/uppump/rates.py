"""Bath-induced coherent drive and dissipation rates of the doorway modes.

Both quantities are double trapezoid sums over the stored bath grid.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .spectral import BathSpectra, CouplingKernel, kernel_value


@dataclass(frozen=True)
class DriveResult:
    mode: int
    times: np.ndarray
    values: np.ndarray

    @property
    def initial(self) -> float:
        """Drive at t = 0 (the value the evolver uses by default)."""
        if self.times.size and self.times[0] == 0:
            return float(self.values[0])
        raise ValueError("drive series does not start at t = 0")


@dataclass(frozen=True)
class RatePair:
    mode: int
    down: float
    up: float

    def __post_init__(self):
        if self.down < 0 or self.up < 0:
            raise ValueError(
                f"negative dissipation rate ({self.down}, {self.up}) for mode {self.mode}; "
                "the bath amplitudes give an unphysical dissipator")


def _kernel_matrix(bath: BathSpectra, kernel: CouplingKernel, omega_k: float):
    w = bath.grid
    return kernel_value(kernel, omega_k, w[:, None], w[None, :])


def drive_values(bath: BathSpectra, kernel: CouplingKernel, omega_k: float,
                 times) -> np.ndarray:
    """E_k(t) on an array of times (1/cm^-1 units)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise ValueError("times must be non-empty")
    g = _kernel_matrix(bath, kernel, omega_k)
    base = bath.weights * bath.density
    # 2 Re[alpha e^{-i w t}] per node and time: shape (n_times, M)
    out = np.empty(times.size)
    for lo in range(0, times.size, 2048):
        t = times[lo:lo + 2048]
        x = 2.0 * np.real(bath.amplitude[None, :] * np.exp(-1j * np.outer(t, bath.grid)))
        f = x * base[None, :]
        out[lo:lo + 2048] = 0.5 * np.sum((f @ g) * f, axis=1)
    return out


def compute_drive(bath: BathSpectra, kernel: CouplingKernel, omega_k: float,
                  times, mode: int = 0) -> DriveResult:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return DriveResult(mode, times, drive_values(bath, kernel, omega_k, times))


def _position_at(bath: BathSpectra, omega) -> np.ndarray:
    """Linear interpolation of q on the grid, zero outside [w_1, w_M]."""
    omega = np.asarray(omega, dtype=float)
    q = bath.position()
    inside = (omega >= bath.grid[0]) & (omega <= bath.grid[-1])
    out = np.zeros_like(omega)
    if bath.size == 1:
        out[inside] = q[0]
    else:
        out[inside] = np.interp(omega[inside], bath.grid, q)
    return out


def compute_dissipation_rates(bath: BathSpectra, kernel: CouplingKernel,
                              omega_k: float, mode: int = 0) -> RatePair:
    """Down and up rates of a doorway mode at frequency ``omega_k``.

    The first kernel is evaluated on the energy-matching line
    ``(omega, omega_k - omega)``; the second couples ``omega`` to every
    ``omega'`` of the bath.
    """
    if not omega_k > 0:
        raise ValueError("mode frequency must be positive")
    w = bath.grid
    base = bath.weights * bath.density
    q = bath.position()
    q_match = _position_at(bath, omega_k - w)
    g_match = kernel_value(kernel, omega_k, w, omega_k - w)
    inner = _kernel_matrix(bath, kernel, omega_k) @ (base * q)
    c = np.pi * g_match * base * q_match * inner
    n_th = bath.thermal()
    down = float(np.sum(c * (n_th + 1.0)))
    up = float(np.sum(c * n_th))
    return RatePair(mode, down, up)


def rate_profile(bath: BathSpectra, kernel: CouplingKernel, omegas,
                 workers: int = 1) -> np.ndarray:
    """Rows of ``(Omega, E(0), gamma, gamma_tilde)`` for each frequency.

    Rows are independent quadratures, so a thread pool gives output identical
    to the sequential sweep.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if omegas.size == 0:
        raise ValueError("frequency sweep is empty")

    def row(om):
        e0 = drive_values(bath, kernel, om, [0.0])[0]
        pair = compute_dissipation_rates(bath, kernel, om)
        return (om, e0, pair.down, pair.up)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, omegas))
    else:
        rows = [row(om) for om in omegas]
    return np.array(rows, dtype=float).reshape(-1, 4)
