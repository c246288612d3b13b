"""Phonon environment on a discrete frequency grid.

Frequencies are in cm^-1 and temperatures in kelvin throughout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter1d

#: Boltzmann constant in cm^-1 / K.
KB_CM = 0.695035

BATH_CSV_HEADER = ("omega", "S", "Re_alpha", "Im_alpha")


def quadrature_weights(grid: np.ndarray) -> np.ndarray:
    """Trapezoid weights on ``grid``.

    A one-node grid is a point mass of unit measure, so the density value
    itself carries the full weight of the node.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("quadrature grid must be a non-empty 1-D array")
    if grid.size == 1:
        return np.ones(1)
    h = np.diff(grid)
    w = np.zeros_like(grid)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def bose_einstein(omega, temperature: float):
    """Thermal occupation ``1 / (exp(omega / kB T) - 1)``.

    Vectorised over ``omega``; returns zeros at ``T = 0``.
    """
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(omega_arr <= 0):
        raise ValueError("bose_einstein needs omega > 0 (occupation diverges)")
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        out = np.zeros_like(omega_arr)
    else:
        with np.errstate(over="ignore"):  # deep quantum limit -> exactly 0
            out = 1.0 / np.expm1(omega_arr / (KB_CM * temperature))
    return out if out.ndim else float(out)


def mean_position(amplitude):
    """Mean quadrature ``sqrt(2) Re(alpha)`` of a coherent amplitude."""
    re = np.real(amplitude)
    return np.sqrt(2.0) * re


@dataclass(frozen=True)
class CouplingKernel:
    """Lorentzian two-phonon -> vibration coupling surface.

    ``strength`` is the on-resonance value and ``width`` the half width in
    the total detuning ``Omega_k - omega - omega'``.
    """

    strength: float
    width: float

    def __post_init__(self):
        if self.strength < 0:
            raise ValueError("kernel strength must be >= 0")
        if not self.width > 0:
            raise ValueError("kernel width must be > 0")

    def __call__(self, omega_k, omega, omega_p):
        return kernel_value(self, omega_k, omega, omega_p)


def kernel_value(kernel: CouplingKernel, omega_k, omega, omega_p):
    # omega + omega' is evaluated first so the value is exactly symmetric
    detuning = omega_k - (np.asarray(omega) + np.asarray(omega_p))
    d2 = kernel.width ** 2
    out = kernel.strength * d2 / (detuning ** 2 + d2)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class SpectralProfile:
    """Recipe for a synthetic post-shock bath.

    The density of states is a seeded, smoothed noise pattern on the
    envelope ``omega**2 * (1 - omega/omega_D)**density_rolloff``, rescaled so
    that its integral equals ``total_modes``.  The shock occupation
    ``|alpha|^2`` follows ``alpha_scale * (omega/omega_D)**alpha_exponent``
    with its own noise pattern.
    """

    debye_cutoff: float = 240.0
    n_grid: int = 256
    temperature: float = 400.0
    total_modes: float = 46.2
    density_rolloff: float = 1.5
    density_noise: float = 0.4
    alpha_scale: float = 0.7
    alpha_exponent: float = 1.0
    alpha_noise: float = 0.4
    smoothing: int = 9
    alpha_phase: str = "zero"

    def validate(self):
        if not self.debye_cutoff > 0:
            raise ValueError("debye_cutoff must be positive")
        if self.n_grid < 2:
            raise ValueError("n_grid must be >= 2")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not self.total_modes > 0:
            raise ValueError("total_modes must be positive")
        if self.alpha_scale < 0:
            raise ValueError("alpha_scale must be >= 0")
        if not (0 <= self.density_noise < 1 and 0 <= self.alpha_noise < 1):
            raise ValueError("noise amplitudes must lie in [0, 1)")
        if self.smoothing < 1:
            raise ValueError("smoothing window must be >= 1")
        if self.alpha_phase not in ("zero", "random"):
            raise ValueError(f"unknown alpha_phase {self.alpha_phase!r}")


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BathSpectra:
    grid: np.ndarray
    density: np.ndarray
    amplitude: np.ndarray
    debye_cutoff: float
    temperature: float
    seed: int | None = None
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        grid = _frozen(np.asarray(self.grid, dtype=float))
        density = _frozen(np.asarray(self.density, dtype=float))
        amplitude = _frozen(np.asarray(self.amplitude, dtype=complex))
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("bath grid must be a non-empty 1-D array")
        if density.shape != grid.shape or amplitude.shape != grid.shape:
            raise ValueError("density and amplitude must match the grid")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("bath grid must be strictly increasing")
        if grid[0] <= 0 or grid[-1] > self.debye_cutoff * (1 + 1e-12):
            raise ValueError("bath grid must lie in (0, debye_cutoff]")
        if np.any(density < 0):
            raise ValueError("density of states must be non-negative")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", density)
        object.__setattr__(self, "amplitude", amplitude)
        object.__setattr__(self, "weights", _frozen(quadrature_weights(grid)))

    def __eq__(self, other):
        if not isinstance(other, BathSpectra):
            return NotImplemented
        return (
            np.array_equal(self.grid, other.grid)
            and np.array_equal(self.density, other.density)
            and np.array_equal(self.amplitude, other.amplitude)
            and self.debye_cutoff == other.debye_cutoff
            and self.temperature == other.temperature
        )

    @property
    def size(self) -> int:
        return self.grid.size

    def total_modes(self) -> float:
        """Integral of the density of states over the grid."""
        return float(np.sum(self.weights * self.density))

    def position(self) -> np.ndarray:
        return mean_position(self.amplitude)

    def occupation(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def thermal(self) -> np.ndarray:
        return bose_einstein(self.grid, self.temperature)

    def with_temperature(self, temperature: float) -> BathSpectra:
        return BathSpectra(self.grid, self.density, self.amplitude,
                           self.debye_cutoff, temperature, self.seed)

    def scaled_amplitude(self, factor: float) -> BathSpectra:
        return BathSpectra(self.grid, self.density, self.amplitude * factor,
                           self.debye_cutoff, self.temperature, self.seed)

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(BATH_CSV_HEADER)
            for w, s, a in zip(self.grid, self.density, self.amplitude):
                writer.writerow([f"{w:.17g}", f"{s:.17g}",
                                 f"{a.real:.17g}", f"{a.imag:.17g}"])

    @classmethod
    def from_csv(cls, path, temperature: float, debye_cutoff: float | None = None,
                 seed: int | None = None) -> BathSpectra:
        with Path(path).open(newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != BATH_CSV_HEADER:
                raise ValueError(f"unexpected bath CSV header {header}")
            rows = np.array([[float(x) for x in row] for row in reader if row])
        if rows.size == 0:
            raise ValueError("bath CSV has no rows")
        grid = rows[:, 0]
        cutoff = float(grid[-1]) if debye_cutoff is None else debye_cutoff
        return cls(grid, rows[:, 1], rows[:, 2] + 1j * rows[:, 3], cutoff,
                   temperature, seed)


def _modulation(u: np.ndarray, amplitude: float, window: int) -> np.ndarray:
    smooth = uniform_filter1d(u, size=window, mode="nearest")
    return 1.0 + amplitude * (2.0 * smooth - 1.0)


def generate_bath(seed: int, profile: SpectralProfile | None = None) -> BathSpectra:
    """Draw a reproducible bath from ``profile``.

    The random stream is consumed in a fixed order (density noise, occupation
    noise, phases) regardless of which features are switched on.
    """
    profile = SpectralProfile() if profile is None else profile
    profile.validate()
    wd, m = profile.debye_cutoff, profile.n_grid
    grid = wd * np.arange(1, m + 1) / m
    x = grid / wd

    rng = np.random.default_rng(seed)
    u_density = rng.random(m)
    u_alpha = rng.random(m)
    u_phase = rng.random(m)

    envelope = grid ** 2 * (1.0 - x) ** profile.density_rolloff
    density = envelope * _modulation(u_density, profile.density_noise, profile.smoothing)
    weights = quadrature_weights(grid)
    density *= profile.total_modes / np.sum(weights * density)

    occupation = (profile.alpha_scale * x ** profile.alpha_exponent
                  * _modulation(u_alpha, profile.alpha_noise, profile.smoothing))
    amplitude = np.sqrt(occupation).astype(complex)
    if profile.alpha_phase == "random":
        amplitude = amplitude * np.exp(2j * np.pi * u_phase)

    return BathSpectra(grid, density, amplitude, wd, profile.temperature, seed)
