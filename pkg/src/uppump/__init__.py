"""Multiphonon up-pumping in shocked molecular crystals.

Synthetic phonon baths, bath-induced drives and dissipation rates of the
doorway modes, and Lindblad dynamics of a truncated five-mode vibrational
system.
"""

__version__ = "0.1.0"

from .config import ConfigError, ExperimentConfig, emit, load, parse  # noqa: E402
from .hilbert import ModeTruncation, Operator, annihilator, creator, number, position  # noqa: E402
from .lindblad import (DensityMatrix, DissipatorSet, NumericalInvariantError,  # noqa: E402
                       TruncationLeakageError, evolve, exact_propagate)
from .model import CubicCoupling, Mode, ModelConfig, ModeSet, build_hamiltonian  # noqa: E402
from .rates import compute_dissipation_rates, compute_drive, rate_profile  # noqa: E402
from .spectral import BathSpectra, CouplingKernel, SpectralProfile, generate_bath  # noqa: E402

__all__ = [
    "BathSpectra", "ConfigError", "CouplingKernel", "CubicCoupling", "DensityMatrix",
    "DissipatorSet", "ExperimentConfig", "Mode", "ModeSet", "ModeTruncation",
    "ModelConfig", "NumericalInvariantError", "Operator", "SpectralProfile",
    "TruncationLeakageError", "annihilator", "build_hamiltonian",
    "compute_dissipation_rates", "compute_drive", "creator", "emit", "evolve",
    "exact_propagate", "generate_bath", "load", "number", "parse", "position",
    "rate_profile",
]
