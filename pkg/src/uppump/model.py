"""Vibrational-mode model: mode table, cubic couplings, system Hamiltonian.

All quantities in a :class:`ModeSet` are in cm^-1.  Builders take a ``unit``
(normally the first mode's frequency) and return operators in that unit, so
the integrator works in the dimensionless time ``tau = unit * t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .hilbert import ModeTruncation, Operator, number, position
from .spectral import bose_einstein

PATHWAYS = {
    # positions (0-based) of the couplings each pathway keeps
    "A": (2,),
    "B": (0, 1),
}


@dataclass(frozen=True)
class Mode:
    """One vibrational mode.

    Exactly one dissipation source is set: the bath pair ``gamma``/``gamma_tilde``
    or the phenomenological ``kappa`` (thermalised at the model temperature).
    """

    omega: float
    cutoff: int
    drive: float = 0.0
    gamma: float | None = None
    gamma_tilde: float | None = None
    kappa: float | None = None

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("mode frequency must be positive")
        if self.cutoff < 1:
            raise ValueError("Fock cutoff must be >= 1")
        bath = self.gamma is not None or self.gamma_tilde is not None
        if bath == (self.kappa is not None):
            raise ValueError("a mode needs exactly one rate source (gamma pair or kappa)")
        if bath and (self.gamma is None or self.gamma_tilde is None):
            raise ValueError("bath rates need both gamma and gamma_tilde")
        for r in (self.gamma, self.gamma_tilde, self.kappa):
            if r is not None and r < 0:
                raise ValueError("rates must be >= 0")

    @property
    def phenomenological(self) -> bool:
        return self.kappa is not None

    def rates(self, temperature: float) -> tuple[float, float]:
        """(down, up) rates in cm^-1."""
        if self.kappa is not None:
            n = bose_einstein(self.omega, temperature)
            return self.kappa * (n + 1.0), self.kappa * n
        return self.gamma, self.gamma_tilde


@dataclass(frozen=True)
class CubicCoupling:
    modes: tuple[int, int, int]
    strength: float

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(i) for i in self.modes))
        if len(self.modes) != 3:
            raise ValueError("a cubic coupling needs three mode indices")


@dataclass(frozen=True)
class ModeSet:
    modes: tuple[Mode, ...]
    temperature: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("empty mode set")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def __len__(self):
        return len(self.modes)

    def __getitem__(self, k):
        return self.modes[k]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])

    @property
    def drives(self) -> np.ndarray:
        return np.array([m.drive for m in self.modes])

    @property
    def unit(self) -> float:
        return self.modes[0].omega

    def truncation(self, max_dim=None) -> ModeTruncation:
        cut = tuple(m.cutoff for m in self.modes)
        return ModeTruncation(cut) if max_dim is None else ModeTruncation(cut, max_dim)

    def rates(self) -> np.ndarray:
        """(N, 2) array of down/up rates in cm^-1."""
        return np.array([m.rates(self.temperature) for m in self.modes])

    def doorway(self, debye_cutoff: float) -> np.ndarray:
        return self.frequencies < 2.0 * debye_cutoff

    def with_drives(self, drives) -> ModeSet:
        modes = [replace(m, drive=float(e)) for m, e in zip(self.modes, drives)]
        return replace(self, modes=tuple(modes))

    def subset(self, indices) -> ModeSet:
        return replace(self, modes=tuple(self.modes[i] for i in indices))


@dataclass(frozen=True)
class ModelConfig:
    modes: ModeSet
    couplings: tuple[CubicCoupling, ...] = field(default_factory=tuple)
    pathway: str = "full"

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(self.couplings))
        n = len(self.modes)
        for c in self.couplings:
            if any(not 0 <= i < n for i in c.modes):
                raise IndexError(f"coupling {c.modes} references a missing mode")
        if self.pathway not in ("full", *PATHWAYS):
            raise ValueError(f"unknown pathway {self.pathway!r}")

    def active_couplings(self) -> tuple[CubicCoupling, ...]:
        return pathway_variant(self, self.pathway).couplings


def pathway_variant(config: ModelConfig, which: str) -> ModelConfig:
    """Zero every coupling the chosen pathway excludes.

    ``A`` keeps only the third coupling (Q2 Q3 Q5 in the five-mode model),
    ``B`` keeps the first two (Q1^2 Q4 and Q1 Q4 Q5); ``full`` keeps all.
    """
    if which == "full":
        return config
    if which not in PATHWAYS:
        raise ValueError(f"unknown pathway {which!r}")
    if len(config.couplings) < 3:
        raise ValueError("pathway variants need the three model couplings")
    keep = PATHWAYS[which]
    couplings = tuple(c if i in keep else replace(c, strength=0.0)
                      for i, c in enumerate(config.couplings))
    return replace(config, couplings=couplings)


def cubic_term(trunc: ModeTruncation, coupling: CubicCoupling) -> Operator:
    i, j, k = coupling.modes
    for m in (i, j, k):
        trunc.check_mode(m)
    return position(trunc, i) @ position(trunc, j) @ position(trunc, k)


def build_hamiltonian(modes: ModeSet, couplings=(), trunc: ModeTruncation | None = None,
                      unit: float = 1.0, include_drive: bool = True) -> Operator:
    """Lab-frame system Hamiltonian divided by ``unit`` (hbar = 1).

    sum_k Omega_k n_k + sum_k E_k Q_k + sum g' Q_i Q_j Q_k.  With
    ``include_drive=False`` the drive terms are omitted (the unshocked model).
    """
    trunc = modes.truncation() if trunc is None else trunc
    if trunc.n_modes != len(modes):
        raise ValueError(
            f"truncation has {trunc.n_modes} modes, model has {len(modes)}")
    h = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    for k, m in enumerate(modes):
        h += (m.omega / unit) * number(trunc, k).matrix
        if include_drive and m.drive:
            h += (m.drive / unit) * position(trunc, k).matrix
    for c in couplings:
        if c.strength:
            h += (c.strength / unit) * cubic_term(trunc, c).matrix
    # cubic products of real symmetric matrices are symmetric only up to rounding
    h = 0.5 * (h + h.conj().T)
    return Operator(h, trunc)


def coupling_clusters(n_modes: int, couplings) -> list[tuple[int, ...]]:
    """Groups of modes connected through non-zero couplings.

    Drives and dissipators act on single modes, so a product initial state
    stays a product across these groups.
    """
    parent = list(range(n_modes))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for c in couplings:
        if not c.strength:
            continue
        root = find(c.modes[0])
        for m in c.modes[1:]:
            parent[find(m)] = root
    groups: dict[int, list[int]] = {}
    for i in range(n_modes):
        groups.setdefault(find(i), []).append(i)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def restrict_couplings(couplings, cluster) -> tuple[CubicCoupling, ...]:
    index = {m: i for i, m in enumerate(cluster)}
    out = []
    for c in couplings:
        if c.strength and all(m in index for m in c.modes):
            out.append(CubicCoupling(tuple(index[m] for m in c.modes), c.strength))
    return tuple(out)
