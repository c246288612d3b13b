"""Truncated multimode Fock space and its dense operators.

Tensor ordering: mode 0 is the leftmost (slowest-varying) Kronecker factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

DEFAULT_MAX_DIM = 20_000


@dataclass(frozen=True)
class ModeTruncation:
    cutoffs: tuple[int, ...]
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        cutoffs = tuple(int(c) for c in self.cutoffs)
        object.__setattr__(self, "cutoffs", cutoffs)
        if not cutoffs:
            raise ValueError("need at least one mode")
        if any(c < 1 for c in cutoffs):
            raise ValueError("every Fock cutoff must be >= 1")
        if self.dim > self.max_dim:
            raise ValueError(
                f"Hilbert dimension {self.dim} exceeds the limit {self.max_dim}")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def check_mode(self, k: int) -> None:
        if not 0 <= k < self.n_modes:
            raise IndexError(f"mode index {k} out of range for {self.n_modes} modes")

    def occupations(self, k: int) -> np.ndarray:
        """Fock occupation of mode ``k`` for every basis state."""
        self.check_mode(k)
        grids = np.indices(self.dims)
        return grids[k].reshape(-1)

    def subsystem(self, modes) -> ModeTruncation:
        return ModeTruncation(tuple(self.cutoffs[k] for k in modes), self.max_dim)


@dataclass(frozen=True, eq=False)
class Operator:
    matrix: np.ndarray
    trunc: ModeTruncation

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.trunc.dim
        if m.shape != (d, d):
            raise ValueError(f"operator shape {m.shape} does not match dimension {d}")
        object.__setattr__(self, "matrix", m)

    def dag(self) -> Operator:
        return Operator(self.matrix.conj().T, self.trunc)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def _other(self, other):
        if isinstance(other, Operator):
            if other.trunc.dims != self.trunc.dims:
                raise ValueError("operators act on different truncations")
            return other.matrix
        return other

    def __add__(self, other):
        return Operator(self.matrix + self._other(other), self.trunc)

    def __sub__(self, other):
        return Operator(self.matrix - self._other(other), self.trunc)

    def __mul__(self, scalar):
        return Operator(self.matrix * scalar, self.trunc)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return Operator(self.matrix @ self._other(other), self.trunc)


def _single_annihilator(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def _embed(trunc: ModeTruncation, k: int, local: np.ndarray) -> np.ndarray:
    factors = [local if j == k else np.eye(d) for j, d in enumerate(trunc.dims)]
    return reduce(np.kron, factors)


def annihilator(trunc: ModeTruncation, k: int) -> Operator:
    trunc.check_mode(k)
    return Operator(_embed(trunc, k, _single_annihilator(trunc.dims[k])), trunc)


def creator(trunc: ModeTruncation, k: int) -> Operator:
    return annihilator(trunc, k).dag()


def position(trunc: ModeTruncation, k: int) -> Operator:
    a = annihilator(trunc, k).matrix
    q = (a + a.T) / np.sqrt(2.0)
    return Operator(q, trunc)


def number(trunc: ModeTruncation, k: int) -> Operator:
    return Operator(np.diag(trunc.occupations(k).astype(float)), trunc)


def identity(trunc: ModeTruncation) -> Operator:
    return Operator(np.eye(trunc.dim), trunc)


def mode_populations(rho: np.ndarray, trunc: ModeTruncation) -> np.ndarray:
    """Mean occupation of every mode from the diagonal of ``rho``."""
    p = np.real(np.diagonal(rho)).reshape(trunc.dims)
    out = np.empty(trunc.n_modes)
    for k, d in enumerate(trunc.dims):
        axes = tuple(j for j in range(trunc.n_modes) if j != k)
        out[k] = np.arange(d) @ p.sum(axis=axes)
    return out


def top_level_populations(rho: np.ndarray, trunc: ModeTruncation) -> np.ndarray:
    """Population of the highest retained Fock level of each mode.

    Large values mean the truncation is leaking.
    """
    p = np.real(np.diagonal(rho)).reshape(trunc.dims)
    out = np.empty(trunc.n_modes)
    for k in range(trunc.n_modes):
        out[k] = np.take(p, -1, axis=k).sum()
    return out
