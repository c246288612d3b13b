"""Master-equation evolution of the truncated vibrational density matrix.

Time is dimensionless (``tau``) and every rate and energy is in the same
unit as the Hamiltonian handed in.  Each mode has a down channel (rate
``down``, jump operator b) and an up channel (rate ``up``, jump b^dagger).
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from ._kernels import assemble_rhs
from .hilbert import (ModeTruncation, Operator, annihilator, mode_populations, position,
                      top_level_populations)

log = logging.getLogger(__name__)

ORACLE_MAX_DIM = 64


class NumericalInvariantError(RuntimeError):
    """Evolution left the physical state space (trace, positivity, truncation)."""


class TruncationLeakageError(NumericalInvariantError):
    pass


@dataclass(eq=False)
class DensityMatrix:
    matrix: np.ndarray
    trunc: ModeTruncation
    tau: float = 0.0

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        d = self.trunc.dim
        if self.matrix.shape != (d, d):
            raise ValueError(f"density matrix shape {self.matrix.shape} != ({d}, {d})")

    @classmethod
    def vacuum(cls, trunc: ModeTruncation) -> DensityMatrix:
        m = np.zeros((trunc.dim, trunc.dim), dtype=complex)
        m[0, 0] = 1.0
        return cls(m, trunc)

    @classmethod
    def thermal(cls, trunc: ModeTruncation, occupations) -> DensityMatrix:
        """Product of per-mode thermal states, renormalised on the truncation."""
        diag = np.ones(1)
        for d, n in zip(trunc.dims, occupations):
            if n < 0:
                raise ValueError("thermal occupation must be >= 0")
            p = np.zeros(d)
            p[0] = 1.0
            if n > 0:
                p = (n / (n + 1.0)) ** np.arange(d)
            diag = np.kron(diag, p / p.sum())
        return cls(np.diag(diag).astype(complex), trunc)

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def eigenvalue_bounds(self) -> tuple[float, float]:
        h = 0.5 * (self.matrix + self.matrix.conj().T)
        lam = np.linalg.eigvalsh(h)
        return float(lam[0]), float(lam[-1])

    def min_eigenvalue(self) -> float:
        return self.eigenvalue_bounds()[0]

    def purity(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))

    def populations(self) -> np.ndarray:
        return mode_populations(self.matrix, self.trunc)

    def leakage(self) -> np.ndarray:
        return top_level_populations(self.matrix, self.trunc)


@dataclass(frozen=True)
class DissipatorSet:
    down: np.ndarray
    up: np.ndarray

    def __post_init__(self):
        down = np.asarray(self.down, dtype=float).reshape(-1)
        up = np.asarray(self.up, dtype=float).reshape(-1)
        if down.shape != up.shape:
            raise ValueError("down and up rates need one entry per mode")
        if np.any(down < 0) or np.any(up < 0):
            raise ValueError("dissipation rates must be >= 0")
        object.__setattr__(self, "down", down)
        object.__setattr__(self, "up", up)

    @classmethod
    def none(cls, n_modes: int) -> DissipatorSet:
        return cls(np.zeros(n_modes), np.zeros(n_modes))

    @classmethod
    def from_modes(cls, modes, unit: float = 1.0) -> DissipatorSet:
        r = modes.rates() / unit
        return cls(r[:, 0], r[:, 1])

    def subset(self, indices) -> DissipatorSet:
        idx = list(indices)
        return DissipatorSet(self.down[idx], self.up[idx])


def _check_shapes(rho: DensityMatrix, h: Operator, diss: DissipatorSet):
    if h.trunc.dims != rho.trunc.dims:
        raise ValueError("Hamiltonian and state act on different truncations")
    if diss.down.size != rho.trunc.n_modes:
        raise ValueError("dissipator set does not match the number of modes")


def rhs(rho: DensityMatrix, h: Operator, diss: DissipatorSet) -> np.ndarray:
    """d rho / d tau, evaluated term by term with dense operators."""
    _check_shapes(rho, h, diss)
    r, hm = rho.matrix, h.matrix
    out = -1j * (hm @ r - r @ hm)
    for k in range(rho.trunc.n_modes):
        b = annihilator(rho.trunc, k).matrix
        bd = b.conj().T
        if diss.down[k]:
            out += 0.5 * diss.down[k] * (2 * b @ r @ bd - bd @ b @ r - r @ bd @ b)
        if diss.up[k]:
            out += 0.5 * diss.up[k] * (2 * bd @ r @ b - b @ bd @ r - r @ b @ bd)
    return out


class LindbladGenerator:
    """Fast application of the Lindblad generator for Hermitian states.

    ``H rho`` is a sparse product (real arithmetic when ``H`` is real); the
    anti-Hermitian loss term, the Hermitian completion and the jump terms
    ``L rho L^dag`` are assembled in one compiled pass using index shifts on
    the tensor-ordered basis.  Optional time-dependent drive amplitudes
    multiply the per-mode position operators.
    """

    def __init__(self, h: Operator, diss: DissipatorSet, drive=None):
        trunc = h.trunc
        n = trunc.n_modes
        if diss.down.size != n:
            raise ValueError("dissipator set does not match the number of modes")
        self.trunc = trunc
        self.dims = trunc.dims
        self.real = not np.any(h.matrix.imag)
        self.h = sp.csr_matrix(h.matrix.real if self.real else h.matrix)
        strides = np.cumprod((1,) + self.dims[:0:-1])[::-1]
        self.shifts = np.ascontiguousarray(strides, dtype=np.int64)
        self.loss = np.zeros(trunc.dim)
        self.w_down = np.zeros((n, trunc.dim))
        self.w_up = np.zeros((n, trunc.dim))
        for k in range(n):
            occ = trunc.occupations(k).astype(float)
            below_top = occ < trunc.cutoffs[k]
            # b b^dag is zero on the top level of a truncated mode
            self.loss += diss.down[k] * occ + diss.up[k] * (occ + 1.0) * below_top
            self.w_down[k] = np.sqrt(diss.down[k] * (occ + 1.0)) * below_top
            self.w_up[k] = np.sqrt(diss.up[k] * occ)
        self.drive = drive
        if drive is not None:
            self.positions = [sp.csr_matrix(position(trunc, k).matrix.real) for k in range(n)]

    def _apply(self, op, rho):
        if op.dtype == np.float64:
            return (op @ rho.view(np.float64)).view(np.complex128)
        return op @ rho

    def jump_terms(self, rho: np.ndarray) -> np.ndarray:
        """sum_j L_j rho L_j^dag by array slicing (reference for the kernel)."""
        out = np.zeros_like(rho)
        d = rho.shape[0]
        for k, step in enumerate(self.shifts):
            wd, wu = self.w_down[k], self.w_up[k]
            out[:d - step, :d - step] += np.outer(wd[:d - step], wd[:d - step]) * rho[step:, step:]
            out[step:, step:] += np.outer(wu[step:], wu[step:]) * rho[:d - step, :d - step]
        return out

    def __call__(self, rho: np.ndarray, tau: float = 0.0) -> np.ndarray:
        rho = np.ascontiguousarray(rho)
        y = self._apply(self.h, rho)
        if self.drive is not None:
            for e, q in zip(self.drive(tau), self.positions):
                if e:
                    y += e * self._apply(q, rho)
        return assemble_rhs(y, rho, self.loss, self.shifts, self.w_down, self.w_up,
                            np.empty_like(rho))


@dataclass(frozen=True)
class Record:
    """Diagnostics of one recorded step.

    ``trace_drift`` and ``hermiticity_drift`` are the largest pre-correction
    errors seen since the previous record.
    """

    tau: float
    populations: np.ndarray
    trace_drift: float
    hermiticity_drift: float
    min_eig: float
    max_eig: float
    purity: float
    leakage: np.ndarray
    state: DensityMatrix


@dataclass
class EvolutionResult:
    taus: np.ndarray
    populations: np.ndarray
    trace_drift: np.ndarray
    hermiticity_drift: np.ndarray
    min_eig: np.ndarray
    max_eig: np.ndarray
    purity: np.ndarray
    leakage: np.ndarray
    final: DensityMatrix
    snapshots: list = field(default_factory=list)

    @classmethod
    def collect(cls, records, keep_snapshots: bool = False) -> EvolutionResult:
        records = list(records)
        def col(name):
            return np.array([getattr(r, name) for r in records])
        return cls(col("tau"), col("populations"), col("trace_drift"),
                   col("hermiticity_drift"), col("min_eig"), col("max_eig"),
                   col("purity"), col("leakage"), records[-1].state,
                   [r.state for r in records] if keep_snapshots else [])

    def rows(self) -> np.ndarray:
        """Observable table: tau, n_k..., trace_drift, min_eig, purity, leak_k..."""
        return np.column_stack([self.taus, self.populations, self.trace_drift,
                                self.min_eig, self.purity, self.leakage])


def iter_evolve(rho0: DensityMatrix, h: Operator, diss: DissipatorSet, tau_end: float,
                dtau: float, record_every: int = 1, *, drive=None,
                leak_limit: float | None = 1e-2, drift_limit: float = 1e-6,
                positivity_tol: float = 1e-6):
    """Fixed-step classical RK4, yielding a :class:`Record` at the initial
    time, every ``record_every`` steps and at the end.

    After every step the state is re-Hermitised and its trace reset to one;
    reported drifts are the pre-correction values.
    ``drive`` is an optional callable ``tau -> per-mode drive amplitudes``
    added on top of ``h``.  ``tau_end`` is rounded to a whole number of steps.
    """
    _check_shapes(rho0, h, diss)
    if not dtau > 0 or not tau_end > 0:
        raise ValueError("dtau and tau_end must be positive")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    n_steps = max(1, int(round(tau_end / dtau)))
    dt = tau_end / n_steps
    gen = LindbladGenerator(h, diss, drive)
    trunc = rho0.trunc
    rho = np.array(rho0.matrix, dtype=complex)
    max_drift = max_herm = 0.0

    def record(tau):
        state = DensityMatrix(rho.copy(), trunc, tau)
        lam, lam_top = state.eigenvalue_bounds()
        if lam < -positivity_tol:
            raise NumericalInvariantError(
                f"positivity violated at tau={tau:.6g}: min eigenvalue {lam:.3e}")
        return Record(tau, state.populations(), max_drift, max_herm, lam, lam_top,
                      state.purity(), state.leakage(), state)

    yield record(rho0.tau)
    stage = np.empty_like(rho)
    for step in range(1, n_steps + 1):
        tau = rho0.tau + (step - 1) * dt
        k = gen(rho, tau)
        acc = k.copy()
        np.multiply(k, 0.5 * dt, out=stage)
        stage += rho
        k = gen(stage, tau + 0.5 * dt)
        acc += 2.0 * k
        np.multiply(k, 0.5 * dt, out=stage)
        stage += rho
        k = gen(stage, tau + 0.5 * dt)
        acc += 2.0 * k
        np.multiply(k, dt, out=stage)
        stage += rho
        acc += gen(stage, tau + dt)
        acc *= dt / 6.0
        rho += acc

        tr = np.trace(rho)
        drift = abs(tr - 1.0)
        if drift > drift_limit:
            raise NumericalInvariantError(
                f"trace drift {drift:.3e} in one step at tau={tau + dt:.6g}; reduce dtau")
        skew = rho - rho.conj().T
        max_drift = max(max_drift, drift)
        max_herm = max(max_herm, float(np.max(np.abs(skew))))
        skew *= 0.5
        rho -= skew
        rho /= np.real(tr)

        leak = top_level_populations(rho, trunc)
        if leak_limit is not None and np.any(leak > leak_limit):
            raise TruncationLeakageError(
                f"top Fock level population {leak.max():.3e} > {leak_limit} "
                f"at tau={tau + dt:.6g} (mode {int(np.argmax(leak))}); raise the cutoff")

        if step % record_every == 0 or step == n_steps:
            yield record(rho0.tau + step * dt)
            max_drift = max_herm = 0.0


def evolve(rho0: DensityMatrix, h: Operator, diss: DissipatorSet, tau_end: float,
           dtau: float, record_every: int = 1, *, keep_snapshots: bool = False,
           **kwargs) -> EvolutionResult:
    """Run :func:`iter_evolve` to the end and collect the records."""
    return EvolutionResult.collect(
        iter_evolve(rho0, h, diss, tau_end, dtau, record_every, **kwargs), keep_snapshots)


def liouvillian(h: Operator, diss: DissipatorSet) -> np.ndarray:
    """Dense superoperator acting on row-major vec(rho)."""
    trunc = h.trunc
    d = trunc.dim
    eye = np.eye(d)
    hm = h.matrix
    sup = -1j * np.kron(hm, eye) + 1j * np.kron(eye, hm.T)
    for k in range(trunc.n_modes):
        b = annihilator(trunc, k).matrix
        bd = b.conj().T
        for rate, jump in ((diss.down[k], b), (diss.up[k], bd)):
            if not rate:
                continue
            jdj = jump.conj().T @ jump
            sup += rate * (np.kron(jump, jump.conj())
                           - 0.5 * np.kron(jdj, eye) - 0.5 * np.kron(eye, jdj.T))
    return sup


def exact_propagate(rho0: DensityMatrix, h: Operator, diss: DissipatorSet,
                    tau: float) -> DensityMatrix:
    """exp(L tau) applied to rho0 via scaling-and-squaring ``expm``."""
    _check_shapes(rho0, h, diss)
    d = rho0.trunc.dim
    if d > ORACLE_MAX_DIM:
        raise ValueError(f"dimension {d} too large for the exact propagator (max {ORACLE_MAX_DIM})")
    if tau == 0:
        return DensityMatrix(rho0.matrix.copy(), rho0.trunc, rho0.tau)
    prop = scipy.linalg.expm(liouvillian(h, diss) * tau)
    vec = prop @ rho0.matrix.reshape(-1)
    return DensityMatrix(vec.reshape(d, d), rho0.trunc, rho0.tau + tau)



def write_snapshot(path, rho: DensityMatrix) -> None:
    """Flat binary dump: int64 header (D, N, cutoffs...), then row-major
    (re, im) float64 pairs, all little-endian."""
    trunc = rho.trunc
    header = struct.pack(f"<qq{trunc.n_modes}q", trunc.dim, trunc.n_modes, *trunc.cutoffs)
    body = np.ascontiguousarray(rho.matrix, dtype="<c16").view("<f8")
    with Path(path).open("wb") as fh:
        fh.write(header)
        fh.write(body.tobytes())


def read_snapshot(path, tau: float = 0.0) -> DensityMatrix:
    raw = Path(path).read_bytes()
    d, n = struct.unpack_from("<qq", raw, 0)
    cutoffs = struct.unpack_from(f"<{n}q", raw, 16)
    offset = 16 + 8 * n
    data = np.frombuffer(raw, dtype="<f8", offset=offset)
    if data.size != 2 * d * d:
        raise ValueError("snapshot body size does not match its header")
    m = (data[0::2] + 1j * data[1::2]).reshape(d, d)
    return DensityMatrix(m, ModeTruncation(tuple(cutoffs)), tau)
