"""Config-driven experiment runs behind the ``spectra``, ``rates`` and
``evolve`` subcommands.

Each run writes delimited text into an output directory.  The evolution
splits the modes into groups that no active coupling connects; such groups
stay in a product state, so each is propagated on its own (much smaller)
Fock space and the per-mode observables are recombined row by row.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .lindblad import DensityMatrix, DissipatorSet, iter_evolve, write_snapshot
from .model import ModelConfig, build_hamiltonian, coupling_clusters, restrict_couplings
from .rates import compute_dissipation_rates, drive_values, rate_profile
from .spectral import BathSpectra, bose_einstein, generate_bath

log = logging.getLogger(__name__)


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _out_dir(cfg: ExperimentConfig, out_dir=None) -> Path:
    root = Path(out_dir if out_dir is not None else cfg.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    return root


def load_bath(cfg: ExperimentConfig) -> BathSpectra:
    """The bath named by ``[bath] file`` or, without one, a seeded draw."""
    if cfg.bath_file:
        return BathSpectra.from_csv(cfg.bath_file, cfg.temperature,
                                    cfg.profile.debye_cutoff, cfg.seed)
    return generate_bath(cfg.seed, cfg.profile)


# -- spectra -----------------------------------------------------------------

@dataclass
class SpectraResult:
    bath: BathSpectra
    path: Path

    @property
    def summary(self) -> str:
        return (f"total modes (integral of S) = {self.bath.total_modes():.6g} "
                f"over {self.bath.size} nodes up to {self.bath.grid[-1]:g} cm^-1")


def run_spectra(cfg: ExperimentConfig, out_dir=None) -> SpectraResult:
    root = _out_dir(cfg, out_dir)
    bath = load_bath(cfg)
    path = root / "bath.csv"
    bath.to_csv(path)
    return SpectraResult(bath, path)


# -- rates -------------------------------------------------------------------

@dataclass
class RatesResult:
    table: np.ndarray
    drives: dict[int, np.ndarray]
    paths: list[Path]


def sweep_frequencies(cfg: ExperimentConfig) -> np.ndarray:
    r = cfg.rates
    n = int(np.floor((r.omega_max - r.omega_min) / r.omega_step + 1e-9)) + 1
    return r.omega_min + r.omega_step * np.arange(n)


def run_rates(cfg: ExperimentConfig, out_dir=None, workers: int | None = None) -> RatesResult:
    """Frequency sweep of (E0, gamma, gamma_tilde) plus E_k(t) of chosen modes.

    Drive times are in 1/cm^-1 (angular frequency times t is dimensionless).
    """
    root = _out_dir(cfg, out_dir)
    bath = load_bath(cfg)
    workers = cfg.rates.workers if workers is None else workers
    table = rate_profile(bath, cfg.kernel, sweep_frequencies(cfg), workers=workers)
    paths = [root / "rates.csv"]
    _write_rows(paths[0], ("Omega", "E0", "gamma", "gamma_tilde"), table)

    times = np.linspace(0.0, cfg.rates.t_end, cfg.rates.n_times)
    drives = {}
    for k in cfg.rates.drive_modes:
        omega = cfg.model.modes[k].omega
        series = np.column_stack([times, drive_values(bath, cfg.kernel, omega, times)])
        drives[k] = series
        path = root / f"drive_{k + 1}.csv"
        _write_rows(path, ("t", f"E_{k + 1}"), series)
        paths.append(path)
    return RatesResult(table, drives, paths)


# -- evolve ------------------------------------------------------------------

def observable_header(n_modes: int) -> list[str]:
    return (["tau"] + [f"n{k + 1}" for k in range(n_modes)]
            + ["trace_drift", "min_eig", "purity"]
            + [f"leak{k + 1}" for k in range(n_modes)])


def effective_model(cfg: ExperimentConfig, bath: BathSpectra | None = None) -> ModelConfig:
    """Model actually evolved: rate/drive sources, scale factors and pathway applied.

    ``computed`` sources take the bath-derived value for every doorway mode
    (frequency below twice the Debye cutoff) that has bath rates; modes with
    a ``kappa`` channel and non-doorway drives keep their literal values.
    With the ``time_dependent`` source the static drive is zero and the
    bath-derived series is supplied separately by :func:`drive_schedule`.
    """
    model = cfg.model
    modes = list(model.modes)
    doorway = model.modes.doorway(cfg.profile.debye_cutoff)
    needs_bath = cfg.rate_source == "computed" or cfg.drive_source == "computed"
    if needs_bath and bath is None:
        bath = load_bath(cfg)
    for k, m in enumerate(modes):
        drive = m.drive
        if cfg.drive_source == "computed" and doorway[k]:
            drive = float(drive_values(bath, cfg.kernel, m.omega, [0.0])[0])
        elif cfg.drive_source == "time_dependent":
            drive = 0.0
        m = replace(m, drive=drive * cfg.drive_scale)
        if cfg.rate_source == "computed" and doorway[k] and not m.phenomenological:
            pair = compute_dissipation_rates(bath, cfg.kernel, m.omega, k)
            m = replace(m, gamma=pair.down, gamma_tilde=pair.up)
        modes[k] = m
    couplings = tuple(replace(c, strength=c.strength * cfg.coupling_scale)
                      for c in model.active_couplings())
    return ModelConfig(replace(model.modes, modes=tuple(modes)), couplings, "full")


def drive_schedule(cfg: ExperimentConfig, bath: BathSpectra | None = None):
    """Callable ``tau -> per-mode drive / unit`` for the time-dependent source.

    The bath sum is tabulated on the half-step grid the integrator visits and
    interpolated linearly in between.
    """
    if cfg.drive_source != "time_dependent":
        return None
    bath = load_bath(cfg) if bath is None else bath
    modes = cfg.model.modes
    unit = modes.unit
    doorway = modes.doorway(cfg.profile.debye_cutoff)
    n_steps = max(1, int(round(cfg.integrator.tau_end / cfg.integrator.dtau)))
    taus = np.linspace(0.0, cfg.integrator.tau_end, 2 * n_steps + 1)
    table = np.zeros((len(modes), taus.size))
    for k, m in enumerate(modes):
        if doorway[k]:
            table[k] = drive_values(bath, cfg.kernel, m.omega, taus / unit)
    table *= cfg.drive_scale / unit

    def drive(tau):
        return np.array([np.interp(tau, taus, row) for row in table])
    return drive


def _initial_state(cfg: ExperimentConfig, model: ModelConfig, trunc, cluster) -> DensityMatrix:
    if cfg.integrator.initial == "vacuum":
        return DensityMatrix.vacuum(trunc)
    t = model.modes.temperature
    occ = [bose_einstein(model.modes[k].omega, t) if t > 0 else 0.0 for k in cluster]
    return DensityMatrix.thermal(trunc, occ)


def _product_min_eig(bounds) -> float:
    """Smallest eigenvalue of a tensor product from each factor's (min, max)."""
    lo = hi = 1.0
    for a, b in bounds:
        cands = (lo * a, lo * b, hi * a, hi * b)
        lo, hi = min(cands), max(cands)
    return lo


@dataclass
class EvolveResult:
    rows: np.ndarray
    header: list[str]
    clusters: list[tuple[int, ...]]
    dims: list[int]
    hermiticity_drift: np.ndarray
    path: Path
    finals: list[DensityMatrix]


def run_evolve(cfg: ExperimentConfig, out_dir=None, progress=None) -> EvolveResult:
    """Propagate the effective model and write ``observables.csv``.

    Rows are written as soon as every coupling group has reached the record
    time.  Raises :class:`~uppump.lindblad.NumericalInvariantError` (or its
    leakage subclass) when a guard trips; rows up to that point stay on disk.
    """
    root = _out_dir(cfg, out_dir)
    needs_bath = cfg.drive_source != "literal" or cfg.rate_source != "literal"
    bath = load_bath(cfg) if needs_bath else None
    model = effective_model(cfg, bath)
    drive = drive_schedule(cfg, bath)
    integ = cfg.integrator
    modes = model.modes
    n = len(modes)
    unit = modes.unit

    clusters = coupling_clusters(n, model.couplings)
    streams, dims = [], []
    for cluster in clusters:
        sub = modes.subset(cluster)
        trunc = sub.truncation(integ.max_dim)
        h = build_hamiltonian(sub, restrict_couplings(model.couplings, cluster), trunc, unit)
        diss = DissipatorSet.from_modes(sub, unit)
        sub_drive = None
        if drive is not None:
            idx = list(cluster)
            sub_drive = lambda tau, idx=idx: drive(tau)[idx]  # noqa: E731
        rho0 = _initial_state(cfg, model, trunc, cluster)
        streams.append(iter_evolve(rho0, h, diss, integ.tau_end, integ.dtau, integ.record_every,
                                   drive=sub_drive, leak_limit=integ.leak_limit))
        dims.append(trunc.dim)
    log.info("coupling groups %s with dimensions %s", clusters, dims)

    header = observable_header(n)
    path = root / "observables.csv"
    snap_dir = root / "snapshots"
    if integ.snapshots:
        snap_dir.mkdir(exist_ok=True)
    rows, herms = [], []
    finals = [None] * len(clusters)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for index, recs in enumerate(zip(*streams)):
            pops = np.empty(n)
            leak = np.empty(n)
            for cluster, r in zip(clusters, recs):
                pops[list(cluster)] = r.populations
                leak[list(cluster)] = r.leakage
            row = [recs[0].tau, *pops,
                   max(r.trace_drift for r in recs),
                   _product_min_eig([(r.min_eig, r.max_eig) for r in recs]),
                   float(np.prod([r.purity for r in recs])), *leak]
            w.writerow([_fmt(v) for v in row])
            fh.flush()
            rows.append(row)
            herms.append(max(r.hermiticity_drift for r in recs))
            for c, r in enumerate(recs):
                finals[c] = r.state
                if integ.snapshots:
                    write_snapshot(snap_dir / f"rho_{index:05d}_g{c + 1}.bin", r.state)
            if progress is not None:
                progress(recs[0].tau)
    return EvolveResult(np.array(rows), header, clusters, dims, np.array(herms), path, finals)
