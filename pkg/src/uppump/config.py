"""Experiment configuration: a sectioned key = value text file.

Mode and coupling sections use 1-based labels (``[mode.1]``, ``modes = 1 1 4``)
so the files read like the five-mode model they describe; the Python objects
use 0-based indices.  All physical values are in cm^-1 and kelvin.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .model import CubicCoupling, Mode, ModeSet, ModelConfig
from .spectral import CouplingKernel, SpectralProfile


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


DRIVE_SOURCES = ("literal", "computed", "time_dependent")
RATE_SOURCES = ("literal", "computed")
INITIAL_STATES = ("vacuum", "thermal")


@dataclass(frozen=True)
class RatesSettings:
    omega_min: float = 100.0
    omega_max: float = 480.0
    omega_step: float = 5.0
    drive_modes: tuple[int, ...] = (0, 1, 2)
    t_end: float = 2.0
    n_times: int = 2001
    workers: int = 1


@dataclass(frozen=True)
class IntegratorSettings:
    dtau: float = 5e-4
    tau_end: float = 10.0
    record_every: int = 200
    leak_limit: float = 1e-2
    max_dim: int = 20_000
    initial: str = "vacuum"
    snapshots: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    seed: int
    profile: SpectralProfile
    kernel: CouplingKernel
    model: ModelConfig
    rates: RatesSettings = field(default_factory=RatesSettings)
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    bath_file: str = ""
    drive_source: str = "literal"
    rate_source: str = "literal"
    drive_scale: float = 1.0
    coupling_scale: float = 1.0
    output_dir: str = "out"

    @property
    def temperature(self) -> float:
        return self.profile.temperature

    def with_seed(self, seed: int) -> ExperimentConfig:
        return replace(self, seed=int(seed))


def _num(x: float) -> str:
    return repr(float(x))


def _labels(indices) -> str:
    return " ".join(str(i + 1) for i in indices)


def emit(cfg: ExperimentConfig) -> str:
    """Serialise a config; ``parse(emit(cfg)) == cfg``."""
    cp = configparser.ConfigParser(interpolation=None)
    cp["run"] = {"name": cfg.name, "seed": str(cfg.seed), "output_dir": cfg.output_dir}
    cp["environment"] = {"temperature": _num(cfg.profile.temperature)}
    bath = {}
    for f in fields(SpectralProfile):
        if f.name == "temperature":
            continue
        v = getattr(cfg.profile, f.name)
        bath[f.name] = v if isinstance(v, str) else (str(v) if isinstance(v, int) else _num(v))
    bath["file"] = cfg.bath_file
    cp["bath"] = bath
    cp["kernel"] = {"strength": _num(cfg.kernel.strength), "width": _num(cfg.kernel.width)}
    r = cfg.rates
    cp["rates"] = {
        "omega_min": _num(r.omega_min), "omega_max": _num(r.omega_max),
        "omega_step": _num(r.omega_step), "drive_modes": _labels(r.drive_modes),
        "t_end": _num(r.t_end), "n_times": str(r.n_times), "workers": str(r.workers),
    }
    cp["model"] = {
        "pathway": cfg.model.pathway, "drive_source": cfg.drive_source,
        "rate_source": cfg.rate_source, "drive_scale": _num(cfg.drive_scale),
        "coupling_scale": _num(cfg.coupling_scale),
    }
    for k, m in enumerate(cfg.model.modes):
        sec = {"omega": _num(m.omega), "drive": _num(m.drive), "cutoff": str(m.cutoff)}
        if m.kappa is not None:
            sec["kappa"] = _num(m.kappa)
        else:
            sec["gamma"] = _num(m.gamma)
            sec["gamma_tilde"] = _num(m.gamma_tilde)
        cp[f"mode.{k + 1}"] = sec
    for k, c in enumerate(cfg.model.couplings):
        cp[f"coupling.{k + 1}"] = {"modes": _labels(c.modes), "g": _num(c.strength)}
    i = cfg.integrator
    cp["integrator"] = {
        "dtau": _num(i.dtau), "tau_end": _num(i.tau_end),
        "record_every": str(i.record_every), "leak_limit": _num(i.leak_limit),
        "max_dim": str(i.max_dim), "initial": i.initial,
        "snapshots": "true" if i.snapshots else "false",
    }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _get(sec, key, conv, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"[{sec.name}] is missing {key!r}")
        return default
    try:
        return conv(sec[key])
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] {key} = {sec[key]!r}: {exc}") from None


def _bool(s: str) -> bool:
    s = s.strip().lower()
    if s in ("true", "yes", "1", "on"):
        return True
    if s in ("false", "no", "0", "off"):
        return False
    raise ValueError("expected a boolean")


def _indices(s: str) -> tuple[int, ...]:
    out = tuple(int(x) - 1 for x in s.split())
    if any(i < 0 for i in out):
        raise ValueError("mode labels start at 1")
    return out


def _numbered(cp, prefix):
    secs = []
    for name in cp.sections():
        if name.startswith(prefix + "."):
            try:
                secs.append((int(name.split(".", 1)[1]), cp[name]))
            except ValueError:
                raise ConfigError(f"bad section name [{name}]") from None
    secs.sort(key=lambda t: t[0])
    labels = [n for n, _ in secs]
    if labels != list(range(1, len(secs) + 1)):
        raise ConfigError(f"[{prefix}.N] sections must be numbered 1..N, got {labels}")
    return [s for _, s in secs]


def parse(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    for name in ("run", "environment", "bath", "kernel", "model", "integrator"):
        if not cp.has_section(name):
            raise ConfigError(f"missing section [{name}]")
    run, env, bath, ker, mod, integ = (cp[n] for n in
                                       ("run", "environment", "bath", "kernel", "model", "integrator"))
    temperature = _get(env, "temperature", float)
    defaults = SpectralProfile()
    kw = {}
    for f in fields(SpectralProfile):
        if f.name == "temperature":
            continue
        conv = type(getattr(defaults, f.name))
        kw[f.name] = _get(bath, f.name, conv, getattr(defaults, f.name))
    profile = SpectralProfile(temperature=temperature, **kw)
    try:
        profile.validate()
        kernel = CouplingKernel(_get(ker, "strength", float), _get(ker, "width", float))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    rates = RatesSettings()
    if cp.has_section("rates"):
        rs = cp["rates"]
        rates = RatesSettings(
            _get(rs, "omega_min", float, rates.omega_min),
            _get(rs, "omega_max", float, rates.omega_max),
            _get(rs, "omega_step", float, rates.omega_step),
            _get(rs, "drive_modes", _indices, rates.drive_modes),
            _get(rs, "t_end", float, rates.t_end),
            _get(rs, "n_times", int, rates.n_times),
            _get(rs, "workers", int, rates.workers),
        )
        if rates.omega_step <= 0 or rates.omega_max < rates.omega_min or rates.n_times < 1:
            raise ConfigError("[rates] needs omega_step > 0, omega_max >= omega_min, n_times >= 1")

    def opt(sec, key):
        return _get(sec, key, float) if key in sec else None

    modes = []
    for sec in _numbered(cp, "mode"):
        try:
            modes.append(Mode(
                omega=_get(sec, "omega", float), cutoff=_get(sec, "cutoff", int),
                drive=_get(sec, "drive", float, 0.0), gamma=opt(sec, "gamma"),
                gamma_tilde=opt(sec, "gamma_tilde"), kappa=opt(sec, "kappa")))
        except ValueError as exc:
            raise ConfigError(f"[{sec.name}] {exc}") from None
    if not modes:
        raise ConfigError("no [mode.N] sections")
    couplings = []
    for sec in _numbered(cp, "coupling"):
        idx = _get(sec, "modes", _indices)
        if len(idx) != 3:
            raise ConfigError(f"[{sec.name}] needs three mode labels")
        couplings.append(CubicCoupling(idx, _get(sec, "g", float)))
    try:
        model = ModelConfig(ModeSet(tuple(modes), temperature), tuple(couplings),
                            _get(mod, "pathway", str, "full"))
    except (ValueError, IndexError) as exc:
        raise ConfigError(str(exc)) from None
    for k in rates.drive_modes:
        if k >= len(modes):
            raise ConfigError(f"[rates] drive_modes references missing mode {k + 1}")

    drive_source = _get(mod, "drive_source", str, "literal")
    rate_source = _get(mod, "rate_source", str, "literal")
    if drive_source not in DRIVE_SOURCES:
        raise ConfigError(f"drive_source must be one of {DRIVE_SOURCES}")
    if rate_source not in RATE_SOURCES:
        raise ConfigError(f"rate_source must be one of {RATE_SOURCES}")

    d = IntegratorSettings()
    integrator = IntegratorSettings(
        _get(integ, "dtau", float, d.dtau), _get(integ, "tau_end", float, d.tau_end),
        _get(integ, "record_every", int, d.record_every),
        _get(integ, "leak_limit", float, d.leak_limit),
        _get(integ, "max_dim", int, d.max_dim), _get(integ, "initial", str, d.initial),
        _get(integ, "snapshots", _bool, d.snapshots))
    if integrator.initial not in INITIAL_STATES:
        raise ConfigError(f"initial must be one of {INITIAL_STATES}")
    if integrator.dtau <= 0 or integrator.tau_end <= 0 or integrator.record_every < 1:
        raise ConfigError("[integrator] needs dtau > 0, tau_end > 0, record_every >= 1")

    drive_scale = _get(mod, "drive_scale", float, 1.0)
    coupling_scale = _get(mod, "coupling_scale", float, 1.0)
    if drive_scale <= 0 or coupling_scale < 0:
        raise ConfigError("drive_scale must be > 0 and coupling_scale >= 0")

    return ExperimentConfig(
        name=_get(run, "name", str, "experiment"), seed=_get(run, "seed", int),
        profile=profile, kernel=kernel, model=model, rates=rates,
        integrator=integrator, bath_file=bath.get("file", "").strip(),
        drive_source=drive_source, rate_source=rate_source,
        drive_scale=drive_scale, coupling_scale=coupling_scale,
        output_dir=_get(run, "output_dir", str, "out"))


def shipped_configs() -> list[str]:
    root = resources.files("uppump") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def load(name_or_path) -> ExperimentConfig:
    """Read a config file, or a shipped config by bare name (e.g. ``fig5_scaled``)."""
    path = Path(name_or_path)
    if path.exists():
        text = path.read_text()
    else:
        res = resources.files("uppump") / "configs" / f"{name_or_path}.ini"
        if not res.is_file():
            raise ConfigError(f"no config file or shipped config named {name_or_path!r}")
        text = res.read_text()
    return parse(text)
