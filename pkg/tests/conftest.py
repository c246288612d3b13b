from dataclasses import replace

import pytest

from uppump.config import emit, load
from uppump.model import ModeSet


def tiny_config(base="noshock_uncoupled", cutoffs=(2, 2, 2, 2, 2), temperature=None,
                drives=None, **integrator):
    """A shipped config shrunk to a few-second evolution."""
    cfg = load(base)
    modes = [replace(m, cutoff=c) for m, c in zip(cfg.model.modes, cutoffs)]
    if drives is not None:
        modes = [replace(m, drive=float(e)) for m, e in zip(modes, drives)]
    modeset = ModeSet(tuple(modes), cfg.model.modes.temperature)
    profile = cfg.profile
    if temperature is not None:
        profile = replace(profile, temperature=float(temperature))
        modeset = replace(modeset, temperature=float(temperature))
    integ = {"dtau": 0.02, "tau_end": 0.4, "record_every": 5, **integrator}
    return replace(cfg, profile=profile, model=replace(cfg.model, modes=modeset),
                   integrator=replace(cfg.integrator, **integ))


@pytest.fixture
def write_config(tmp_path):
    def write(cfg, name="cfg.ini"):
        path = tmp_path / name
        path.write_text(emit(cfg))
        return str(path)
    return write


@pytest.fixture
def tiny():
    return tiny_config


_CRITERIA: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def criterion():
    """Record and assert one acceptance criterion; the verdicts are listed
    at the end of the session."""
    def check(number: int, ok: bool, detail: str):
        ok = bool(ok)
        _CRITERIA.setdefault(number, []).append((ok, detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return check


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entries = _CRITERIA[number]
        ok = all(e[0] for e in entries)
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  "
                                    + entries[0][1])
        for _, detail in entries[1:]:
            terminalreporter.write_line(" " * 20 + detail)
