from dataclasses import replace

import pytest

from uppump.config import ConfigError, emit, load, parse, shipped_configs

SHIPPED = shipped_configs()

BROKEN = {
    "missing section": ("[kernel]", "[kern]"),
    "bad pathway": ("pathway = full", "pathway = C"),
    "bad number": ("strength = 0.36", "strength = abc"),
    "two rate sources": ("cutoff = 11\nkappa = 24.0", "cutoff = 11\nkappa = 24.0\ngamma = 1.0"),
    "coupling to missing mode": ("modes = 2 3 5", "modes = 2 3 6"),
    "zero label": ("modes = 2 3 5", "modes = 0 3 5"),
    "gap in mode labels": ("[mode.5]", "[mode.7]"),
    "bad drive source": ("drive_source = literal", "drive_source = guessed"),
    "bad initial state": ("initial = vacuum", "initial = coherent"),
    "negative dtau": ("dtau = 0.01", "dtau = -0.01"),
    "negative temperature": ("temperature = 400.0", "temperature = -4.0"),
    "bad boolean": ("snapshots = false", "snapshots = maybe"),
    "negative rate": ("cutoff = 11\nkappa = 24.0", "cutoff = 11\nkappa = -24.0"),
    "zero cutoff": ("cutoff = 11", "cutoff = 0"),
    "negative coupling scale": ("coupling_scale = 0.0", "coupling_scale = -1.0"),
    "drive mode out of range": ("drive_modes = 1 2 3", "drive_modes = 1 2 9"),
}


def test_expected_configs_ship():
    assert {"fig5_scaled", "fig6_scaled", "noshock", "paper_bath"} <= set(SHIPPED)


@pytest.mark.parametrize("name", SHIPPED)
def test_round_trip(name):
    cfg = load(name)
    assert parse(emit(cfg)) == cfg
    assert emit(parse(emit(cfg))) == emit(cfg)


def test_round_trip_variants():
    cfg = load("fig5_scaled")
    variants = [cfg.with_seed(99), replace(cfg, drive_source="time_dependent"),
                replace(cfg, bath_file="some/bath.csv", output_dir="x y"),
                replace(cfg, integrator=replace(cfg.integrator, initial="thermal",
                                                snapshots=True, dtau=1 / 3))]
    for v in variants:
        assert parse(emit(v)) == v


def test_load_by_path_matches_name(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(emit(load("noshock")))
    assert load(path) == load("noshock")
    assert load(str(path)) == load("noshock")


def test_unknown_config():
    with pytest.raises(ConfigError):
        load("no_such_config")


def test_inline_comments_and_labels():
    text = emit(load("noshock_uncoupled")).replace("g = 8.4", "g = 8.4  # cm^-1")
    cfg = parse(text)
    assert cfg.model.couplings[2].strength == 8.4
    assert cfg.model.couplings[2].modes == (1, 2, 4)
    assert cfg.model.couplings[0].modes == (0, 0, 3)
    assert cfg.temperature == 400.0 == cfg.model.modes.temperature


@pytest.mark.parametrize("case", sorted(BROKEN))
def test_broken_configs_raise(case):
    old, new = BROKEN[case]
    text = emit(load("noshock_uncoupled"))
    assert old in text
    with pytest.raises(ConfigError):
        parse(text.replace(old, new, 1))


def test_garbage_is_a_config_error():
    with pytest.raises(ConfigError):
        parse("this is not = [an ini")
    with pytest.raises(ConfigError):
        parse("")
