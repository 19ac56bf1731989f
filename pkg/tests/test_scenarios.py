import math
from pathlib import Path

import pytest

from slowlight import (ConfigError, parse_experiment, render_experiment,
                       scenario, scenario_names, zeeman_phase)

GOLDEN_DIR = Path(__file__).resolve().parents[1] / "scenarios"


def golden_path(name: str) -> Path:
    stem = name
    if name.startswith("fig3_trace("):
        k = int(name[len("fig3_trace("):-1])
        stem = f"fig3_trace_{k:02d}"
    return GOLDEN_DIR / f"{stem}.cfg"


def test_names_cover_presets_and_traces():
    names = scenario_names()
    assert "fig2a" in names and "fig2b" in names and "slowlight" in names
    assert sum(1 for n in names if n.startswith("fig3_trace")) == 20


@pytest.mark.parametrize("name", scenario_names())
def test_every_preset_validates_clean(name):
    spec = scenario(name)
    assert spec.validate() == []


@pytest.mark.parametrize("name", scenario_names())
def test_presets_match_shipped_files(name):
    spec = scenario(name)
    text = golden_path(name).read_text(encoding="utf-8")
    assert render_experiment(spec) == text
    assert parse_experiment(text) == spec


def test_trace_phases_step_by_fifth_pi():
    for k in (0, 5, 13, 19):
        spec = scenario("fig3_trace", k=k)
        phi = zeeman_phase(spec.bfield, spec.grid.t_start, spec.grid.t_end,
                           spec.zeeman)
        assert phi == pytest.approx(0.2 * math.pi * k, abs=1e-9)


def test_trace_index_in_name_or_argument():
    assert scenario("fig3_trace(5)") == scenario("fig3_trace", k=5)
    with pytest.raises(ConfigError):
        scenario("fig3_trace(5)", k=5)
    with pytest.raises(ConfigError):
        scenario("fig3_trace")
    with pytest.raises(ConfigError):
        scenario("fig3_trace", k=20)
    with pytest.raises(ConfigError):
        scenario("fig3_trace", k=-1)


def test_unknown_name_rejected():
    with pytest.raises(ConfigError):
        scenario("fig9z")


def test_storage_field_pulse_area():
    spec = scenario("fig2a")
    area = spec.bfield.integral(spec.grid.t_start, spec.grid.t_end)
    assert area == pytest.approx(1.5, rel=1e-9)


def test_hold_preset_keeps_field_on_through_retrieval():
    spec = scenario("fig2b")
    assert spec.bfield.evaluate(spec.grid.t_end) == pytest.approx(0.05)
    assert spec.bfield.evaluate(0.0) == 0.0


def test_probe_stays_weak():
    for name in ("fig2a", "fig2b", "slowlight"):
        spec = scenario(name)
        assert spec.signal.maximum() / spec.control.maximum() < 0.3


def test_storage_presets_share_the_input_pulse():
    a, b = scenario("fig2a"), scenario("fig2b")
    assert a.signal == b.signal
    assert a.medium == b.medium
