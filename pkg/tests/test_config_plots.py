import json
import xml.etree.ElementTree as ET

import pytest

from gufic.config import from_dict, load_config, scenario_dir, shipped_scenarios
from gufic.errors import ConfigError
from gufic.plots import plot_series, render_compare, render_plots, series_digest
from gufic.sim import simulate
from gufic.simlog import SimLog

from .conftest import FIXTURES


def circle_dict():
    return json.loads((scenario_dir() / "circle.json").read_text())


def test_shipped_scenarios_load():
    names = {p.stem for p in shipped_scenarios()}
    assert {"circle", "sphere", "sphere_lowtank"} <= names
    for p in shipped_scenarios():
        cfg = load_config(p)
        assert cfg.controller.kind == "gufic"
        assert cfg.timestep == 1e-3


def test_tank_settings_in_sphere_configs():
    s = load_config(scenario_dir() / "sphere.json").controller
    assert (s.impedance_tank.initial, s.impedance_tank.upper) == (90.0, 100.0)
    assert (s.force_tank.initial, s.force_tank.upper) == (10.0, 20.0)
    low = load_config(scenario_dir() / "sphere_lowtank.json").controller
    assert low.impedance_tank.initial == 10.0


def test_missing_tank_upper_names_the_field():
    d = circle_dict()
    del d["tanks"]["upper"]
    with pytest.raises(ConfigError, match="tanks.*upper"):
        from_dict(d)


def test_schema_errors_report_line_numbers(tmp_path):
    d = circle_dict()
    d["gains"]["zeta"] = -1.0
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d, indent=2))
    with pytest.raises(ConfigError, match=r"bad\.json:\d+: gains\.zeta"):
        load_config(p)


def test_tank_limits_are_checked():
    d = circle_dict()
    d["tanks"]["impedance"] = {"initial": 50.0}
    with pytest.raises(ConfigError, match="tanks"):
        from_dict(d)


def test_duration_rules():
    d = circle_dict()
    assert from_dict(dict(d, duration=0.0)).steps == 0
    with pytest.raises(ConfigError):
        from_dict(dict(d, duration=0.0004))


def test_controller_switch_uses_gic_gains():
    cfg = load_config(scenario_dir() / "circle.json").with_controller("gic")
    assert cfg.controller.kind == "gic" and cfg.controller.zeta == 0.0
    assert cfg.controller.impedance.stiffness.Kp[2, 2] == 1500.0


def test_zero_duration_run_gives_header_only_log(tmp_path):
    log = simulate(from_dict(dict(circle_dict(), duration=0.0)))
    assert len(log) == 0
    log.write_csv(tmp_path / "l.csv")
    assert len((tmp_path / "l.csv").read_text().splitlines()) == 2


def test_naive_fixture_is_valid():
    cfg = load_config(FIXTURES / "naive_sphere.json")
    assert cfg.controller.kind == "naive"


@pytest.fixture(scope="module")
def one_second_circle():
    return simulate(load_config(scenario_dir() / "circle.json").with_duration(1.0))


def test_plot_data_matches_golden_digest(one_second_circle):
    golden = json.loads((FIXTURES / "plot_digests.json").read_text())
    assert series_digest(plot_series(one_second_circle)) == golden["circle_gufic_1s"]


def test_render_plots_writes_four_svgs(one_second_circle, tmp_path):
    paths = render_plots(one_second_circle, tmp_path)
    assert sorted(p.name for p in paths) == ["force.svg", "psi.svg", "tanks.svg", "tracking.svg"]
    for p in paths:
        root = ET.parse(p).getroot()
        assert root.tag.endswith("svg")
        assert "<image" not in p.read_text()


def test_svg_output_is_reproducible(one_second_circle, tmp_path):
    a = render_plots(one_second_circle, tmp_path / "a")
    b = render_plots(one_second_circle, tmp_path / "b")
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()


def test_empty_log_writes_nothing(tmp_path, caplog):
    assert render_plots(SimLog(), tmp_path / "p") == []
    assert not (tmp_path / "p").exists()
    assert "empty log" in caplog.text


def test_compare_overlay(one_second_circle, tmp_path):
    paths = render_compare({"gufic": one_second_circle, "gic": one_second_circle}, tmp_path)
    assert [p.name for p in paths] == ["compare_force.svg", "compare_tracking.svg"]
    text = paths[0].read_text()
    assert "gufic" in text and "gic" in text
