import json
import xml.etree.ElementTree as ET

import pytest

from beltrami_scope.disc_index import compute_slk
from beltrami_scope.synthetic import synthesize_disc_field
from scripts.cli import main
from scripts.render import render_disc
from scripts.report import parse_report


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_index_of_the_tight_lundquist_tube(capsys):
    code, out = _run(capsys, "index", "--builtin", "lundquist", "--no-orbits", "--no-timestamp")
    assert code == 0
    doc = json.loads(out.out)
    assert doc["index"]["slk"]["slk"] == -1
    assert doc["index"]["index"] == 0
    assert doc["index"]["verdict"] == "Inconclusive"
    assert doc["oracle"]["slk"] == -1
    assert doc["created_at"] is None
    assert "Index = 0" in out.err


def test_meridional_boundary_forces_an_orbit(capsys):
    code, out = _run(capsys, "index", "--builtin", "lundquist", "--R", "3.83170597", "--no-orbits", "--no-timestamp")
    assert code == 0
    report = json.loads(out.out)["index"]
    assert report["boundary"]["kind"] == "MeridionalFoliation"
    assert report["index"] == 1
    assert report["verdict"] == "OrbitForced"


def test_twisted_tube_index_is_withheld(capsys):
    code, out = _run(capsys, "index", "--builtin", "twisted-tube", "--no-orbits", "--no-timestamp")
    assert code == 4
    report = json.loads(out.out)["index"]
    assert report["verdict"] is None
    assert report["beltrami"]["passed"] is False
    assert report["slk"]["slk"] == -1


def test_missing_grid_is_invalid_input(capsys, tmp_path):
    code, out = _run(capsys, "slk", "--grid", str(tmp_path / "absent.bsg"))
    assert code == 2
    assert "GridFormatError" in out.err


def test_source_flags_are_exclusive(capsys, tmp_path):
    code, _ = _run(capsys, "slk")
    assert code == 2
    code, _ = _run(capsys, "slk", "--builtin", "twisted-tube", "--grid", str(tmp_path / "x.bsg"))
    assert code == 2


def test_reports_are_deterministic(capsys, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for path in (first, second):
        code, _ = _run(capsys, "index", "--builtin", "lundquist", "--no-orbits", "--no-timestamp", "--out", str(path))
        assert code == 0
    assert first.read_bytes() == second.read_bytes()


def test_timestamp_is_written_by_default(capsys, tmp_path):
    path = tmp_path / "stamped.json"
    code, _ = _run(capsys, "check-beltrami", "--builtin", "lundquist", "--out", str(path))
    assert code == 0
    assert parse_report(path.read_text()).created_at is not None


def test_config_echo_replays_the_run(capsys, tmp_path):
    first = tmp_path / "first.json"
    _run(capsys, "slk", "--builtin", "lundquist", "--scale", "-1", "--bump", "0.1", "--no-timestamp", "--out", str(first))
    doc = parse_report(first.read_text())
    config = tmp_path / "config.json"
    config.write_text(doc.config.model_dump_json())

    second = tmp_path / "second.json"
    code, _ = _run(capsys, "slk", "--config", str(config), "--no-timestamp", "--out", str(second))
    assert code == 0
    assert first.read_bytes() == second.read_bytes()
    assert doc.slk.slk == 1


def test_check_beltrami_rejects_the_disc_fixture(capsys):
    code, out = _run(capsys, "check-beltrami", "--builtin", "figure-five", "--no-timestamp")
    assert code == 4
    assert json.loads(out.out)["beltrami"]["passed"] is False


def test_boundary_command(capsys):
    code, out = _run(capsys, "boundary", "--builtin", "twisted-tube", "--R", "2.5", "--no-timestamp")
    assert code == 0
    assert json.loads(out.out)["boundary"]["kind"] == "TransversalExists"


def test_render_figure_five(capsys, tmp_path):
    svg_path = tmp_path / "five.svg"
    code, out = _run(capsys, "render", "--builtin", "figure-five", "--render-out", str(svg_path), "--no-timestamp")
    assert code == 0
    svg = svg_path.read_text()
    ET.fromstring(svg)
    assert "slk = -3" in svg
    assert "index = -2" in svg
    assert "rest points = 5" in svg
    assert json.loads(out.out)["slk"]["slk"] == -3


def test_render_is_deterministic(capsys, tmp_path):
    paths = [tmp_path / "one.svg", tmp_path / "two.svg"]
    for path in paths:
        _run(capsys, "render", "--builtin", "twisted-tube", "--render-out", str(path), "--no-timestamp")
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_exported_grid_feeds_the_disc_count(capsys, tmp_path):
    grid = tmp_path / "tube.bsg"
    code, _ = _run(capsys, "export-grid", "--builtin", "twisted-tube", "--grid-out", str(grid))
    assert code == 0
    code, out = _run(capsys, "slk", "--grid", str(grid), "--no-oracle", "--no-timestamp")
    assert code == 0
    doc = json.loads(out.out)
    assert doc["slk"]["slk"] == -1
    assert doc["config"]["field"]["kind"] == "grid"

    code, _ = _run(capsys, "export-grid", "--grid", str(grid), "--grid-out", str(tmp_path / "again.bsg"))
    assert code == 2


def test_calibrate(capsys):
    code, out = _run(capsys, "calibrate", "--resolutions", "64", "97", "--no-timestamp")
    assert code == 0
    calibration = json.loads(out.out)["calibration"]
    assert calibration["s_star"] == -1
    assert calibration["stable"]


def test_schema(capsys):
    code, out = _run(capsys, "schema")
    assert code == 0
    assert "RunConfig" in json.loads(out.out)["title"]


@pytest.mark.parametrize("command", ["index", "slk", "boundary"])
def test_non_positive_metric_factor_is_rejected(capsys, command):
    code, _ = _run(capsys, command, "--builtin", "twisted-tube", "--metric-factor", "0", "--no-timestamp")
    assert code == 2


def test_index_with_a_missing_grid(capsys, tmp_path):
    code, _ = _run(capsys, "index", "--grid", str(tmp_path / "missing.bsg"))
    assert code == 2


def test_report_round_trips(capsys, tmp_path):
    path = tmp_path / "r.json"
    _run(capsys, "index", "--builtin", "lundquist", "--no-orbits", "--out", str(path))
    text = path.read_text()
    doc = parse_report(text)
    assert parse_report(doc.to_json()) == doc
    assert doc.to_json() + "\n" == text
    assert isinstance(json.loads(text)["index"]["index"], int)


def test_render_without_rest_points(tight_chart, flat_disc, flat):
    field = synthesize_disc_field([], tight_chart)
    slk = compute_slk(field, flat_disc, flat[0], require_transverse=False)
    svg = render_disc(field, flat_disc, flat[0], slk, None)
    ET.fromstring(svg)
    assert "slk = 0" in svg
    assert "index = n/a" in svg
    assert "rest points = 0" in svg
    assert 'href="http' not in svg
