import json
from fractions import Fraction

import pytest

from modec.bundle import group_classes
from modec.cli import PipelineConfig, build_parser, cmd_candidates, cmd_find_map, cmd_init, main, write_report

from conftest import LEVEL36, X011


def test_parser_defaults():
    args = build_parser().parse_args(["find-map", str(X011)])
    assert args.precmult == 1 and not args.ignore_base and not args.verbose
    assert args.num_mats == 20 and args.prime_bound == 400


def test_config_defaults():
    c = PipelineConfig()
    assert (c.precmult, c.ignore_base, c.verbose, c.num_mats) == (1, False, False, 20)
    with pytest.raises(ValueError):
        PipelineConfig(precmult=Fraction(1, 2))


def test_precmult_scales_working_precision(level36):
    assert PipelineConfig(precmult=Fraction(3, 2)).working_prec(level36) == 204
    from modec.qexp import PrecisionError

    with pytest.raises(PrecisionError):
        PipelineConfig(precmult=5).working_prec(level36)


def test_init_summary():
    s = cmd_init(LEVEL36)
    assert (s["level"], s["index"], s["genus"], len(s["cusps"])) == (36, 108, 6, 3)


def test_init_malformed_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{")
    assert main(["init", str(p)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_candidates_empty_table(tmp_path, x011):
    t = tmp_path / "empty.jsonl"
    t.write_text("# nothing\n")
    assert cmd_candidates(x011, t) == []


def _run(argv, tmp_path, name="r.json"):
    out = tmp_path / name
    code = main(argv + ["-o", str(out)])
    return code, json.loads(out.read_text())


def test_find_map_x011(tmp_path):
    code, rep = _run(["find-map", str(X011)], tmp_path)
    assert code == 0 and rep["status"] == "map certified"
    assert rep["degree"] == 1 and rep["optimal_curve"] == "11.a2"
    assert rep["certificate"]["passed"]


def test_rat_pts_from_saved_map(tmp_path):
    _, rep = _run(["find-map", str(X011)], tmp_path, "map.json")
    code, pts = _run(["rat-pts", str(X011), "--map", str(tmp_path / "map.json")], tmp_path)
    assert code == 0
    # five points of E(Q) pulled back; X0(11)(Q) has five points
    assert len(pts["point_report"]["points"]) == 5
    assert pts["status"] in ("success", "indeterminate")


def test_reports_are_deterministic(tmp_path):
    _, a = _run(["find-map", str(X011), "--seed", "3"], tmp_path, "a.json")
    _, b = _run(["find-map", str(X011), "--seed", "3"], tmp_path, "b.json")
    a.pop("timings"), b.pop("timings")
    assert a == b


def test_ignore_base(tmp_path):
    code, rep = _run(["find-map", str(X011), "--ignore-base"], tmp_path)
    assert code == 0 and rep["ignore_base"] and rep["base_point"] is None


def test_absent_class_fails_isolation(tmp_path):
    code, rep = _run(["find-map", str(X011), "--class", "27.a"], tmp_path)
    assert code == 1 and rep["status"] == "failed"
    assert any("HeckeError" in n for n in rep["notes"])


def test_find_map_requires_classes(x011):
    with pytest.raises(RuntimeError, match="no candidate"):
        cmd_find_map(x011, {}, {}, PipelineConfig())


def test_write_report_is_atomic(tmp_path):
    p = tmp_path / "out.json"
    write_report({"a": 1}, p)
    assert json.loads(p.read_text()) == {"a": 1}
    assert [f.name for f in tmp_path.iterdir()] == ["out.json"]
