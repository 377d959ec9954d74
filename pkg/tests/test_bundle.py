import json

import pytest

from modec.bundle import (
    BundleError,
    bundle_from_json,
    bundle_to_json,
    candidate_factors,
    load_bundle,
    load_elliptic_table,
    save_bundle,
)

from conftest import LEVEL36, X011


def test_level36_summary(level36):
    s = level36.summary()
    assert (s["level"], s["index"], s["genus"]) == (36, 108, 6)
    assert len(s["cusps"]) == 3 and s["widths"] == [36, 36, 36]
    assert s["has_jmap"]


def test_x011_model_checks_exactly(x011):
    x011.check_model()
    assert x011.genus == 1 and x011.cusp_widths() == [1, 11]


def test_malformed_file_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"level": 11,\n "index": }')
    with pytest.raises(BundleError, match="line 2 column"):
        load_bundle(p)


def _raw(path):
    with open(path) as fh:
        return json.load(fh)


def test_tampered_width_is_rejected():
    d = _raw(X011)
    d["cusps"][1]["width"] = 10
    with pytest.raises(BundleError, match="width"):
        bundle_from_json(d).validate()


def test_tampered_model_coefficient_is_rejected():
    d = _raw(X011)
    term = d["model"][0][0]
    term[1] = str(int(term[1]) + 1)
    with pytest.raises(BundleError, match="does not vanish"):
        bundle_from_json(d).validate()


def test_tampered_form_coefficient_is_rejected():
    # a constant term makes the form a non-cusp form
    d = _raw(X011)
    s = d["forms"][0][0]
    s["valuation"] = 0
    s["coeffs"] = [["1/1"] + ["0/1"] * 9] + s["coeffs"]
    with pytest.raises(BundleError, match="not a cusp form"):
        bundle_from_json(d).validate(check_model=False)


def test_missing_key():
    d = _raw(X011)
    del d["cusps"]
    with pytest.raises(BundleError, match="missing key"):
        bundle_from_json(d)


def test_save_load_round_trip(tmp_path, x011):
    p = tmp_path / "x.json"
    save_bundle(x011, p)
    again = load_bundle(p)
    assert bundle_to_json(again) == bundle_to_json(x011)


def test_table_comments_and_errors(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text('# comment\n\n{"label": "11.a3", "ainvs": [0, -1, 1, 0, 0], "conductor": 11, "rank": 0}\n')
    (rec,) = load_elliptic_table(p)
    assert rec.isogeny_class == "11.a"
    p.write_text('{"label": "bad", "ainvs": [0, 0, 0, 0, 0], "conductor": 1, "rank": 0}\n')
    with pytest.raises(BundleError, match="singular"):
        load_elliptic_table(p)


def test_candidates_level36(level36, table):
    assert candidate_factors(level36, table) == [("432.f", 1)]


def test_candidates_empty_table(level36):
    assert candidate_factors(level36, []) == []


def test_candidates_monotone_in_pmax(x011, table):
    small = dict(candidate_factors(x011, table, pmax=3))
    large = dict(candidate_factors(x011, table, pmax=13))
    assert set(large) <= set(small)
    assert all(large[c] <= small[c] for c in large)
