import json

import numpy as np
import pytest

from fracmt import ScanReport, emit_report


def test_empty_scan_is_header_only():
    assert ScanReport(("eps", "value")).to_csv() == "eps,value\n"


def test_json_round_trip_bit_identical():
    x = 0.1 + 0.2
    rep = ScanReport(("eps", "value"), [(1e-8, x)])
    back = ScanReport.from_json(rep.to_json())
    assert back.rows[0][1] == x and back.rows[0][0] == 1e-8


def test_csv_and_json_agree():
    rng = np.random.default_rng(0)
    rep = ScanReport(("a", "b", "label"))
    for _ in range(5):
        rep.append(float(rng.normal()), np.float64(rng.normal()) * 1e-30, "growing")
    doc = json.loads(rep.to_json())
    csv_rows = ScanReport.from_csv(rep.to_csv()).rows
    for row, obj in zip(csv_rows, doc["rows"]):
        assert row[0] == obj["a"] and row[1] == obj["b"] and row[2] == obj["label"]


def test_row_width_checked():
    rep = ScanReport(("a", "b"))
    with pytest.raises(ValueError):
        rep.append(1.0)
    with pytest.raises(ValueError):
        ScanReport(("a",), [(1.0, 2.0)])


def test_nonfinite_meta_serializes():
    rep = ScanReport(("a",), meta={"gap": float("nan"), "n": np.int64(3)})
    doc = json.loads(rep.to_json())
    assert doc["meta"] == {"gap": "nan", "n": 3}


def test_emit_to_path_and_stdout(tmp_path, capsys):
    rep = ScanReport(("q", "ratio"), [(2.0, 0.5)])
    path = tmp_path / "r.json"
    assert emit_report(rep, "json", path) == path
    assert json.loads(path.read_text())["rows"] == [{"q": 2.0, "ratio": 0.5}]
    assert emit_report(rep, "csv") is None
    assert capsys.readouterr().out == "q,ratio\n2,0.5\n"
    with pytest.raises(ValueError):
        emit_report(rep, "xml")
