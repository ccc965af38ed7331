from __future__ import annotations

import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from fanoperiods.catalog import Catalog, load_catalog
from fanoperiods.cli import export_records, main, read_export, render_export


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_period_regularized():
    code, text = run("period", "1", "--order", "12", "--regularized")
    lines = text.split()
    assert code == 0 and len(lines) == 13
    assert lines[4] == "24" and lines[8] == "2520"


def test_period_p1_prints_rationals():
    assert run("period", "P1", "--order", "4")[1].split() == ["1", "0", "1", "0", "1/4"]


def test_period_json():
    code, text = run("period", "P1", "--order", "2", "--json", "--no-timing")
    assert json.loads(text) == {"id": "P1", "minkowski_id": None, "coefficients": ["1", "0", "1"],
                                "regularized": False}


def test_unknown_id_is_usage_error(capsys):
    assert run("period", "bogus")[0] == 2
    assert "bogus" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as err:
        main(["period", "1", "--order", "-3"])
    assert err.value.code == 2


def test_verify_rows():
    code, text = run("verify", "2-21", "--no-timing")
    assert code == 0 and text.splitlines() == ["PASS 2-21 (to t^9)", "1/1 pass"]


def test_verify_filter_and_bad_filter():
    code, text = run("verify", "--filter", "rank=10", "--no-timing", "--json")
    assert code == 0 and json.loads(text)["total"] == 1
    assert run("verify", "--filter", "shape=round")[0] == 2


def test_verify_corrupted_catalog(tmp_path, monkeypatch):
    data = json.loads(load_catalog().to_json())
    for rec in data["families"]:
        if rec["id"] == "2-21":
            rec["expected_regularized"][4] = str(Fraction(rec["expected_regularized"][4]) + 7)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    monkeypatch.setenv("FANO_CATALOG", str(path))
    code, text = run("verify", "2-21", "--no-timing")
    assert code == 1
    assert text.startswith("FAIL 2-21 at degree 4")


def test_missing_catalog_is_usage_error(tmp_path, monkeypatch):
    monkeypatch.setenv("FANO_CATALOG", str(tmp_path / "absent.json"))
    assert run("verify", "1")[0] == 2


def test_compare():
    assert run("compare", "1", "p3_mirror.json", "--order", "12") == (0, "MATCH 1 to order 12\n")
    code, text = run("compare", "2", "p3_mirror.json", "--order", "12")
    assert code == 1 and text.startswith("MISMATCH 2 at degree 3")
    assert run("compare", "1", "p3_mirror.json", "--order", "0")[0] == 0


def test_compare_reads_files(tmp_path):
    path = tmp_path / "cube.json"
    path.write_text(json.dumps({"terms": [{"e": e, "c": "1"} for e in
                                          ([1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1])]}))
    assert run("compare", "3-27", str(path))[0] == 0
    assert run("compare", "3-27", str(tmp_path / "nope.json"))[0] == 2


def test_pf():
    code, text = run("pf", "1")
    assert code == 0
    assert text.splitlines()[-1] == "manifold type"
    code, text = run("pf", "1", "--max-ord", "1", "--max-deg", "1")
    assert code == 1 and "none found" in text
    code, text = run("pf", "P1", "--json", "--no-timing")
    body = json.loads(text)
    assert body["order"] == 1 and body["annihilates"] and body["manifold_type"]


def test_export_round_trip(tmp_path):
    cat = load_catalog()
    records = export_records(cat, 6)
    for fmt in ("csv", "json"):
        text = render_export(records, fmt, timing=False)
        back = read_export(text, fmt)
        assert [(r.id, r.minkowski_id, r.coefficients) for r in back] == \
            [(r.id, r.minkowski_id, r.coefficients) for r in records]
    csv_text = render_export(records, "csv")
    lines = csv_text.splitlines()
    assert lines[0] == "id,minkowski_id," + ",".join(f"c{d}" for d in range(7))
    assert len(lines) == 117
    out = tmp_path / "periods.json"
    assert run("export", "--format", "json", "--order", "3", "--out", str(out))[0] == 0
    assert len(json.loads(out.read_text())) == 116


def test_output_is_deterministic():
    first = run("export", "--format", "json", "--order", "4", "--no-timing")[1]
    assert first == run("export", "--format", "json", "--order", "4", "--no-timing")[1]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fanoperiods", "period", "P2", "--order", "3"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.split() == ["1", "0", "0", "1"]
