from __future__ import annotations

import json
import pickle
from fractions import Fraction

import pytest

from fanoperiods import catalog as catalog_module
from fanoperiods.catalog import (
    Catalog, CatalogError, ClosedForm, FamilyRecord, UnknownFamilyError, construction_from_dict,
    load_catalog, parse_filter,
)
from fanoperiods.engines import product_period
from fanoperiods.series import regularize


@pytest.fixture(scope="module")
def cat():
    return load_catalog()


def corrupted(cat: Catalog, family_id: str, degree: int) -> Catalog:
    data = json.loads(cat.to_json())
    for rec in data["families"]:
        if rec["id"] == family_id:
            rec["expected_regularized"][degree] = str(Fraction(rec["expected_regularized"][degree]) + 1)
    return Catalog.from_json(json.dumps(data))


def test_counts(cat):
    assert len(cat) == 116
    assert sum(1 for r in cat if r.is_threefold) == 105
    assert sum(1 for r in cat if r.very_ample) == 98


def test_filters(cat):
    assert [r.id for r in cat.select("rank=10")] == ["10-1"]
    assert [r.id for r in cat.select("very_ample=false")] == ["3", "8", "2-1", "2-2", "2-3", "9-1", "10-1"]
    assert len(cat.select({"dimension": 2})) == 10
    assert len(cat.select("rank=2,very_ample=true")) == len(
        [r for r in cat if r.rank == 2 and r.very_ample])
    with pytest.raises(CatalogError):
        parse_filter("colour=red")
    with pytest.raises(CatalogError):
        cat.select("rank=two")


def test_unknown_id(cat):
    with pytest.raises(UnknownFamilyError):
        cat.get("bogus")
    with pytest.raises(KeyError):
        cat.quantum_period("bogus", 3)


@pytest.mark.parametrize("fid,prefix", [
    ("3-10", [1, 0, 10, 36, 366, 2640]),
    ("5-2", [1, 0, 6, 18, 114, 660]),
    ("1", [1, 0, 0, 0, 24, 0, 0, 0, 2520]),
    ("2-2", [1, 0, 470, 21216]),
    ("16", [1, 0, 18, 120, 1566]),
    ("10-1", [1, 0, 10262, 2021280]),
])
def test_spot_values(cat, fid, prefix):
    assert list(cat.regularized_period(fid, len(prefix) - 1)) == prefix
    assert cat.verify_family(fid).passed


def test_quantum_period_examples(cat):
    p1, p2 = cat.quantum_period("P1", 8), cat.quantum_period("P2", 8)
    assert cat.quantum_period("2-34", 8) == product_period(p1, p2)
    assert cat.quantum_period("9-1", 6) == product_period(cat.quantum_period("S2", 6),
                                                          cat.quantum_period("P1", 6))


def test_unregularized_printed_series_checked(cat):
    for fid in ("15", "16", "17"):
        rec = cat.get(fid)
        assert rec.expected_unregularized is not None
        n = len(rec.expected_unregularized) - 1
        assert list(cat.quantum_period(fid, n)) == list(rec.expected_unregularized)


def test_corrupted_coefficient_fails(cat):
    bad = corrupted(cat, "2-21", 5)
    rep = bad.verify_family("2-21")
    assert not rep.passed and rep.degree == 5
    assert rep.expected == rep.found + 1
    assert "FAIL 2-21 at degree 5" in str(rep)


def test_record_round_trip(cat):
    for rec in cat:
        assert FamilyRecord.from_dict(rec.to_dict()) == rec
        for con in (rec.construction,) + rec.cross_checks:
            assert construction_from_dict(con.to_dict()) == con


def test_catalog_round_trip_keeps_results(cat):
    again = Catalog.from_json(cat.to_json())
    assert again.to_json() == cat.to_json()
    ids = ["1", "2-22", "3-27", "4-11", "S1"]
    assert [str(again.verify_family(i)) for i in ids] == [str(cat.verify_family(i)) for i in ids]
    clone = pickle.loads(pickle.dumps(cat))
    assert clone.ids == cat.ids


def test_catalog_invariants_enforced(cat):
    data = json.loads(cat.to_json())
    dup = dict(data, families=data["families"] + [data["families"][0]])
    with pytest.raises(CatalogError):
        Catalog.from_json(json.dumps(dup))
    broken = json.loads(cat.to_json())
    broken["families"][20]["minkowski_id"] = broken["families"][21]["minkowski_id"]
    with pytest.raises(CatalogError):
        Catalog.from_json(json.dumps(broken))
    with pytest.raises(CatalogError):
        Catalog.from_json("{not json")


def test_cross_checks_agree(cat):
    for rec in cat:
        if rec.id in ("16",):
            continue
        main = cat.quantum_period(rec.id, 10)
        for con in rec.cross_checks:
            assert cat.construction_period(con, 10) == main, (rec.id, con.kind)


def test_closed_forms_are_bounded(cat):
    from fanoperiods.sumdsl import is_bounded
    for rec in cat:
        for con in (rec.construction,) + rec.cross_checks:
            spec = con.sum_spec()
            if spec is not None:
                assert is_bounded(spec), rec.id
            if isinstance(con, ClosedForm):
                assert con.text


def test_env_override(tmp_path, monkeypatch, cat):
    path = tmp_path / "catalog.json"
    path.write_text(corrupted(cat, "2-21", 3).to_json())
    monkeypatch.setenv("FANO_CATALOG", str(path))
    assert catalog_module.catalog_path() == path
    assert not load_catalog().verify_family("2-21").passed


def test_parallel_verify_keeps_order(cat):
    serial = cat.verify_all("rank=3")
    parallel = cat.verify_all("rank=3", jobs=2)
    assert [r.id for r in serial.reports] == [r.id for r in parallel.reports]
    assert parallel.ok and serial.passed == len(cat.select("rank=3"))
