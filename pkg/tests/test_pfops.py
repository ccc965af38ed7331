from __future__ import annotations

from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as st

from fanoperiods.catalog import load_catalog
from fanoperiods.pfops import (
    DifferentialOperator, InsufficientCoefficientsError, annihilates, apply, find_annihilator,
    fit_annihilator, integer_roots, is_manifold_type, nullspace, operator_to_text, parse_operator,
    required_coefficients, search_annihilator, search_schedule,
)
from fanoperiods.series import PowerSeries, regularize

D = DifferentialOperator.from_terms({(0, 1): 1})


def g_p3(n: int) -> PowerSeries:
    return PowerSeries([Fraction(1, factorial(d // 4) ** 4) if d % 4 == 0 else 0 for d in range(n + 1)])


def test_apply_examples():
    assert list(apply(D, PowerSeries.constant(1, 5))) == [0] * 6
    assert list(apply(D, PowerSeries([0, 1, 0]))) == [0, 1, 0]
    op = DifferentialOperator.from_terms({(0, 4): 1, (4, 0): -256})
    assert annihilates(op, g_p3(40))


def test_unregularized_p3_operator_is_unique():
    res = fit_annihilator(g_p3(40), 4, 4)
    assert res.nullity == 1
    assert res.operator.terms() == {(0, 4): 1, (4, 0): -256}


def test_constant_series():
    op = find_annihilator(PowerSeries.constant(1, 6), 1, 0)
    assert op.terms() == {(0, 1): 1}


def test_regularized_p3():
    s = regularize(g_p3(40))
    op = find_annihilator(s, 4, 4)
    assert op is not None and annihilates(op, s)
    assert find_annihilator(s, 1, 1) is None


def test_insufficient_coefficients():
    assert required_coefficients(4, 4) == 33
    with pytest.raises(InsufficientCoefficientsError):
        fit_annihilator(g_p3(20), 4, 4)
    res = search_annihilator(g_p3(12))
    assert res.status == "insufficient_coefficients"


def test_schedule():
    sched = search_schedule()
    assert sched[:5] == [(2, 2), (3, 3), (4, 4), (5, 5), (6, 6)]
    assert sched[-1] == (6, 12) and len(sched) == 11


def test_search_reduces_to_minimal_operator():
    s = regularize(g_p3(80))
    res = search_annihilator(s)
    assert res.status == "found" and res.first_hit == (4, 4)
    assert (res.order, res.degree, res.nullity) == (3, 4, 1)
    assert res.minimal
    assert is_manifold_type(res.operator)
    raw = search_annihilator(s, reduce=False)
    assert (raw.order, raw.degree) == (4, 4)


def test_manifold_type_examples():
    assert is_manifold_type(DifferentialOperator.of([[0, 0, 0, 0, 1]]))
    assert not is_manifold_type(DifferentialOperator.of([[-1, -1, 1]]))
    assert is_manifold_type(DifferentialOperator.of([[3, -4, 1]]))
    with pytest.raises(ValueError):
        is_manifold_type(DifferentialOperator.of([[0, 0], [1, 1]]))


def test_integer_roots():
    roots, rest = integer_roots([6, -5, 1])         # (x-2)(x-3)
    assert roots == [2, 3] and len(rest) == 1
    roots, rest = integer_roots([0, 0, -1, 0, 1])   # x^2 (x^2 - 1)
    assert roots == [-1, 0, 0, 1]
    roots, rest = integer_roots([-2, 0, 1])
    assert roots == [] and rest == [-2, 0, 1]


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=4), st.integers(-5, 5).filter(bool),
       st.lists(st.integers(-3, 3), min_size=0, max_size=2))
def test_manifold_type_is_scale_invariant(roots, scale, extra):
    # (D - r1)...(D - rk) * (D^2 + 1)^e
    poly = [1]
    factors = [[-r, 1] for r in roots] + [[1, 0, 1] for _ in extra]
    for f in factors:
        out = [0] * (len(poly) + len(f) - 1)
        for i, a in enumerate(poly):
            for j, b in enumerate(f):
                out[i + j] += a * b
        poly = out
    op = DifferentialOperator.of([poly])
    scaled = DifferentialOperator.of([[scale * v for v in poly]])
    assert is_manifold_type(op) == is_manifold_type(scaled) == (not extra)


def _rank(rows):
    m = [[Fraction(v) for v in r] for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


@given(st.integers(1, 5), st.integers(1, 6), st.data())
def test_nullspace_against_fraction_oracle(nrows, ncols, data):
    rows = [data.draw(st.lists(st.integers(-5, 5), min_size=ncols, max_size=ncols)) for _ in range(nrows)]
    basis = nullspace(rows, ncols)
    assert len(basis) == ncols - _rank(rows)
    for v in basis:
        assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in rows)
    if basis:
        assert _rank(basis) == len(basis)


def test_text_and_json_round_trip():
    op = DifferentialOperator.of([[0, 0, Fraction(1, 2), 1], [-3, 0, 0, 0], [0, 2, 0, 0]])
    text = operator_to_text(op)
    assert text == "(D^3 + 1/2*D^2) + t*(-3) + t^2*(2*D)"
    assert parse_operator(text) == op
    assert DifferentialOperator.from_json(op.to_json()) == op


def test_parse_rejects_t_right_of_d():
    with pytest.raises(ValueError):
        parse_operator("D*t")


@pytest.mark.parametrize("fid", ["1", "2", "3-27", "P2", "2-34", "2-35"])
def test_operator_stable_under_longer_truncation(fid):
    cat = load_catalog()
    res = search_annihilator(cat.regularized_period(fid, 70))
    assert res.status == "found"
    assert annihilates(res.operator, cat.regularized_period(fid, 90))
