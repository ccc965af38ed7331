from __future__ import annotations

from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as st

from fanoperiods.series import (
    PowerSeries, as_fraction, exp_linear, format_rational, multiply, normalize_prefactor,
    regularize, unregularize,
)

rationals = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 1000)
series = st.lists(rationals, min_size=1, max_size=12).map(PowerSeries)


def test_format_rational_lowest_terms():
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert format_rational(Fraction(8, 4)) == "2"
    assert format_rational(-3) == "-3"


def test_as_fraction_rejects_floats_and_bools():
    with pytest.raises(TypeError):
        as_fraction(0.5)
    with pytest.raises(TypeError):
        as_fraction(True)
    assert as_fraction("3/9") == Fraction(1, 3)


def test_regularize_multiplies_by_factorial():
    s = PowerSeries([1, 0, Fraction(1, 4), 0, Fraction(1, 36)])
    assert list(regularize(s)) == [1, 0, Fraction(1, 2), 0, Fraction(24, 36)]


def test_empty_series_rejected():
    with pytest.raises(ValueError):
        PowerSeries([])


def test_exp_linear():
    e = exp_linear(2, 4)
    assert list(e) == [Fraction(2) ** k / factorial(k) for k in range(5)]


def test_normalize_prefactor_needs_unit_constant():
    with pytest.raises(ValueError):
        normalize_prefactor(PowerSeries([2, 1]))


@given(series)
def test_regularize_round_trip(s):
    assert unregularize(regularize(s)) == s


@given(series, series)
def test_multiplication_commutes_and_truncates(a, b):
    assert multiply(a, b) == multiply(b, a)
    assert (a * b).order == min(a.order, b.order)


@given(st.lists(rationals, min_size=1, max_size=10), rationals)
def test_normalize_prefactor_recovers_exponential(tail, c):
    base = PowerSeries([1, 0] + tail)
    shifted = exp_linear(c, base.order) * base
    got_c, got = normalize_prefactor(shifted)
    assert got_c == c
    assert got == base


@given(series, st.integers(0, 15))
def test_truncate_prefix(s, n):
    if n > s.order:
        with pytest.raises(ValueError):
            s.truncate(n)
    else:
        assert list(s.truncate(n)) == list(s)[:n + 1]
