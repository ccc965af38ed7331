from __future__ import annotations

from fractions import Fraction
from math import factorial

import pytest

from fanoperiods.engines import (
    EngineError, WeightData, WpsSpec, product_period, toric_ci_period, toric_period, wps_ci_period,
)
from fanoperiods.series import PowerSeries, regularize
from fanoperiods.sumdsl import evaluate, evaluate_with_prefactor, is_bounded


def test_projective_space():
    s = evaluate(toric_period(WeightData.of([[1, 1, 1, 1]])), 12)
    want = [Fraction(1, factorial(d) ** 4) if n == 4 * d else 0
            for n in range(13) for d in [n // 4]]
    assert list(s) == want
    assert list(regularize(s))[:9:4] == [1, 24, 2520]


def test_p1_times_p1():
    s = evaluate(toric_period(WeightData.of([[1, 1, 0, 0], [0, 0, 1, 1]])), 6)
    assert list(regularize(s)) == [1, 0, 4, 0, 36, 0, 400]


def test_quadric_threefold():
    c, s = evaluate_with_prefactor(toric_ci_period(WeightData.of([[1] * 5], [[2]])), 6)
    assert c == 0
    assert list(regularize(s))[:4] == [1, 0, 0, 12]


def test_toric_period_refuses_bundles():
    with pytest.raises(EngineError):
        toric_period(WeightData.of([[1] * 5], [[2]]))


def test_orthant_requirement():
    # P1 x P1 in a basis whose second coordinate can go negative
    with pytest.raises(EngineError):
        toric_period(WeightData.of([[1, 1, 1, 1], [0, 0, 1, -1]]))


def test_weight_data_shape_checks():
    with pytest.raises(ValueError):
        WeightData.of([[1, 1], [1]])
    with pytest.raises(ValueError):
        WeightData.of([[1, 1, 1]], [[1, 1]])


def test_wps_cubic_surface():
    c, s = evaluate_with_prefactor(wps_ci_period(WpsSpec.of([1, 1, 1, 1], [3])), 4)
    assert c == 6
    assert is_bounded(wps_ci_period(WpsSpec.of([1, 1, 1, 1], [3])))


def test_wps_rejects_bad_data():
    with pytest.raises(EngineError):
        wps_ci_period(WpsSpec.of([1, 1, 2], [3]))      # 2 does not divide 3
    with pytest.raises(EngineError):
        wps_ci_period(WpsSpec.of([1, 1, 1], [3]))      # not Fano
    with pytest.raises(EngineError):
        wps_ci_period(WpsSpec.of([0, 1], [1]))


def test_product_rule():
    p1 = evaluate(toric_period(WeightData.of([[1, 1]])), 10)
    p1p1 = evaluate(toric_period(WeightData.of([[1, 1, 0, 0], [0, 0, 1, 1]])), 10)
    assert product_period(p1, p1) == p1p1


def test_product_needs_normalized_factors():
    with pytest.raises(EngineError):
        product_period(PowerSeries([1, 1, 0]), PowerSeries([1, 0, 1]))
