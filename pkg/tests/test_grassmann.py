from __future__ import annotations


import pytest
from hypothesis import given, strategies as st

from fanoperiods.grassmann import (
    GrassmannBundleSpec, TruncatedRing, grassmann_period, grassmann_period_with_prefactor,
    grassmann_raw, transpositions, twisted_numerator, vandermonde,
)
from fanoperiods.series import regularize

B5 = GrassmannBundleSpec(2, 5, a=3)          # three hyperplanes in Gr(2,5)
SMALL = [GrassmannBundleSpec(2, 4, a=1), GrassmannBundleSpec(2, 5, a=3),
         GrassmannBundleSpec(2, 5, a=2, b=1), GrassmannBundleSpec(2, 5, a=1, c=1),
         GrassmannBundleSpec(2, 6, a=5), GrassmannBundleSpec(3, 6, a=3, e=1)]


def test_spec_validation():
    with pytest.raises(ValueError):
        GrassmannBundleSpec(3, 3)
    with pytest.raises(ValueError):
        GrassmannBundleSpec(2, 5, a=5)           # k = 0 is not Fano
    with pytest.raises(ValueError):
        GrassmannBundleSpec(2, 5, a=-1)
    assert B5.k == -2


def test_projective_space_as_grassmannian():
    # Gr(1, 4) = P^3
    s = grassmann_period(GrassmannBundleSpec(1, 4), 8)
    assert list(regularize(s)) == [1, 0, 0, 0, 24, 0, 0, 0, 2520]


def test_b5_regularized():
    assert list(regularize(grassmann_period(B5, 6))) == [1, 0, 6, 0, 114, 0, 2940]


@pytest.mark.parametrize("spec", [s for s in SMALL if not s.e])
def test_determinant_matches_ring(spec):
    n = 8
    det = grassmann_raw(spec, n, method="determinant")
    assert grassmann_raw(spec, n, method="ring") == det
    assert grassmann_raw(spec, n, full_ring=True) == det


def test_ring_method_needed_for_e():
    spec = GrassmannBundleSpec(3, 6, a=3, e=1)
    with pytest.raises(ValueError):
        grassmann_raw(spec, 4, method="determinant")
    assert grassmann_raw(spec, 6) == grassmann_raw(spec, 6, full_ring=True)


@pytest.mark.parametrize("spec", SMALL)
@pytest.mark.parametrize("total", [0, 1, 2])
def test_twisted_numerator_is_antisymmetric(spec, total):
    ring, acc = twisted_numerator(spec, total)
    for i, j in transpositions(spec.r):
        assert ring.swap(acc, i, j) == [-v for v in acc]


def test_vandermonde_is_antisymmetric():
    ring = TruncatedRing([4, 4, 4], 6)
    om = vandermonde(ring)
    assert ring.swap(om, 0, 2) == [-v for v in om]


def test_prefactor_of_twelve():
    c, _ = grassmann_period_with_prefactor(GrassmannBundleSpec(2, 5, a=2, b=1), 4)
    assert c == 6


@given(st.integers(1, 3), st.integers(0, 3))
def test_truncated_ring_product_is_commutative(r, seed):
    ring = TruncatedRing([3] * r, 4)
    x = ring.linear([seed + i for i in range(r)], 1)
    y = ring.linear([1 - i for i in range(r)], seed)
    assert ring.mul(x, y) == ring.mul(y, x)
