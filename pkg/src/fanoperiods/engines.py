"""Generators that turn toric and weighted-projective data into sum specs.

* toric Fano manifolds: ``sum t^<b,-K> / prod <b,D_i>!`` over the cone
  ``<b,D_i> >= 0``;
* complete intersections in toric manifolds: numerator factorials
  ``prod <b,rho_j>!``, degree ``<b,-K-Lambda>`` and an automatic prefactor;
* complete intersections in weighted projective space:
  ``sum t^{-k d} prod (d d_j)! / prod (d w_i)!`` with an automatic prefactor;
* products: ``G_{X x Y} = G_X G_Y`` (regularize afterwards, never before).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .series import PowerSeries, multiply
from .sumdsl import Fact, InvFact, LinearForm, Mul, SumSpec, is_bounded
from .sumdsl.bounds import implied_nonnegative

INDEX_NAMES = ("l", "m", "n", "a", "b", "c", "e", "f", "g")


def _names(count: int) -> tuple[str, ...]:
    if count <= len(INDEX_NAMES):
        return INDEX_NAMES[:count]
    return tuple(f"x{i}" for i in range(count))


@dataclass(frozen=True)
class WeightData:
    """Weight matrix (rows = lattice basis, columns = divisor classes ``D_i``)
    plus the classes ``rho_j`` of the line bundles cutting out ``X``."""

    matrix: tuple[tuple[int, ...], ...]
    bundle_rows: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if not self.matrix or not self.matrix[0]:
            raise ValueError("weight matrix must be nonempty")
        width = len(self.matrix[0])
        if any(len(row) != width for row in self.matrix):
            raise ValueError("weight matrix rows must have equal length")
        for rho in self.bundle_rows:
            if len(rho) != self.rank:
                raise ValueError(f"bundle class {rho} does not have length {self.rank}")

    @classmethod
    def of(cls, matrix: Sequence[Sequence[int]], bundles: Sequence[Sequence[int]] = ()) -> "WeightData":
        return cls(tuple(tuple(int(v) for v in row) for row in matrix),
                   tuple(tuple(int(v) for v in b) for b in bundles))

    @property
    def rank(self) -> int:
        return len(self.matrix)

    @property
    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(row[i] for row in self.matrix) for i in range(len(self.matrix[0]))]

    @property
    def anticanonical(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.matrix)

    @property
    def degree_class(self) -> tuple[int, ...]:
        ak = self.anticanonical
        return tuple(ak[i] - sum(rho[i] for rho in self.bundle_rows) for i in range(self.rank))


class EngineError(ValueError):
    pass


def _pairing(vector: Sequence[int]) -> LinearForm:
    return LinearForm(tuple(int(v) for v in vector))


def _check_orthant(w: WeightData) -> None:
    cols = w.columns
    for i in range(w.rank):
        if not implied_nonnegative(cols, i):
            raise EngineError(
                f"basis coordinate {i} is not forced nonnegative by the weight matrix; "
                "choose a lattice basis inside the cone")


def toric_ci_period(w: WeightData) -> SumSpec:
    """Sum spec for a complete intersection in a toric manifold.

    With no bundle rows this is the toric Fano period and the prefactor mode
    is ``none``; otherwise it is ``auto``.
    """
    _check_orthant(w)
    names = _names(w.rank)
    constraints = []
    factors = []
    for col in w.columns:
        form = _pairing(col)
        # coordinate columns are already covered by index nonnegativity
        if sum(1 for v in col if v) != 1 or sum(col) != 1:
            constraints.append(form)
        factors.append(InvFact(form))
    for rho in w.bundle_rows:
        form = _pairing(rho)
        factors.append(Fact(form))
    degree = _pairing(w.degree_class)
    mode = "auto" if w.bundle_rows else "none"
    spec = SumSpec.single(names, _unique(constraints), degree, Mul(tuple(factors)), mode)
    if not is_bounded(spec):
        raise EngineError("weight data gives an unbounded summation; check the degree class")
    return spec


def toric_period(w: WeightData) -> SumSpec:
    """Sum spec for a toric Fano manifold from its weight data."""
    if w.bundle_rows:
        raise EngineError("toric_period takes weight data without bundle rows")
    return toric_ci_period(w)


def _unique(forms):
    out = []
    for f in forms:
        if f not in out:
            out.append(f)
    return tuple(out)


@dataclass(frozen=True)
class WpsSpec:
    """A complete intersection of degrees ``d_j`` in ``P(w_0, ..., w_n)``."""

    weights: tuple[int, ...]
    degrees: tuple[int, ...]

    @classmethod
    def of(cls, weights: Sequence[int], degrees: Sequence[int]) -> "WpsSpec":
        return cls(tuple(int(w) for w in weights), tuple(int(d) for d in degrees))

    @property
    def k(self) -> int:
        """``k`` with ``-k = sum w_i - sum d_j``."""
        return sum(self.degrees) - sum(self.weights)


def wps_ci_period(s: WpsSpec) -> SumSpec:
    if not s.weights or any(w <= 0 for w in s.weights) or any(d <= 0 for d in s.degrees):
        raise EngineError("weights and degrees must be positive")
    for w in s.weights:
        for d in s.degrees:
            if d % w:
                raise EngineError(f"weight {w} does not divide degree {d}")
    if -s.k <= 0:
        raise EngineError(f"not Fano: sum of weights minus sum of degrees is {-s.k}")
    factors = [Fact(LinearForm((d,))) for d in s.degrees]
    factors += [InvFact(LinearForm((w,))) for w in s.weights]
    return SumSpec.single(("d",), (), LinearForm((-s.k,)), Mul(tuple(factors)), "auto")


def product_period(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Quantum period of a product; regularize the result, not the factors."""
    for s in (a, b):
        if s[0] != 1 or (s.order >= 1 and s[1] != 0):
            raise EngineError("product factors must be normalized periods (1 + O(t^2))")
    return multiply(a, b)

