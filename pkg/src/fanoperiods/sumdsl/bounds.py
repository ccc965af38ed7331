"""Fourier-Motzkin machinery for summation regions.

Every block ranges over ``x >= 0`` (componentwise) subject to ``C x + k >= 0``.
Two services are built on exact projection:

* :class:`RegionEnumerator` lists the integer points of the region on a given
  degree slice ``deg(x) = d``, one coordinate at a time, with bounds taken from
  the successive projections.
* :func:`check_bounded` certifies that every slice is finite.  For each index
  it exhibits nonnegative integers with
  ``s * x_i + sum y_j c_j(x) + sum z_j x_j = a * deg(x) + const``,
  which bounds ``x_i`` by ``(a * deg + const) / s``.  When no such identity
  exists it returns an integer ray of the recession cone as witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator, Optional, Sequence

from .expr import LinearForm, SumBlock, SumSpec

# An inequality is (coeffs, dcoef, const, mult) meaning
# sum coeffs[i] x_i + dcoef * d + const >= 0; mult records the nonnegative
# combination of the input rows that produced it (or None when not tracked).


def _reduce(coeffs, dcoef, const, mult=None):
    """Divide through by the content of the variable part, rounding the
    constant down; this keeps every integer solution."""
    g = 0
    for v in coeffs:
        g = gcd(g, v)
    g = gcd(g, dcoef)
    if g > 1:
        coeffs = tuple(v // g for v in coeffs)
        dcoef //= g
        const = const // g
    return coeffs, dcoef, const, None


def _eliminate(rows, var: int):
    keep, pos, neg = [], [], []
    for row in rows:
        a = row[0][var]
        if a > 0:
            pos.append(row)
        elif a < 0:
            neg.append(row)
        else:
            keep.append(row)
    for p in pos:
        for q in neg:
            a, b = p[0][var], -q[0][var]
            coeffs = tuple(b * x + a * y for x, y in zip(p[0], q[0]))
            dcoef = b * p[1] + a * q[1]
            const = b * p[2] + a * q[2]
            keep.append(_reduce(coeffs, dcoef, const))
    return _dedupe(keep)


def _dedupe(rows):
    best: dict = {}
    for row in rows:
        if not any(row[0]) and row[1] == 0:
            if row[2] < 0:
                return [row]  # infeasible marker, kept so callers see it
            continue
        key = (row[0], row[1])
        cur = best.get(key)
        if cur is None or row[2] < cur[2]:
            best[key] = row
    return list(best.values())


def _block_rows(block: SumBlock, with_degree: bool, track: bool):
    k = block.index_count
    rows = []
    n_inputs = k + len(block.constraints) + (1 if with_degree else 0)

    def unit(j):
        return tuple(1 if t == j else 0 for t in range(n_inputs)) if track else None

    for i in range(k):
        rows.append((tuple(1 if t == i else 0 for t in range(k)), 0, 0, unit(i)))
    for j, c in enumerate(block.constraints):
        rows.append((c.coeffs, 0, c.constant, unit(k + j)))
    return rows, n_inputs


class RegionEnumerator:
    """Integer points of one block's region on a fixed degree slice."""

    def __init__(self, block: SumBlock):
        self.block = block
        k = block.index_count
        rows, _ = _block_rows(block, False, False)
        deg = block.degree
        rows.append((deg.coeffs, -1, deg.constant, None))
        rows.append((tuple(-a for a in deg.coeffs), 1, -deg.constant, None))
        rows = _dedupe([_reduce(*r) for r in rows])
        systems = [None] * (k + 1)
        systems[k] = rows
        for i in range(k - 1, -1, -1):
            systems[i] = _eliminate(systems[i + 1], i)
        self._levels = []
        for i in range(k):
            lower, upper = [], []
            for coeffs, dcoef, const, _ in systems[i + 1]:
                a = coeffs[i]
                if a > 0:
                    lower.append((a, coeffs[:i], dcoef, const))
                elif a < 0:
                    upper.append((-a, coeffs[:i], dcoef, const))
            self._levels.append((lower, upper))
        self._degree_rows = systems[0]

    def degree_range(self) -> tuple[Optional[Fraction], Optional[Fraction]]:
        """Real bounds on the degree over the region (None when unbounded)."""
        lo, hi = None, None
        for _, dcoef, const, _ in self._degree_rows:
            if dcoef > 0:
                v = Fraction(-const, dcoef)
                lo = v if lo is None or v > lo else lo
            elif dcoef < 0:
                v = Fraction(const, -dcoef)
                hi = v if hi is None or v < hi else hi
            elif const < 0:
                return Fraction(1), Fraction(0)
        return lo, hi

    def slice_empty(self, d: int) -> bool:
        """True when the degree-``d`` slice is empty before any index is fixed."""
        return any(dcoef * d + const < 0 for _, dcoef, const, _ in self._degree_rows)

    def level_range(self, i: int, x: Sequence[int], d: int) -> tuple[int, int]:
        """Range of index ``i`` once ``x[0..i-1]`` are fixed (empty when lo > hi)."""
        lower, upper = self._levels[i]
        lo, hi = None, None
        for a, pre, dcoef, const in lower:
            rest = dcoef * d + const
            for c, v in zip(pre, x):
                rest += c * v
            bound = -(rest // a)  # ceil(-rest / a)
            if lo is None or bound > lo:
                lo = bound
        for a, pre, dcoef, const in upper:
            rest = dcoef * d + const
            for c, v in zip(pre, x):
                rest += c * v
            bound = rest // a
            if hi is None or bound < hi:
                hi = bound
        if hi is None or lo is None:
            raise UnboundedSumError(self.block, None)
        return lo, hi

    def points(self, d: int) -> Iterator[tuple[int, ...]]:
        for _, dcoef, const, _ in self._degree_rows:
            if dcoef * d + const < 0:
                return
        k = self.block.index_count
        x = [0] * k
        level_range = self.level_range

        def rec(i: int):
            lo, hi = level_range(i, x, d)
            for v in range(lo, hi + 1):
                x[i] = v
                if i + 1 == k:
                    yield tuple(x)
                else:
                    yield from rec(i + 1)
            x[i] = 0

        if k == 0:
            if d == self.block.degree.constant:
                yield ()
            return
        yield from rec(0)


class UnboundedSumError(ValueError):
    def __init__(self, block: SumBlock, witness: Optional[tuple[int, ...]]):
        self.block = block
        self.witness = witness
        names = ",".join(block.variables)
        msg = f"summation over [{names}] is unbounded on degree slices"
        if witness is not None:
            msg += f"; recession direction {witness}"
        super().__init__(msg)


@dataclass(frozen=True)
class VariableBound:
    """``scale * x_i + sum y_j c_j(x) + sum z_j x_j == a * deg(x) + offset``."""

    variable: int
    scale: int
    degree_multiplier: int
    constraint_multipliers: tuple[int, ...]
    nonneg_multipliers: tuple[int, ...]
    offset: int

    def bound(self, degree: int) -> int:
        """Largest value ``x_i`` can take on the given degree slice."""
        return (self.degree_multiplier * degree + self.offset) // self.scale

    def verify(self, block: SumBlock) -> bool:
        k = block.index_count
        lhs = [0] * k
        lhs[self.variable] += self.scale
        const = 0
        for y, c in zip(self.constraint_multipliers, block.constraints):
            for i in range(k):
                lhs[i] += y * c.coeffs[i]
            const += y * c.constant
        for i, z in enumerate(self.nonneg_multipliers):
            lhs[i] += z
        rhs = [self.degree_multiplier * a for a in block.degree.coeffs]
        rhs_const = self.degree_multiplier * block.degree.constant + self.offset
        return (lhs == rhs and const == rhs_const
                and self.scale > 0 and self.degree_multiplier >= 0
                and all(v >= 0 for v in self.constraint_multipliers + self.nonneg_multipliers))


@dataclass(frozen=True)
class BoundsCertificate:
    bounds: tuple[tuple[VariableBound, ...], ...]   # one tuple per block

    def verify(self, spec: SumSpec) -> bool:
        return all(b.verify(block) for block, bs in zip(spec.blocks, self.bounds) for b in bs)


@dataclass(frozen=True)
class Rejection:
    block: int
    witness: tuple[int, ...]
    reason: str


def _variable_bound(block: SumBlock, var: int) -> Optional[VariableBound]:
    k = block.index_count
    m = len(block.constraints)
    rows, n_inputs = _block_rows(block, True, True)
    # the degree row enters as -deg(x) >= 0 on the homogeneous cone
    rows = [(r[0], 0, 0, r[3]) for r in rows]
    unit = tuple(1 if t == n_inputs - 1 else 0 for t in range(n_inputs))
    rows.append((tuple(-a for a in block.degree.coeffs), 0, 0, unit))
    for i in range(k):
        if i != var:
            rows = _eliminate_tracked(rows, i)
    best = None
    for coeffs, _, _, mult in rows:
        if coeffs[var] < 0:
            if best is None or sum(mult) < sum(best[1]):
                best = (-coeffs[var], mult)
    if best is None:
        return None
    scale, mult = best
    z = mult[:k]
    y = mult[k:k + m]
    a = mult[k + m]
    offset = sum(yj * c.constant for yj, c in zip(y, block.constraints)) - a * block.degree.constant
    return VariableBound(var, scale, a, tuple(y), tuple(z), offset)


def _eliminate_tracked(rows, var: int):
    keep, pos, neg = [], [], []
    for row in rows:
        a = row[0][var]
        (pos if a > 0 else neg if a < 0 else keep).append(row)
    for p in pos:
        for q in neg:
            a, b = p[0][var], -q[0][var]
            coeffs = tuple(b * x + a * y for x, y in zip(p[0], q[0]))
            mult = tuple(b * x + a * y for x, y in zip(p[3], q[3]))
            g = 0
            for v in coeffs + mult:
                g = gcd(g, v)
            if g > 1:
                coeffs = tuple(v // g for v in coeffs)
                mult = tuple(v // g for v in mult)
            keep.append((coeffs, 0, 0, mult))
    seen: dict = {}
    for row in keep:
        if not any(row[0]):
            continue
        cur = seen.get(row[0])
        if cur is None or sum(row[3]) < sum(cur[3]):
            seen[row[0]] = row
    return list(seen.values())


def _recession_ray(block: SumBlock, var: int) -> tuple[int, ...]:
    """Integer nonzero v >= 0 with C v >= 0, deg(v) <= 0 and v[var] > 0."""
    k = block.index_count
    order = [var] + [i for i in range(k) if i != var]
    perm = lambda coeffs: tuple(coeffs[i] for i in order)
    rows = [(perm(tuple(1 if t == i else 0 for t in range(k))), 0, 0, None) for i in range(k)]
    rows += [(perm(c.coeffs), 0, 0, None) for c in block.constraints]
    rows.append((perm(tuple(-a for a in block.degree.coeffs)), 0, 0, None))
    systems = [None] * (k + 1)
    systems[k] = rows
    for i in range(k - 1, -1, -1):
        systems[i] = _eliminate(systems[i + 1], i)
    values: list[Fraction] = []
    for i in range(k):
        lo, hi = Fraction(0), None
        for coeffs, _, _, _ in systems[i + 1]:
            a = coeffs[i]
            if a == 0:
                continue
            rest = sum(Fraction(c) * v for c, v in zip(coeffs[:i], values))
            b = -rest / a
            if a > 0:
                lo = max(lo, b)
            else:
                hi = b if hi is None else min(hi, b)
        if i == 0:
            lo = max(lo, Fraction(1))
        values.append(lo)
    den = 1
    for v in values:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in values]
    g = 0
    for v in ints:
        g = gcd(g, v)
    ints = [v // g for v in ints]
    out = [0] * k
    for pos, i in enumerate(order):
        out[i] = ints[pos]
    return tuple(out)


def check_bounded(spec: SumSpec):
    """Return a :class:`BoundsCertificate` or a :class:`Rejection`."""
    certs = []
    for b_index, block in enumerate(spec.blocks):
        bounds = []
        for i in range(block.index_count):
            vb = _variable_bound(block, i)
            if vb is None:
                return Rejection(b_index, _recession_ray(block, i),
                                 f"index {block.variables[i]!r} is unbounded on degree slices")
            bounds.append(vb)
        lo, _ = RegionEnumerator(block).degree_range()
        if lo is not None and lo < 0:
            enum = RegionEnumerator(block)
            for d in range(int(lo // 1), 0):
                for x in enum.points(d):
                    return Rejection(b_index, x, "degree takes a negative value")
        certs.append(tuple(bounds))
    return BoundsCertificate(tuple(certs))


def is_bounded(spec: SumSpec) -> bool:
    return isinstance(check_bounded(spec), BoundsCertificate)


def implied_nonnegative(columns: Sequence[Sequence[int]], index: int) -> bool:
    """Whether ``<beta, col> >= 0`` for all columns forces ``beta[index] >= 0``.

    Used to confirm that a weight matrix's cone lies in the nonnegative
    orthant of the chosen lattice basis.
    """
    k = len(columns[0]) if columns else 0
    n = len(columns)
    rows = []
    for j, col in enumerate(columns):
        rows.append((tuple(col), 0, 0, tuple(1 if t == j else 0 for t in range(n))))
    for i in range(k):
        if i != index:
            rows = _eliminate_tracked(rows, i)
    return any(coeffs[index] > 0 and not any(c for t, c in enumerate(coeffs) if t != index)
               for coeffs, _, _, _ in rows)
