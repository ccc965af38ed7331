"""Quantum periods of zero loci of homogeneous bundles on Grassmannians.

For ``Gr(r, n)`` and the bundle

    (det S*)^a + (det S* (x) det S*)^b + (S* (x) det S*)^c
        + (S (x) det S*)^d + (wedge^2 S*)^e

with ``k = a + 2b + (r+1)c + (r-1)d + (r-1)e - n < 0``, the period is read off
an antisymmetric sum in the cohomology ring of ``(P^{n-1})^r``: each
multi-index ``l`` contributes a product of Gamma-type blocks divided by
``prod_j prod_{k<=l_j} (p_j + k)^n`` and times ``prod_{i<j} (p_j - p_i + l_j - l_i)``.
Dividing by the Vandermonde ``Omega = prod_{i<j} (p_j - p_i)`` and keeping the
constant term amounts to reading the coefficient of ``p_2 p_3^2 ... p_r^{r-1}``
(``Omega`` has coefficient +1 there and every factor is a polynomial).

Because only that monomial matters, the default ring keeps just the monomials
dividing it: ``p_j`` with exponent below ``j``.  Killing the other monomials is
a ring map, so the answer is unchanged and ``Gr(5,7)`` needs 120 coefficients
instead of 16807.  ``full_ring=True`` uses the honest truncation ``p_j^n = 0``
(restricted to degree at most ``r(r-1)/2``) for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import factorial, gcd
from typing import Iterator, Optional, Sequence

from .series import PowerSeries, normalize_prefactor


@dataclass(frozen=True)
class GrassmannBundleSpec:
    r: int
    n: int
    a: int = 0
    b: int = 0
    c: int = 0
    d: int = 0
    e: int = 0

    def __post_init__(self):
        if not (0 < self.r < self.n):
            raise ValueError("need 0 < r < n")
        if min(self.a, self.b, self.c, self.d, self.e) < 0:
            raise ValueError("bundle multiplicities must be nonnegative")
        if self.k >= 0:
            raise ValueError(f"k = {self.k} must be strictly negative")

    @property
    def k(self) -> int:
        r = self.r
        return self.a + 2 * self.b + (r + 1) * self.c + (r - 1) * self.d + (r - 1) * self.e - self.n


class TruncatedRing:
    """``Q[p_1..p_r]`` modulo ``p_j^{caps[j]}`` and all monomials of total
    degree above ``max_degree``.  Elements are dense integer vectors with a
    shared denominator."""

    def __init__(self, caps: Sequence[int], max_degree: int):
        self.caps = tuple(caps)
        self.r = len(caps)
        self.max_degree = max_degree
        monos = [()]
        for cap in self.caps:
            monos = [m + (e,) for m in monos for e in range(cap)]
        monos = [m for m in monos if sum(m) <= max_degree]
        self.monomials = monos
        self.index = {m: i for i, m in enumerate(monos)}
        self.size = len(monos)
        table = []
        for m1 in monos:
            row = []
            for j, m2 in enumerate(monos):
                prod = tuple(x + y for x, y in zip(m1, m2))
                k = self.index.get(prod)
                if k is not None:
                    row.append((j, k))
            table.append(row)
        self._table = table
        # multiplication by a single variable, as (source, target) index pairs
        self._times = []
        for j in range(self.r):
            pairs = []
            for i, m in enumerate(monos):
                up = m[:j] + (m[j] + 1,) + m[j + 1:]
                k = self.index.get(up)
                if k is not None:
                    pairs.append((i, k))
            self._times.append(pairs)

    def zero(self) -> list[int]:
        return [0] * self.size

    def one(self) -> list[int]:
        v = self.zero()
        v[self.index[(0,) * self.r]] = 1
        return v

    def linear(self, coeffs: Sequence[int], constant: int = 0) -> list[int]:
        v = self.zero()
        v[self.index[(0,) * self.r]] = constant
        for j, c in enumerate(coeffs):
            if c and self.caps[j] > 1 and self.max_degree >= 1:
                mono = tuple(1 if t == j else 0 for t in range(self.r))
                v[self.index[mono]] += c
        return v

    def mul(self, x: Sequence[int], y: Sequence[int]) -> list[int]:
        nx = sum(1 for v in x if v)
        ny = sum(1 for v in y if v)
        if ny < nx:
            x, y = y, x
        out = [0] * self.size
        table = self._table
        for i, a in enumerate(x):
            if a:
                for j, k in table[i]:
                    b = y[j]
                    if b:
                        out[k] += a * b
        return out

    def mul_shift(self, x: Sequence[int], i: int, j: int, c: int) -> list[int]:
        """``x * (p_j - p_i + c)`` without a full product."""
        out = [c * v for v in x] if c else [0] * self.size
        for a, b in self._times[j]:
            if x[a]:
                out[b] += x[a]
        for a, b in self._times[i]:
            if x[a]:
                out[b] -= x[a]
        return out

    def partners(self, k: int) -> list[tuple[int, int]]:
        """Index pairs ``(i, j)`` whose monomials multiply to monomial ``k``."""
        return [(i, j) for i, row in enumerate(self._table) for j, kk in row if kk == k]

    def coefficient(self, x: Sequence[int], mono: Sequence[int]) -> int:
        k = self.index.get(tuple(mono))
        return 0 if k is None else x[k]

    def swap(self, x: Sequence[int], i: int, j: int) -> list[int]:
        """Exchange ``p_i`` and ``p_j`` (requires equal caps)."""
        out = self.zero()
        for idx, mono in enumerate(self.monomials):
            if x[idx]:
                m = list(mono)
                m[i], m[j] = m[j], m[i]
                out[self.index[tuple(m)]] = x[idx]
        return out


# Univariate helpers: integer or Fraction coefficient lists truncated at degree D.

def _poly_mul(f, g, D):
    out = [0] * (D + 1)
    for i, a in enumerate(f):
        if a:
            for j in range(min(len(g), D + 1 - i)):
                out[i + j] += a * g[j]
    return out


def _poly_pow(f, e, D):
    out = [1] + [0] * D
    base = list(f) + [0] * (D + 1 - len(f))
    while e:
        if e & 1:
            out = _poly_mul(out, base, D)
        e >>= 1
        if e:
            base = _poly_mul(base, base, D)
    return out


def _poly_inverse(f, D):
    inv = [Fraction(1, f[0])] + [Fraction(0)] * D
    for s in range(1, D + 1):
        acc = Fraction(0)
        for i in range(1, min(s, len(f) - 1) + 1):
            acc += f[i] * inv[s - i]
        inv[s] = -acc / f[0]
    return inv


def _rising(m: int, slope: int, D: int) -> list[int]:
    """Coefficients of ``prod_{k=1}^m (slope*x + k)`` up to degree D."""
    out = [1] + [0] * D
    for k in range(1, m + 1):
        out = _poly_mul(out, [k, slope], D)
    return out


class _Evaluator:
    def __init__(self, spec: GrassmannBundleSpec, full_ring: bool):
        self.spec = spec
        r, n = spec.r, spec.n
        self.D = r * (r - 1) // 2
        if full_ring:
            caps = [min(n, self.D + 1)] * r
        else:
            caps = [j + 1 for j in range(r)]
        self.ring = TruncatedRing(caps, self.D)
        self.target = tuple(range(r))
        ring = self.ring
        P = [1] * r
        self.forms = {"P": ring.linear(P)}
        for j in range(r):
            self.forms[("P+", j)] = ring.linear([1 + (t == j) for t in range(r)])
            self.forms[("P-", j)] = ring.linear([1 - (t == j) for t in range(r)])
            self.forms[("p", j)] = ring.linear([int(t == j) for t in range(r)])
        for i, j in combinations(range(r), 2):
            self.forms[("pp", i, j)] = ring.linear([int(t in (i, j)) for t in range(r)])
        self._powers: dict = {}
        self._blocks: dict = {}
        self._columns: dict = {}

    def powers(self, key):
        if key not in self._powers:
            ring = self.ring
            base = self.forms[key]
            pw = [ring.one()]
            for _ in range(self.D):
                pw.append(ring.mul(pw[-1], base))
            self._powers[key] = pw
        return self._powers[key]

    def at(self, key, poly) -> tuple[list[int], int]:
        """Evaluate a univariate polynomial at a cached linear form."""
        den = 1
        for c in poly:
            if isinstance(c, Fraction):
                den = den * c.denominator // gcd(den, c.denominator)
        pw = self.powers(key)
        out = self.ring.zero()
        for s, c in enumerate(poly):
            if c:
                ci = int(c * den)
                vec = pw[s]
                for idx, v in enumerate(vec):
                    if v:
                        out[idx] += ci * v
        return out, den

    def block(self, kind: str, m: int, j: Optional[int] = None, i: Optional[int] = None):
        key = (kind, m, j, i)
        hit = self._blocks.get(key)
        if hit is None:
            hit = self._blocks[key] = self._make_block(kind, m, j, i)
        return hit

    def _make_block(self, kind, m, j, i):
        s, D = self.spec, self.D
        if kind == "a":
            return self.at("P", _poly_pow(_rising(m, 1, D), s.a, D))
        if kind == "b":
            return self.at("P", _poly_pow(_rising(m, 2, D), s.b, D))
        if kind == "c":
            return self.at(("P+", j), _poly_pow(_rising(m, 1, D), s.c, D))
        if kind == "d":
            return self.at(("P-", j), _poly_pow(_rising(m, 1, D), s.d, D))
        if kind == "e":
            return self.at(("pp", i, j), _poly_pow(_rising(m, 1, D), s.e, D))
        if kind == "den":
            inv = _poly_inverse(_rising(m, 1, D), D)
            return self.at(("p", j), _poly_pow(inv, s.n, D))
        raise KeyError(kind)

    def element(self, l: Sequence[int]) -> tuple[list[int], int]:
        """Ring element contributed by the multi-index ``l`` (no sign, no t)."""
        ring, r = self.ring, self.spec.r
        L = sum(l)
        acc, den = self.root(L)
        for j in range(r):
            vec, d = self.step(L, l[:j], l[j], j)
            acc = ring.mul(acc, vec)
            den *= d
        return acc, den

    def root(self, L: int) -> tuple[list[int], int]:
        """Factors depending only on ``|l|``."""
        s = self.spec
        acc, den = self.ring.one(), 1
        for kind, m, flag in (("a", L, s.a), ("b", 2 * L, s.b)):
            if flag:
                vec, d = self.block(kind, m)
                acc, den = self.ring.mul(acc, vec), den * d
        return acc, den

    def column(self, L: int, lj: int, j: int) -> tuple[list[int], int]:
        """Factors depending on ``|l|`` and ``l_j`` alone."""
        key = (L, lj, j)
        hit = self._columns.get(key)
        if hit is None:
            s = self.spec
            acc, den = self.block("den", lj, j)
            for kind, m, flag in (("c", L + lj, s.c), ("d", L - lj, s.d)):
                if flag:
                    vec, d = self.block(kind, m, j)
                    acc, den = self.ring.mul(acc, vec), den * d
            hit = self._columns[key] = (acc, den)
        return hit

    def step(self, L: int, prefix: Sequence[int], lj: int, j: int) -> tuple[list[int], int]:
        """Everything that ``l_j`` adds once ``l_0 .. l_{j-1}`` are fixed."""
        ring, s = self.ring, self.spec
        acc, den = self.column(L, lj, j)
        for i, li in enumerate(prefix):
            acc = ring.mul_shift(acc, i, j, lj - li)
            if s.e:
                vec, d = self.block("e", li + lj, j, i)
                acc, den = ring.mul(acc, vec), den * d
        return acc, den

    def level_sum(self, L: int) -> Fraction:
        """Target coefficient of the sum over all ``l`` with ``|l| = L``.

        The enumeration shares prefix products, and the last factor is only
        paired against the target monomial instead of fully multiplied.
        """
        ring, r = self.ring, self.spec.r
        target = ring.index[self.target]
        partners = ring.partners(target)
        total = Fraction(0)

        def rec(prefix, acc, den, remaining):
            nonlocal total
            j = len(prefix)
            if j == r - 1:
                vec, d = self.step(L, prefix, remaining, j)
                c = sum(acc[a] * vec[b] for a, b in partners if acc[a] and vec[b])
                if c:
                    total += Fraction(c, den * d)
                return
            for v in range(remaining + 1):
                vec, d = self.step(L, prefix, v, j)
                rec(prefix + (v,), ring.mul(acc, vec), den * d, remaining - v)

        acc, den = self.root(L)
        rec((), acc, den, L)
        sign = -1 if (L * (r - 1)) % 2 else 1
        return sign * total

    def scalar(self, l: Sequence[int]) -> Fraction:
        vec, den = self.element(l)
        sign = -1 if (sum(l) * (self.spec.r - 1)) % 2 else 1
        return Fraction(sign * self.ring.coefficient(vec, self.target), den)


def _all_indices(r: int, total: int) -> Iterator[tuple[int, ...]]:
    if r == 1:
        yield (total,)
        return
    for v in range(total + 1):
        for rest in _all_indices(r - 1, total - v):
            yield (v,) + rest


def _determinant_level(spec: GrassmannBundleSpec, L: int, cache: dict) -> Fraction:
    """Level-``L`` coefficient by the determinant method (requires ``e = 0``).

    Treat ``p_1 + ... + p_r`` as an independent variable ``q``.  The sum over
    ``l`` is still antisymmetric in the ``p_j`` for fixed ``q``, so the
    quotient by Omega exists in the larger ring and its constant term can be
    read at ``q = 0``.  There every remaining factor depends on a single
    ``p_j``, and writing the shifted Vandermonde as ``det[(p_j + l_j)^i]``
    turns the sum over ``|l| = L`` into the ``z^L`` coefficient of
    ``det[ sum_v z^v [p^j] h_v(p) (p + v)^i ]``.
    """
    r, R = spec.r, spec.r - 1

    def part(key, make):
        if key not in cache:
            cache[key] = make()
        return cache[key]

    columns = []
    for v in range(L + 1):
        h = part(("den", v), lambda: _poly_pow(_poly_inverse(_rising(v, 1, R), R), spec.n, R))
        if spec.c:
            h = _poly_mul(h, part(("c", L + v), lambda: _poly_pow(_rising(L + v, 1, R), spec.c, R)), R)
        if spec.d:
            h = _poly_mul(h, part(("d", L - v), lambda: _poly_pow(_rising(L - v, -1, R), spec.d, R)), R)
        rows = []
        shifted = [1] + [0] * R
        for i in range(r):
            rows.append(_poly_mul(h, shifted, R))
            shifted = _poly_mul(shifted, [v, 1], R)
        columns.append(rows)
    # entry (i, j) as a polynomial in z: coefficient of z^v is [p^j] of row i at v
    entry = [[[columns[v][i][j] for v in range(L + 1)] for j in range(r)] for i in range(r)]
    # Laplace expansion column by column over subsets of used rows
    layer = {0: [Fraction(1)] + [Fraction(0)] * L}
    for j in range(r):
        nxt: dict = {}
        for mask, poly in layer.items():
            for i in range(r):
                if mask >> i & 1:
                    continue
                prod = _poly_mul(poly, entry[i][j], L)
                if bin(mask >> (i + 1)).count("1") % 2:
                    prod = [-x for x in prod]
                acc = nxt.get(mask | 1 << i)
                nxt[mask | 1 << i] = prod if acc is None else [x + y for x, y in zip(acc, prod)]
        layer = nxt
    value = layer[(1 << r) - 1][L]
    value *= factorial(L) ** spec.a * factorial(2 * L) ** spec.b
    return -value if (L * (r - 1)) % 2 else value


def grassmann_raw(spec: GrassmannBundleSpec, order: int, full_ring: bool = False,
                  method: str = "auto") -> PowerSeries:
    """The series obtained after dividing by Omega, before the prefactor.

    ``method`` is ``"determinant"`` (fast, needs ``e = 0``), ``"ring"`` (the
    direct sum over multi-indices in the truncated ring) or ``"auto"``.
    ``full_ring`` forces the ring method.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if method == "auto":
        method = "ring" if (spec.e or full_ring) else "determinant"
    if method == "determinant" and (spec.e or full_ring):
        raise ValueError("the determinant method needs e = 0 and the staircase ring")
    step = -spec.k
    coeffs = [Fraction(0)] * (order + 1)
    if method == "determinant":
        cache: dict = {}
        for total in range(order // step + 1):
            coeffs[total * step] = _determinant_level(spec, total, cache)
    elif method == "ring":
        ev = _Evaluator(spec, full_ring)
        for total in range(order // step + 1):
            coeffs[total * step] = ev.level_sum(total)
    else:
        raise ValueError(f"unknown method {method!r}")
    return PowerSeries(coeffs)


def grassmann_period_with_prefactor(spec: GrassmannBundleSpec, order: int,
                                    full_ring: bool = False) -> tuple[Fraction, PowerSeries]:
    raw = grassmann_raw(spec, order, full_ring)
    if raw[0] != 1:
        raise ArithmeticError(f"constant term {raw[0]} is not 1; check the bundle data")
    return normalize_prefactor(raw)


def grassmann_period(spec: GrassmannBundleSpec, order: int, full_ring: bool = False) -> PowerSeries:
    """Normalized quantum period ``1 + O(t^2)`` to the given order."""
    return grassmann_period_with_prefactor(spec, order, full_ring)[1]


def twisted_numerator(spec: GrassmannBundleSpec, total: int) -> tuple[TruncatedRing, list[Fraction]]:
    """Sum over ``|l| = total`` of the signed ring elements, in the full ring.

    Used to check antisymmetry and divisibility by Omega directly.
    """
    ev = _Evaluator(spec, full_ring=True)
    ring = ev.ring
    acc = [Fraction(0)] * ring.size
    sign = -1 if (total * (spec.r - 1)) % 2 else 1
    for l in _all_indices(spec.r, total):
        vec, den = ev.element(l)
        for i, v in enumerate(vec):
            if v:
                acc[i] += Fraction(sign * v, den)
    return ring, acc


def vandermonde(ring: TruncatedRing) -> list[int]:
    """``Omega = prod_{i<j} (p_j - p_i)`` in the given ring."""
    acc = ring.one()
    for i, j in combinations(range(ring.r), 2):
        coeffs = [0] * ring.r
        coeffs[j], coeffs[i] = 1, -1
        acc = ring.mul(acc, ring.linear(coeffs))
    return acc


def transpositions(r: int):
    return [(i, j) for i, j in combinations(range(r), 2)]


__all__ = [
    "GrassmannBundleSpec", "TruncatedRing", "grassmann_period",
    "grassmann_period_with_prefactor", "grassmann_raw", "twisted_numerator",
    "vandermonde", "transpositions",
]
