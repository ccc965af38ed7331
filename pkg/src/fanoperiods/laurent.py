"""Laurent polynomials in three variables and their period sequences.

The period of ``f`` has ``t^m`` coefficient equal to the constant term of
``f^m``.  Powers are built one multiplication at a time; after each step we
drop exponent vectors that are too far from the origin to come back with the
multiplications still to do, so only the part that can reach the constant
term is ever stored.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .series import PowerSeries, as_fraction, format_rational

Exponent = tuple[int, ...]


class LaurentPolynomial:
    """Finite map from exponent vectors to nonzero rational coefficients."""

    __slots__ = ("_terms", "_dim")

    def __init__(self, terms: Mapping[Sequence[int], Union[int, Fraction, str]] = None, dimension: int = 3):
        clean: dict[Exponent, Fraction] = {}
        for exp, coeff in (terms or {}).items():
            key = tuple(int(e) for e in exp)
            if len(key) != dimension:
                raise ValueError(f"exponent {key} does not have length {dimension}")
            value = clean.get(key, Fraction(0)) + as_fraction(coeff)
            clean[key] = value
        self._terms = {k: v for k, v in clean.items() if v}
        self._dim = dimension

    @classmethod
    def from_monomials(cls, exponents: Iterable[Sequence[int]], dimension: int = 3) -> "LaurentPolynomial":
        """Sum of monomials with coefficient 1 (repeats add up)."""
        terms: dict = {}
        for e in exponents:
            key = tuple(e)
            terms[key] = terms.get(key, 0) + 1
        return cls(terms, dimension)

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    @property
    def dimension(self) -> int:
        return self._dim

    @property
    def support(self) -> list[Exponent]:
        return sorted(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self._dim == other._dim and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._dim, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        return f"LaurentPolynomial({len(self._terms)} terms)"

    def __mul__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        return LaurentPolynomial(_multiply(self._terms, other._terms), self._dim)

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        merged = dict(self._terms)
        for k, v in other._terms.items():
            merged[k] = merged.get(k, Fraction(0)) + v
        return LaurentPolynomial(merged, self._dim)

    def transform(self, matrix: Sequence[Sequence[int]]) -> "LaurentPolynomial":
        """Monomial change of variables: exponent ``e`` goes to ``matrix @ e``."""
        out = {}
        for e, c in self._terms.items():
            key = tuple(sum(row[i] * e[i] for i in range(self._dim)) for row in matrix)
            out[key] = out.get(key, Fraction(0)) + c
        return LaurentPolynomial(out, self._dim)

    def to_json(self) -> str:
        return json.dumps({"terms": [{"e": list(e), "c": format_rational(c)}
                                     for e, c in sorted(self._terms.items())]})

    @classmethod
    def from_json(cls, text: str) -> "LaurentPolynomial":
        data = json.loads(text)
        terms: dict = {}
        dim = None
        for item in data["terms"]:
            e = tuple(int(v) for v in item["e"])
            if dim is None:
                dim = len(e)
            c = item["c"]
            if not isinstance(c, (str, int)) or isinstance(c, bool):
                raise ValueError(f"coefficient {c!r} must be an integer or a 'p/q' string")
            if e in terms:
                raise ValueError(f"exponent {list(e)} appears twice")
            terms[e] = as_fraction(c)
        return cls(terms, data.get("dimension", dim or 3))


def _multiply(a: Mapping[Exponent, Fraction], b: Mapping[Exponent, Fraction]) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def _reachable(exp: Exponent, steps: int, lo: Sequence[int], hi: Sequence[int]) -> bool:
    """Can ``exp`` return to the origin after ``steps`` more factors?"""
    return all(e + steps * l <= 0 <= e + steps * h for e, l, h in zip(exp, lo, hi))


def _power_constant_terms(f: LaurentPolynomial, order: int) -> list[Fraction]:
    terms = f.terms
    zero = (0,) * f.dimension
    out = [Fraction(1)]
    if order == 0:
        return out
    if not terms:
        return out + [Fraction(0)] * order
    lo = [min(e[i] for e in terms) for i in range(f.dimension)]
    hi = [max(e[i] for e in terms) for i in range(f.dimension)]
    items = list(terms.items())
    current: dict = {zero: Fraction(1)}
    for m in range(1, order + 1):
        left = order - m
        nxt: dict = {}
        for ea, ca in current.items():
            for eb, cb in items:
                key = tuple(x + y for x, y in zip(ea, eb))
                if _reachable(key, left, lo, hi):
                    nxt[key] = nxt.get(key, 0) + ca * cb
        current = {k: v for k, v in nxt.items() if v}
        out.append(Fraction(current.get(zero, 0)))
    return out


def constant_term_power(f: LaurentPolynomial, m: int) -> Fraction:
    """Constant term of ``f^m``."""
    if m < 0:
        raise ValueError("the power must be nonnegative")
    return _power_constant_terms(f, m)[m]


def period_series(f: LaurentPolynomial, order: int) -> PowerSeries:
    """``sum_m ct(f^m) t^m`` up to ``t^order``."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    return PowerSeries(_power_constant_terms(f, order))


class MatchReport:
    def __init__(self, family_id: str, order: int, first_mismatch: Optional[int],
                 expected: Optional[Fraction] = None, found: Optional[Fraction] = None):
        self.family_id = family_id
        self.order = order
        self.first_mismatch = first_mismatch
        self.expected = expected
        self.found = found

    @property
    def matches(self) -> bool:
        return self.first_mismatch is None

    def __bool__(self) -> bool:
        return self.matches

    def __str__(self) -> str:
        if self.matches:
            return f"MATCH {self.family_id} to order {self.order}"
        return (f"MISMATCH {self.family_id} at degree {self.first_mismatch}: "
                f"expected {format_rational(self.expected)}, Laurent period gives "
                f"{format_rational(self.found)}")


def compare_series(f: LaurentPolynomial, target: PowerSeries, family_id: str = "?") -> MatchReport:
    got = period_series(f, target.order)
    for d, (a, b) in enumerate(zip(target, got)):
        if a != b:
            return MatchReport(family_id, target.order, d, a, b)
    return MatchReport(family_id, target.order, None)


def matches_family(f: LaurentPolynomial, family_id: str, order: int, catalog=None) -> MatchReport:
    """Compare the period of ``f`` with the regularized quantum period of a family."""
    if catalog is None:
        from .catalog import load_catalog
        catalog = load_catalog()
    target = catalog.regularized_period(family_id, order)
    return compare_series(f, target, family_id)


MIRROR_DIR = Path(__file__).parent / "data" / "mirrors"


def load_mirror(path) -> LaurentPolynomial:
    """Read a Laurent polynomial file; bare names resolve to the bundled mirrors."""
    p = Path(path)
    if not p.exists() and not p.is_absolute() and (MIRROR_DIR / p.name).exists():
        p = MIRROR_DIR / p.name
    return LaurentPolynomial.from_json(p.read_text())


def shipped_mirrors() -> list[tuple[str, str, LaurentPolynomial]]:
    """``(file name, family id, polynomial)`` for every bundled mirror."""
    index = json.loads((MIRROR_DIR / "index.json").read_text())
    return [(name, fid, load_mirror(MIRROR_DIR / name)) for name, fid in sorted(index.items())]


__all__ = [
    "LaurentPolynomial", "MatchReport", "compare_series", "constant_term_power",
    "load_mirror", "matches_family", "period_series", "shipped_mirrors",
]
