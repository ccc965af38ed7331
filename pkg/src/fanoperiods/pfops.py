"""Differential operators in ``D = t d/dt`` that annihilate period series.

An operator is stored as a matrix ``a[k][j]`` and stands for
``sum_k t^k P_k(D)`` with ``P_k(D) = sum_j a[k][j] D^j``.  Since
``D t^m = m t^m``, applying it to ``sum c_m t^m`` gives the coefficient
``sum_k P_k(d - k) c_{d-k}`` at degree ``d``.

Fitting solves for the ``a[k][j]`` as a nullspace problem.  A rank test
modulo a large prime rules out most ``(order, degree)`` pairs cheaply;
only a pair with a nontrivial nullspace mod p is solved exactly, by
fraction-free elimination over the integers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Callable, Optional, Sequence

from .series import PowerSeries, as_fraction, format_rational

PRIME = (1 << 61) - 1
ORDER_CAP = 6
DEGREE_CAP = 12


class InsufficientCoefficientsError(ValueError):
    pass


@dataclass(frozen=True)
class DifferentialOperator:
    coeffs: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not self.coeffs or not self.coeffs[0]:
            raise ValueError("operator matrix must be nonempty")
        width = len(self.coeffs[0])
        if any(len(row) != width for row in self.coeffs):
            raise ValueError("operator rows must have equal length")

    @classmethod
    def of(cls, rows: Sequence[Sequence]) -> "DifferentialOperator":
        return cls(tuple(tuple(as_fraction(v) for v in row) for row in rows))

    @classmethod
    def from_terms(cls, terms: dict) -> "DifferentialOperator":
        """Build from ``{(k, j): coefficient}``."""
        live = {kj: as_fraction(v) for kj, v in terms.items() if v}
        if not live:
            return cls(((Fraction(0),),))
        s = max(k for k, _ in live)
        r = max(j for _, j in live)
        rows = [[Fraction(0)] * (r + 1) for _ in range(s + 1)]
        for (k, j), v in live.items():
            if k < 0 or j < 0:
                raise ValueError("powers of t and D must be nonnegative")
            rows[k][j] = v
        return cls.of(rows)

    @property
    def order(self) -> int:
        return len(self.coeffs[0]) - 1

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not any(v for row in self.coeffs for v in row)

    def p(self, k: int) -> tuple[Fraction, ...]:
        """Coefficients of ``P_k`` in increasing powers of ``D``."""
        return self.coeffs[k]

    def terms(self) -> dict:
        return {(k, j): v for k, row in enumerate(self.coeffs) for j, v in enumerate(row) if v}

    def to_text(self) -> str:
        return operator_to_text(self)

    def to_json(self) -> str:
        return json.dumps({
            "order": self.order,
            "degree": self.degree,
            "coeffs": [[format_rational(v) for v in row] for row in self.coeffs],
        })

    @classmethod
    def from_json(cls, text: str) -> "DifferentialOperator":
        data = json.loads(text)
        op = cls.of(data["coeffs"])
        if op.order != data.get("order", op.order) or op.degree != data.get("degree", op.degree):
            raise ValueError("order/degree fields disagree with the coefficient matrix")
        return op


def _eval_poly(coeffs: Sequence[Fraction], x: int) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def apply(op: DifferentialOperator, s: PowerSeries) -> PowerSeries:
    """``op`` applied to ``s``; the result keeps the truncation order of ``s``."""
    c = s.coefficients
    out = []
    for d in range(s.order + 1):
        acc = Fraction(0)
        for k in range(min(op.degree, d) + 1):
            if c[d - k]:
                acc += _eval_poly(op.coeffs[k], d - k) * c[d - k]
        out.append(acc)
    return PowerSeries(out)


def annihilates(op: DifferentialOperator, s: PowerSeries) -> bool:
    return not any(apply(op, s).coefficients)


def required_coefficients(order: int, degree: int) -> int:
    """Coefficients needed to fit an operator of this shape with a margin."""
    return (order + 1) * (degree + 1) + degree + order


# Linear algebra ---------------------------------------------------------

def _system(s: PowerSeries, order: int, degree: int) -> list[list[int]]:
    """Integer rows, one per degree ``d``; column ``k*(order+1)+j``."""
    c = s.coefficients
    rows = []
    for d in range(s.order + 1):
        row = []
        for k in range(degree + 1):
            m = d - k
            for j in range(order + 1):
                row.append(Fraction(m) ** j * c[m] if m >= 0 else Fraction(0))
        den = 1
        for v in row:
            den = lcm(den, v.denominator)
        rows.append([int(v * den) for v in row])
    return rows


def _rank_mod_p(rows: list[list[int]], p: int = PRIME) -> tuple[int, list[int]]:
    """Rank mod ``p`` and the indices of a maximal independent set of rows."""
    basis: dict[int, list[int]] = {}
    chosen = []
    for idx, row in enumerate(rows):
        v = [x % p for x in row]
        for col, brow in basis.items():
            f = v[col]
            if f:
                v = [(a - f * b) % p for a, b in zip(v, brow)]
        lead = next((i for i, x in enumerate(v) if x), None)
        if lead is None:
            continue
        inv = pow(v[lead], -1, p)
        v = [(x * inv) % p for x in v]
        for col, brow in basis.items():
            f = brow[lead]
            if f:
                basis[col] = [(a - f * b) % p for a, b in zip(brow, v)]
        basis[lead] = v
        chosen.append(idx)
    return len(basis), chosen


def _echelon(rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Fraction-free (Bareiss) row echelon form; returns rows and pivot columns."""
    m = [list(r) for r in rows]
    pivots = []
    prev = 1
    top = 0
    for col in range(ncols):
        if top == len(m):
            break
        piv = next((i for i in range(top, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[top], m[piv] = m[piv], m[top]
        pr = m[top]
        a = pr[col]
        for i in range(top + 1, len(m)):
            row = m[i]
            b = row[col]
            m[i] = [(a * x - b * y) // prev for x, y in zip(row, pr)]
        # rows above the pivot are left alone; back substitution handles them
        prev = a
        pivots.append(col)
        top += 1
    return m[:top], pivots


def nullspace(rows: list[list[int]], ncols: int) -> list[list[Fraction]]:
    """Exact nullspace basis in reduced-echelon normal form."""
    ech, pivots = _echelon(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, col in reversed(list(zip(ech, pivots))):
            acc = sum((row[c] * x[c] for c in range(col + 1, ncols) if row[c] and x[c]), Fraction(0))
            x[col] = -acc / row[col]
        basis.append(x)
    return basis


# Fitting ---------------------------------------------------------------

@dataclass(frozen=True)
class AnnihilatorResult:
    operator: Optional[DifferentialOperator]
    order: int
    degree: int
    nullity: int
    status: str  # "found", "none", "exceeds_cap" or "insufficient_coefficients"
    first_hit: Optional[tuple[int, int]] = None  # schedule shape where a nullspace appeared
    minimal: bool = False  # no operator of lower order fits within the caps

    @property
    def unique(self) -> bool:
        return self.nullity == 1


def _canonical(vec: Sequence[Fraction], order: int, degree: int) -> DifferentialOperator:
    rows = [list(vec[k * (order + 1):(k + 1) * (order + 1)]) for k in range(degree + 1)]
    # divide by the largest common power of t so that P_0 is nonzero
    while rows and not any(rows[0]):
        rows.pop(0)
    while rows and not any(rows[-1]):
        rows.pop()
    width = max(j for row in rows for j, v in enumerate(row) if v) + 1
    rows = [row[:width] for row in rows]
    den = 1
    for row in rows:
        for v in row:
            den = lcm(den, v.denominator)
    ints = [[int(v * den) for v in row] for row in rows]
    g = 0
    for row in ints:
        for v in row:
            g = gcd(g, v)
    lead = next(v for v in reversed(ints[0]) if v)
    if lead < 0:
        g = -g
    return DifferentialOperator.of([[v // g for v in row] for row in ints])


def _fit(s: PowerSeries, order: int, degree: int) -> tuple[list[list[Fraction]], int]:
    rows = _system(s, order, degree)
    ncols = (order + 1) * (degree + 1)
    rank, chosen = _rank_mod_p(rows)
    if rank == ncols:
        return [], 0
    # solve on rows independent mod p, then confirm against every row
    basis = nullspace([rows[i] for i in chosen], ncols)
    if not all(sum(a * b for a, b in zip(row, vec)) == 0 for row in rows for vec in basis):
        basis = nullspace(rows, ncols)
    return basis, len(basis)


def _has_kernel(s: PowerSeries, order: int, degree: int) -> bool:
    """Nullspace test mod p.  A kernel over Q survives reduction mod p, so a
    False here is exact; a True is confirmed by the exact solve that follows."""
    rank, _ = _rank_mod_p(_system(s, order, degree))
    return rank < (order + 1) * (degree + 1)


def find_annihilator(s: PowerSeries, max_order: int, max_degree: int) -> Optional[DifferentialOperator]:
    """An operator of order <= ``max_order`` and degree <= ``max_degree`` killing
    ``s`` to its truncation, or None when there is none."""
    return fit_annihilator(s, max_order, max_degree).operator


def fit_annihilator(s: PowerSeries, order: int, degree: int) -> AnnihilatorResult:
    if order < 0 or degree < 0:
        raise ValueError("order and degree must be nonnegative")
    need = required_coefficients(order, degree)
    if len(s) < need:
        raise InsufficientCoefficientsError(
            f"order {order}, degree {degree} needs {need} coefficients, series has {len(s)}")
    basis, nullity = _fit(s, order, degree)
    if not basis:
        return AnnihilatorResult(None, order, degree, 0, "none")
    best = min(basis, key=lambda v: sum(1 for x in v if x))
    return AnnihilatorResult(_canonical(best, order, degree), order, degree, nullity, "found")


def search_schedule(max_order: int = ORDER_CAP, max_degree: int = DEGREE_CAP) -> list[tuple[int, int]]:
    """``(2,2), (3,3), ...`` up the diagonal, then raise the degree alone."""
    out = []
    r = 2
    while r <= min(max_order, max_degree):
        out.append((r, r))
        r += 1
    top = min(max_order, max_degree)
    for s in range(top + 1, max_degree + 1):
        out.append((max_order, s))
    return out


def search_annihilator(s: PowerSeries, max_order: int = ORDER_CAP,
                       max_degree: int = DEGREE_CAP, reduce: bool = True) -> AnnihilatorResult:
    """Walk the search schedule until a nullspace appears.

    Stops with ``insufficient_coefficients`` when the series is too short for
    the next shape and ``exceeds_cap`` when the schedule runs out.

    With ``reduce`` the hit is replaced by the operator of smallest order, and
    then smallest degree, inside the caps.  Annihilators form a principal left
    ideal, so a larger shape only holds left multiples of that operator, and a
    left multiple can add spurious roots to ``P_0``.  ``minimal`` is set when
    every lower order was ruled out up to ``max_degree``; a short series can
    leave that undecided.
    """
    last = (0, 0)
    for order, degree in search_schedule(max_order, max_degree):
        if len(s) < required_coefficients(order, degree):
            return AnnihilatorResult(None, order, degree, 0, "insufficient_coefficients")
        res = fit_annihilator(s, order, degree)
        if res.operator is not None:
            minimal = False
            if reduce:
                res, minimal = _reduce(s, res, max_degree)
            return AnnihilatorResult(res.operator, res.order, res.degree, res.nullity,
                                     "found", (order, degree), minimal)
        last = (order, degree)
    return AnnihilatorResult(None, last[0], last[1], 0, "exceeds_cap")


def stage_lengths(max_order: int = ORDER_CAP, max_degree: int = DEGREE_CAP) -> list[int]:
    """Series lengths worth trying: enough to rule out orders below 3, below
    ``max_order``, and finally to fill the largest shape."""
    out = []
    for order in (min(2, max_order - 1), max_order - 1, max_order):
        if order >= 0:
            n = required_coefficients(order, max_degree)
            if not out or n > out[-1]:
                out.append(n)
    return out


@dataclass(frozen=True)
class GrowthResult:
    result: AnnihilatorResult
    length: int          # coefficients used for the fit
    checked_to: int      # degree through which the operator was checked
    stable: bool         # the operator also kills the held-back coefficients


def search_with_growth(period: Callable[[int], PowerSeries], max_order: int = ORDER_CAP,
                       max_degree: int = DEGREE_CAP, margin: int = 10,
                       lengths: Optional[Sequence[int]] = None) -> GrowthResult:
    """Run :func:`search_annihilator` on longer and longer truncations.

    ``period(n)`` must return the series through ``t^n``.  Each stage fits on
    the first ``length`` coefficients and checks the operator on ``margin``
    more.  The search stops at the first stage whose operator is certified
    minimal, or when no stage is left.
    """
    stages = list(lengths or stage_lengths(max_order, max_degree))
    best = None
    longest = None
    for i, length in enumerate(stages):
        if i == 0:
            full = period(length - 1 + margin)
        else:
            # past the first stage, compute the longest series once and cut it down
            if longest is None:
                longest = period(max(stages) - 1 + margin)
            full = longest.truncate(length - 1 + margin)
        res = search_annihilator(full.truncate(length - 1), max_order, max_degree)
        stable = res.operator is not None and annihilates(res.operator, full)
        best = GrowthResult(res, length, full.order, stable)
        if res.status in ("none", "exceeds_cap") or (res.operator is not None and res.minimal):
            break
    return best


def _top_degree(n: int, order: int, max_degree: int) -> int:
    """Largest degree <= max_degree that ``n`` coefficients can fit at this order."""
    d = max_degree
    while d >= 0 and required_coefficients(order, d) > n:
        d -= 1
    return d


def _reduce(s: PowerSeries, hit: AnnihilatorResult, max_degree: int) -> tuple[AnnihilatorResult, bool]:
    certain = True   # every order tried so far was ruled out up to max_degree
    for order in range(hit.order + 1):
        if order < hit.order:
            top = _top_degree(len(s), order, max_degree)
            if top < 0 or not _has_kernel(s, order, top):
                certain = certain and top == max_degree
                continue
        else:
            top = hit.degree
        for degree in range(top + 1):
            if degree < top and not _has_kernel(s, order, degree):
                continue
            res = fit_annihilator(s, order, degree)
            if res.operator is not None:
                return res, certain
    return hit, certain


# Integer roots of P_0 ---------------------------------------------------

def _deflate(coeffs: list[int], root: int) -> list[int]:
    """Divide the polynomial (increasing powers) by ``x - root``."""
    n = len(coeffs) - 1
    out = [0] * n
    carry = 0
    for i in range(n, 0, -1):
        carry = coeffs[i] + carry * root
        out[i - 1] = carry
    return out


def integer_roots(coeffs: Sequence[int]) -> tuple[list[int], list[int]]:
    """Integer roots with multiplicity, and the cofactor left without any."""
    poly = list(coeffs)
    while poly and poly[-1] == 0:
        poly.pop()
    if not poly:
        raise ValueError("zero polynomial")
    roots = []
    while len(poly) > 1 and poly[0] == 0:
        roots.append(0)
        poly = poly[1:]
    while len(poly) > 1:
        lead = abs(poly[-1])
        bound = 1 + max(abs(c) for c in poly[:-1]) // lead
        a0 = abs(poly[0])
        hit = None
        for d in range(1, min(bound, a0) + 1):
            if a0 % d:
                continue
            for x in (d, -d):
                if _value(poly, x) == 0:
                    hit = x
                    break
            if hit is not None:
                break
        if hit is None:
            break
        roots.append(hit)
        poly = _deflate(poly, hit)
    return sorted(roots), poly


def _value(poly: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(poly):
        acc = acc * x + c
    return acc


def is_manifold_type(op: DifferentialOperator) -> bool:
    """True iff every complex root of ``P_0`` is an integer."""
    p0 = op.p(0)
    if not any(p0):
        raise ValueError("P_0 is zero")
    den = 1
    for v in p0:
        den = lcm(den, v.denominator)
    _, rest = integer_roots([int(v * den) for v in p0])
    return len(rest) == 1


# Text form ---------------------------------------------------------------

def _poly_text(coeffs: Sequence[Fraction]) -> str:
    parts = []
    for j in range(len(coeffs) - 1, -1, -1):
        c = coeffs[j]
        if not c:
            continue
        mag = abs(c)
        mono = "" if j == 0 else ("D" if j == 1 else f"D^{j}")
        if not mono:
            body = format_rational(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{format_rational(mag)}*{mono}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    if not parts:
        return "0"
    head_sign, head = parts[0]
    text = ("-" if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def operator_to_text(op: DifferentialOperator) -> str:
    """``(P_0(D)) + t*(P_1(D)) + t^2*(P_2(D)) + ...`` omitting zero rows."""
    groups = []
    for k, row in enumerate(op.coeffs):
        if not any(row):
            continue
        tpow = "" if k == 0 else ("t*" if k == 1 else f"t^{k}*")
        groups.append(f"{tpow}({_poly_text(row)})")
    return " + ".join(groups) if groups else "0"


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([tD])|(\^)|([-+*()]))")


def parse_operator(text: str) -> DifferentialOperator:
    """Read the text form back.  Products must keep ``t`` to the left of ``D``
    (the written order of the operator); anything else is rejected."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        num, sym, caret, op = m.groups()
        tokens.append(("num", num) if num else ("sym", sym) if sym else ("op", caret or op))
        pos = m.end()
    tokens.append(("end", ""))
    i = 0

    def peek():
        return tokens[i]

    def take(kind=None, value=None):
        nonlocal i
        tok = tokens[i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ValueError(f"expected {value or kind}, found {tok[1]!r}")
        i += 1
        return tok

    def expr():
        terms = {}
        sign = 1
        if peek() == ("op", "-"):
            take()
            sign = -1
        elif peek() == ("op", "+"):
            take()
        while True:
            for kj, v in product().items():
                terms[kj] = terms.get(kj, Fraction(0)) + sign * v
            if peek() in (("op", "+"), ("op", "-")):
                sign = 1 if take()[1] == "+" else -1
            else:
                return {kj: v for kj, v in terms.items() if v}

    def product():
        acc = {(0, 0): Fraction(1)}
        acc = _mul(acc, factor())
        while peek() == ("op", "*"):
            take()
            acc = _mul(acc, factor())
        return acc

    def exponent():
        if peek() == ("op", "^"):
            take()
            return int(take("num")[1])
        return 1

    def factor():
        kind, value = peek()
        if kind == "num":
            take()
            return {(0, 0): Fraction(value)}
        if kind == "sym":
            take()
            e = exponent()
            return {(e, 0) if value == "t" else (0, e): Fraction(1)}
        if (kind, value) == ("op", "("):
            take()
            inner = expr()
            take("op", ")")
            return inner
        raise ValueError(f"unexpected token {value!r}")

    def _mul(x, y):
        out = {}
        for (k1, j1), a in x.items():
            for (k2, j2), b in y.items():
                if j1 and k2:
                    raise ValueError("a power of t appears to the right of D")
                key = (k1 + k2, j1 + j2)
                out[key] = out.get(key, Fraction(0)) + a * b
        return out

    terms = expr()
    take("end")
    return DifferentialOperator.from_terms(terms)


__all__ = [
    "AnnihilatorResult", "DifferentialOperator", "GrowthResult", "InsufficientCoefficientsError",
    "annihilates", "apply", "find_annihilator", "fit_annihilator", "integer_roots",
    "is_manifold_type", "nullspace", "operator_to_text", "parse_operator",
    "required_coefficients", "search_annihilator", "search_schedule", "search_with_growth",
    "stage_lengths",
]
