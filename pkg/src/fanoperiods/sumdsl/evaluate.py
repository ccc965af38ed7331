"""Exact evaluation of summation specs into power series."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Callable, Optional, Sequence

from ..series import PowerSeries, normalize_prefactor
from .bounds import BoundsCertificate, RegionEnumerator, UnboundedSumError, check_bounded
from .expr import Add, Const, Fact, Harm, InvFact, Lin, Mul, Sign, SumBlock, SumSpec, TermExpr


class NegativeFactorialError(ValueError):
    """A factorial or harmonic argument went negative at an admissible tuple."""

    def __init__(self, what: str, value: int, point: Sequence[int], names: Sequence[str]):
        self.point = tuple(point)
        where = ", ".join(f"{n}={v}" for n, v in zip(names, point))
        super().__init__(f"{what} argument evaluates to {value} at ({where})")


class _Tables:
    """Factorials and harmonic numbers, grown on demand for one evaluation."""

    def __init__(self):
        self.fact = [1]
        self.harm = [Fraction(0)]

    def factorial(self, n: int) -> int:
        table = self.fact
        while len(table) <= n:
            table.append(table[-1] * len(table))
        return table[n]

    def harmonic(self, n: int) -> Fraction:
        table = self.harm
        while len(table) <= n:
            table.append(table[-1] + Fraction(1, len(table)))
        return table[n]


# Compiled terms map an index tuple to a pair (numerator, denominator) of ints.
Compiled = Callable[[tuple], tuple]


def _compile(node: TermExpr, tables: _Tables, names: Sequence[str]) -> Compiled:
    if isinstance(node, Const):
        pair = (node.value.numerator, node.value.denominator)
        return lambda x: pair
    if isinstance(node, (Fact, InvFact, Harm, Lin, Sign)):
        return _compile(Mul((node,)), tables, names)
    if isinstance(node, Add):
        parts = [_compile(t, tables, names) for t in node.terms]

        def add(x):
            num, den = 0, 1
            for p in parts:
                a, b = p(x)
                if b == den:
                    num += a
                else:
                    num, den = num * b + a * den, den * b
            return num, den
        return add
    if isinstance(node, Mul):
        cnum, cden = 1, 1
        facts, invs, lins, signs, harms, subs = [], [], [], [], [], []
        for f in node.factors:
            if isinstance(f, Const):
                cnum *= f.value.numerator
                cden *= f.value.denominator
            elif isinstance(f, Fact):
                facts.append(f.form)
            elif isinstance(f, InvFact):
                invs.append(f.form)
            elif isinstance(f, Lin):
                lins.append(f.form)
            elif isinstance(f, Sign):
                signs.append(f.form)
            elif isinstance(f, Harm):
                harms.append(f.form)
            else:
                subs.append(_compile(f, tables, names))
        fact = tables.factorial
        harm = tables.harmonic

        def mul(x):
            num, den = cnum, cden
            for form in facts:
                v = form(x)
                if v < 0:
                    raise NegativeFactorialError("factorial", v, x, names)
                num *= fact(v)
            for form in invs:
                v = form(x)
                if v < 0:
                    raise NegativeFactorialError("factorial", v, x, names)
                den *= fact(v)
            for form in lins:
                num *= form(x)
            for form in signs:
                if form(x) & 1:
                    num = -num
            for form in harms:
                v = form(x)
                if v < 0:
                    raise NegativeFactorialError("harmonic", v, x, names)
                h = harm(v)
                num *= h.numerator
                den *= h.denominator
            for sub in subs:
                a, b = sub(x)
                num *= a
                den *= b
            return num, den
        return mul
    raise TypeError(f"unknown term node {node!r}")


class _Accumulator:
    """Running sum of ``num/den`` pairs with a lazily reduced denominator."""

    __slots__ = ("num", "den")

    def __init__(self):
        self.num, self.den = 0, 1

    def add(self, num: int, den: int) -> None:
        if num == 0:
            return
        if den == self.den:
            self.num += num
        else:
            self.num, self.den = self.num * den + num * self.den, self.den * den
            # keep the running denominator small
            if self.den.bit_length() > 4096:
                q = Fraction(self.num, self.den)
                self.num, self.den = q.numerator, q.denominator

    def value(self) -> Fraction:
        return Fraction(self.num, self.den)


_LINEAR_KINDS = (Fact, InvFact, Lin, Sign, Harm)


def _staged_factors(node: TermExpr, k: int):
    """Split a flat product by the last index each factor depends on.

    Returns ``(cnum, cden, stages)`` where ``stages[i]`` lists
    ``(kind, constant, [(j, a), ...])`` for the factors whose forms involve
    ``x_i`` but no later index, or None when the term is not a flat product
    of linear-form factors (then the pointwise evaluator is used).
    """
    factors = node.factors if isinstance(node, Mul) else (node,)
    cnum, cden = 1, 1
    stages: list[list] = [[] for _ in range(k)]
    for f in factors:
        if isinstance(f, Const):
            cnum *= f.value.numerator
            cden *= f.value.denominator
            continue
        if not isinstance(f, _LINEAR_KINDS):
            return None
        used = [(j, a) for j, a in enumerate(f.form.coeffs) if a]
        if not used:
            return None
        stages[used[-1][0]].append((type(f), f.form.constant, used))
    return cnum, cden, stages


def _form_code(const: int, used: Sequence[tuple[int, int]]) -> str:
    parts = [str(const)] if const else []
    for j, a in used:
        parts.append(f"x{j}" if a == 1 else f"{a}*x{j}")
    return " + ".join(parts) if parts else "0"


def _bound_code(rows, i: int, lower: bool) -> str:
    exprs = []
    for a, pre, dcoef, const in rows:
        rest = [f"{dcoef}*d"] if dcoef else []
        rest.append(str(const))
        rest.extend(f"{c}*x{j}" for j, c in enumerate(pre[:i]) if c)
        body = " + ".join(rest)
        exprs.append(f"-(({body}) // {a})" if lower else f"({body}) // {a}")
    return exprs[0] if len(exprs) == 1 else ("max(" if lower else "min(") + ", ".join(exprs) + ")"


def _generate(enum: RegionEnumerator, k: int, stages) -> Optional[str]:
    """Source of ``run(d, F, HN, HD)`` summing one degree slice with nested loops."""
    lines = ["def run(d, F, HN, HD):", "    AN, AD = 0, 1", "    n0, q0 = CN, CD"]
    for i in range(k):
        lower, upper = enum._levels[i]
        if not lower or not upper:
            return None
        pad = "    " * (i + 1)
        lines.append(f"{pad}for x{i} in range({_bound_code(lower, i, True)}, {_bound_code(upper, i, False)} + 1):")
        pad += "    "
        num, den = f"n{i + 1}", f"q{i + 1}"
        lines.append(f"{pad}{num}, {den} = n{i}, q{i}")
        for slot, (kind, const, used) in enumerate(stages[i]):
            v = f"v{i}_{slot}"
            lines.append(f"{pad}{v} = {_form_code(const, used)}")
            # forms with nonnegative coefficients and constant cannot go negative
            safe = const >= 0 and all(a > 0 for _, a in used)
            point = "(" + ", ".join(f"x{j}" for j in range(i + 1)) + ",)"
            if kind in (Fact, InvFact, Harm) and not safe:
                what = "harmonic" if kind is Harm else "factorial"
                lines.append(f"{pad}if {v} < 0: NEG({what!r}, {v}, {point})")
            if kind is Fact:
                lines.append(f"{pad}{num} = {num} * F[{v}]")
            elif kind is InvFact:
                lines.append(f"{pad}{den} = {den} * F[{v}]")
            elif kind is Lin:
                lines.append(f"{pad}{num} = {num} * {v}")
            elif kind is Sign:
                lines.append(f"{pad}if {v} & 1: {num} = -{num}")
            else:
                lines.append(f"{pad}{num} = {num} * HN[{v}]")
                lines.append(f"{pad}{den} = {den} * HD[{v}]")
    pad = "    " * (k + 1)
    lines += [
        f"{pad}if n{k}:",
        f"{pad}    if q{k} == AD:",
        f"{pad}        AN += n{k}",
        f"{pad}    else:",
        f"{pad}        AN, AD = AN * q{k} + n{k} * AD, AD * q{k}",
        f"{pad}        if AD.bit_length() > 4096:",
        f"{pad}            g = gcd(AN, AD)",
        f"{pad}            AN, AD = AN // g, AD // g",
        "    return AN, AD",
    ]
    return "\n".join(lines)


def _accumulate_staged(block: SumBlock, order: int, tables: _Tables, out: list, staged) -> bool:
    """Nested-loop evaluation of a flat product term; False if it does not apply.

    A negative factorial argument at an outer loop level does not prove that
    an admissible tuple sits below it, so on that error nothing is added and
    the caller reruns the pointwise evaluator, which decides and reports.
    """
    cnum, cden, stages = staged
    enum = RegionEnumerator(block)
    source = _generate(enum, block.index_count, stages)
    if source is None:
        return False

    def neg(what, value, point):
        raise NegativeFactorialError(what, value, point, block.variables)

    scope = {"CN": cnum, "CD": cden, "NEG": neg, "gcd": gcd}
    exec(compile(source, "<sum block>", "exec"), scope)
    run = scope["run"]
    needs_harm = any(kind is Harm for stage in stages for kind, _, _ in stage)
    size = 64
    fact: list = []
    sums = {}
    try:
        for d in range(order + 1):
            if enum.slice_empty(d):
                continue
            size = max(size, 4 * d)
            while True:
                if len(fact) <= size:
                    tables.factorial(size)
                    fact = tables.fact[:size + 1]
                    hn, hd = [], []
                    if needs_harm:
                        tables.harmonic(size)
                        hn = [h.numerator for h in tables.harm[:size + 1]]
                        hd = [h.denominator for h in tables.harm[:size + 1]]
                try:
                    sums[d] = run(d, fact, hn, hd)
                    break
                except IndexError:
                    # an argument outgrew the tables; enlarge and redo this slice
                    size *= 2
    except NegativeFactorialError:
        return False
    for d, (num, den) in sums.items():
        if num:
            out[d] += Fraction(num, den)
    return True


def _accumulate_pointwise(block: SumBlock, order: int, tables: _Tables, out: list) -> None:
    term = _compile(block.term, tables, block.variables)
    enum = RegionEnumerator(block)
    for d in range(order + 1):
        acc = _Accumulator()
        for x in enum.points(d):
            acc.add(*term(x))
        if acc.num:
            out[d] += acc.value()


def _accumulate(block: SumBlock, order: int, tables: _Tables, out: list, staged: bool = True) -> None:
    # Products of factorials of linear forms (every weight-data sum) carry
    # partial products down the nested loops, so each factor is computed once
    # per prefix of the indices it depends on.
    split = _staged_factors(block.term, block.index_count) if staged and block.index_count else None
    if split is None or not _accumulate_staged(block, order, tables, out, split):
        _accumulate_pointwise(block, order, tables, out)


def evaluate_raw(spec: SumSpec, order: int, certify: bool = True, staged: bool = True) -> PowerSeries:
    """The summed series before any prefactor normalization.

    ``staged=False`` evaluates the term afresh at every index tuple; it is
    slower and kept as a cross-check.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if certify:
        cert = check_bounded(spec)
        if not isinstance(cert, BoundsCertificate):
            raise UnboundedSumError(spec.blocks[cert.block], cert.witness)
    tables = _Tables()
    out = [Fraction(0)] * (order + 1)
    for block in spec.blocks:
        _accumulate(block, order, tables, out, staged)
    return PowerSeries(out)


def evaluate_with_prefactor(spec: SumSpec, order: int) -> tuple[Fraction, PowerSeries]:
    """Return ``(c, series)``; ``c`` is 0 when the prefactor mode is ``none``."""
    raw = evaluate_raw(spec, order)
    if spec.prefactor == "auto":
        return normalize_prefactor(raw)
    return Fraction(0), raw


def evaluate(spec: SumSpec, order: int) -> PowerSeries:
    """Coefficients of ``t^0..t^order``; with prefactor ``auto`` the raw sum is
    multiplied by ``exp(-c t)`` where ``c`` is its linear coefficient."""
    return evaluate_with_prefactor(spec, order)[1]
