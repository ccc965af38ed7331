"""Syntax objects for constrained factorial sums.

A :class:`SumSpec` is a sum of one or more :class:`SumBlock` objects sharing a
prefactor mode.  Each block ranges over nonnegative integer index tuples
satisfying a list of linear constraints ``L >= 0``; the block contributes
``term(x) * t^degree(x)`` for every admissible tuple ``x``.

Term expressions are trees over a handful of node types.  :func:`normalize`
puts a tree into the canonical shape used by the serializer, so that
``render(parse(text))`` is a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, gcd
from typing import Sequence, Union

from ..series import format_rational


@dataclass(frozen=True)
class LinearForm:
    """``constant + sum coeffs[i] * x_i`` with integer coefficients."""

    coeffs: tuple[int, ...]
    constant: int = 0

    @classmethod
    def variable(cls, index: int, count: int) -> "LinearForm":
        return cls(tuple(1 if i == index else 0 for i in range(count)))

    @classmethod
    def const(cls, value: int, count: int) -> "LinearForm":
        return cls((0,) * count, value)

    def __call__(self, x: Sequence[int]) -> int:
        total = self.constant
        for a, v in zip(self.coeffs, x):
            if a:
                total += a * v
        return total

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
                          self.constant + other.constant)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def __neg__(self) -> "LinearForm":
        return LinearForm(tuple(-a for a in self.coeffs), -self.constant)

    def scale(self, k: int) -> "LinearForm":
        return LinearForm(tuple(k * a for a in self.coeffs), k * self.constant)

    @property
    def is_constant(self) -> bool:
        return not any(self.coeffs)

    def key(self) -> tuple:
        return (tuple(-a for a in self.coeffs), self.constant)

    def render(self, names: Sequence[str]) -> str:
        parts: list[str] = []
        for a, name in zip(self.coeffs, names):
            if a == 0:
                continue
            mag = abs(a)
            body = name if mag == 1 else f"{mag}*{name}"
            if not parts:
                parts.append(body if a > 0 else "-" + body)
            else:
                parts.append(("+" if a > 0 else "-") + body)
        if self.constant or not parts:
            c = self.constant
            if not parts:
                parts.append(str(c))
            else:
                parts.append(("+" if c > 0 else "-") + str(abs(c)))
        return "".join(parts)


# Term nodes.  ``kind`` drives canonical ordering inside products.

@dataclass(frozen=True)
class Const:
    value: Fraction
    kind = 0


@dataclass(frozen=True)
class Sign:
    """``(-1)^form``."""
    form: LinearForm
    kind = 1


@dataclass(frozen=True)
class Fact:
    form: LinearForm
    kind = 2


@dataclass(frozen=True)
class Lin:
    """The integer value of a linear form used as a factor, e.g. ``(m-l)``."""
    form: LinearForm
    kind = 3


@dataclass(frozen=True)
class Harm:
    """Harmonic number ``H(form)`` with ``H(0) = 0``."""
    form: LinearForm
    kind = 4


@dataclass(frozen=True)
class Add:
    terms: tuple
    kind = 5


@dataclass(frozen=True)
class InvFact:
    form: LinearForm
    kind = 6


@dataclass(frozen=True)
class Mul:
    factors: tuple
    kind = 7


TermExpr = Union[Const, Sign, Fact, Lin, Harm, Add, InvFact, Mul]

ONE = Const(Fraction(1))
ZERO = Const(Fraction(0))


def _mod2(form: LinearForm) -> LinearForm:
    return LinearForm(tuple(a % 2 for a in form.coeffs), form.constant % 2)


def linear_node(coeffs: Sequence[Fraction], constant: Fraction) -> TermExpr:
    """Canonical node for a rational linear form.

    The form is split as ``scalar * primitive`` where the primitive integer
    form has coprime entries and a positive last nonzero coefficient.
    """
    coeffs = [Fraction(c) for c in coeffs]
    constant = Fraction(constant)
    if not any(coeffs):
        return Const(constant)
    den = 1
    for v in coeffs + [constant]:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in coeffs]
    c0 = int(constant * den)
    g = 0
    for v in ints + [c0]:
        g = gcd(g, v)
    last = [v for v in ints if v][-1]
    if last < 0:
        g = -g
    prim = LinearForm(tuple(v // g for v in ints), c0 // g)
    scalar = Fraction(g, den)
    if scalar == 1:
        return Lin(prim)
    return Mul((Const(scalar), Lin(prim)))


def _as_linear(node: TermExpr, count: int):
    """Return (coeffs, constant) when ``node`` is a canonical linear node."""
    if isinstance(node, Const):
        return [Fraction(0)] * count, node.value
    if isinstance(node, Lin):
        return [Fraction(a) for a in node.form.coeffs], Fraction(node.form.constant)
    if (isinstance(node, Mul) and len(node.factors) == 2
            and isinstance(node.factors[0], Const) and isinstance(node.factors[1], Lin)):
        s = node.factors[0].value
        f = node.factors[1].form
        return [s * a for a in f.coeffs], s * f.constant
    return None


def _sort_key(node: TermExpr, names: Sequence[str]) -> tuple:
    if isinstance(node, (Sign, Fact, Lin, Harm, InvFact)):
        return (node.kind, node.form.key(), "")
    if isinstance(node, Const):
        return (node.kind, (), "")
    return (node.kind, (), render_term(node, names))


def normalize(node: TermExpr, names: Sequence[str]) -> TermExpr:
    """Flatten, fold constants, merge signs and sort commutative operands."""
    count = len(names)
    if isinstance(node, Lin):
        return linear_node(node.form.coeffs, node.form.constant)
    if isinstance(node, Sign):
        f = _mod2(node.form)
        if f.is_constant:
            return Const(Fraction(-1 if f.constant else 1))
        return Sign(f)
    if isinstance(node, (Const, Fact, InvFact, Harm)):
        return node
    if isinstance(node, Add):
        flat: list[TermExpr] = []
        lin_c = [Fraction(0)] * count
        lin_k = Fraction(0)
        stack = list(node.terms)
        while stack:
            child = normalize(stack.pop(0), names)
            if isinstance(child, Add):
                stack = list(child.terms) + stack
                continue
            lin = _as_linear(child, count)
            if lin is not None:
                lin_c = [a + b for a, b in zip(lin_c, lin[0])]
                lin_k += lin[1]
            else:
                flat.append(child)
        if any(lin_c) or lin_k:
            flat.append(linear_node(lin_c, lin_k))
        flat.sort(key=lambda n: (not isinstance(n, Const), render_term(n, names)))
        if not flat:
            return ZERO
        if len(flat) == 1:
            return flat[0]
        return Add(tuple(flat))
    if isinstance(node, Mul):
        const = Fraction(1)
        sign = LinearForm((0,) * count)
        others: list[TermExpr] = []
        stack = list(node.factors)
        while stack:
            child = normalize(stack.pop(0), names)
            if isinstance(child, Mul):
                stack = list(child.factors) + stack
                continue
            if isinstance(child, Const):
                const *= child.value
            elif isinstance(child, Sign):
                sign = sign + child.form
            else:
                others.append(child)
        if const == 0:
            return ZERO
        sign = _mod2(sign)
        if sign.constant:
            const = -const
            sign = LinearForm(sign.coeffs, 0)
        if not sign.is_constant:
            others.append(Sign(sign))
        others.sort(key=lambda n: _sort_key(n, names))
        if const != 1 or not others:
            others.insert(0, Const(const))
        if len(others) == 1:
            return others[0]
        return Mul(tuple(others))
    raise TypeError(f"unknown term node {node!r}")


def _render_factor(node: TermExpr, names: Sequence[str]) -> str:
    if isinstance(node, Fact) or isinstance(node, InvFact):
        return f"fact({node.form.render(names)})"
    if isinstance(node, Harm):
        return f"H({node.form.render(names)})"
    if isinstance(node, Sign):
        return f"(-1)^({node.form.render(names)})"
    if isinstance(node, Lin):
        text = node.form.render(names)
        return text if text in names else f"({text})"
    if isinstance(node, Add):
        return f"({render_term(node, names)})"
    if isinstance(node, Const):
        text = format_rational(node.value)
        return text if node.value >= 0 and "/" not in text else f"({text})"
    if isinstance(node, Mul):
        return f"({render_term(node, names)})"
    raise TypeError(f"unknown term node {node!r}")


def _group(factors: Sequence[TermExpr], names: Sequence[str]) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(factors):
        j = i
        while j + 1 < len(factors) and factors[j + 1] == factors[i]:
            j += 1
        text = _render_factor(factors[i], names)
        count = j - i + 1
        out.append(text if count == 1 else f"{text}^{count}")
        i = j + 1
    return out


def render_term(node: TermExpr, names: Sequence[str]) -> str:
    """Canonical text of an already normalized term."""
    if isinstance(node, Const):
        return format_rational(node.value)
    if isinstance(node, Add):
        pieces: list[str] = []
        for k, child in enumerate(node.terms):
            text = render_term(child, names)
            if k == 0:
                pieces.append(text)
            elif text.startswith("-"):
                pieces.append(" - " + text[1:])
            else:
                pieces.append(" + " + text)
        return "".join(pieces)
    if isinstance(node, Mul):
        factors = list(node.factors)
        lead = ""
        if factors and isinstance(factors[0], Const):
            value = factors.pop(0).value
            if value == -1:
                lead = "-"
            elif value < 0:
                lead = "-" + format_rational(-value)
            else:
                lead = format_rational(value)
        numer = [f for f in factors if not isinstance(f, InvFact)]
        denom = [f for f in factors if isinstance(f, InvFact)]
        num_parts = _group(numer, names)
        if lead and lead != "-":
            num_parts.insert(0, lead)
            lead = ""
        text = " * ".join(num_parts) if num_parts else "1"
        text = lead + text
        if denom:
            den_parts = _group(denom, names)
            den = den_parts[0] if len(den_parts) == 1 else "(" + " * ".join(den_parts) + ")"
            text = f"{text} / {den}"
        return text
    if isinstance(node, InvFact):
        return f"1 / fact({node.form.render(names)})"
    if isinstance(node, Lin):
        return node.form.render(names)
    return _render_factor(node, names)


@dataclass(frozen=True)
class SumBlock:
    variables: tuple[str, ...]
    constraints: tuple[LinearForm, ...]
    degree: LinearForm
    term: TermExpr

    @property
    def index_count(self) -> int:
        return len(self.variables)

    def render(self, prefactor: str) -> str:
        names = self.variables
        cons = ", ".join(c.render(names) for c in self.constraints)
        return (f"sum[{','.join(names)}] {{ constraints: [{cons}]; "
                f"degree: {self.degree.render(names)}; "
                f"term: {render_term(self.term, names)}; prefactor: {prefactor} }}")


PREFACTOR_MODES = ("auto", "none")


@dataclass(frozen=True)
class SumSpec:
    """One or more summation blocks whose raw sums are added.

    With ``prefactor == "auto"`` the total is normalized by ``exp(-c t)``
    where ``c`` is its linear coefficient.
    """

    blocks: tuple[SumBlock, ...]
    prefactor: str = "none"

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("a sum needs at least one block")
        if self.prefactor not in PREFACTOR_MODES:
            raise ValueError(f"prefactor must be one of {PREFACTOR_MODES}")

    @classmethod
    def single(cls, variables: Sequence[str], constraints: Sequence[LinearForm],
               degree: LinearForm, term: TermExpr, prefactor: str = "none") -> "SumSpec":
        names = tuple(variables)
        block = SumBlock(names, tuple(constraints), degree, normalize(term, names))
        return cls((block,), prefactor)

    def serialize(self) -> str:
        return " + ".join(b.render(self.prefactor) for b in self.blocks)

    def __str__(self) -> str:
        return self.serialize()


def factorial_value(n: int) -> int:
    return factorial(n)
