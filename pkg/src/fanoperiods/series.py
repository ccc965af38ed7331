"""Truncated power series in one variable with exact rational coefficients.

A :class:`PowerSeries` carries coefficients for degrees ``0..N`` where ``N`` is
its truncation order.  Binary operations truncate to the smaller order, so a
result never claims more precision than its inputs.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction]


def as_fraction(value: Union[Rational, str]) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


def format_rational(value: Rational) -> str:
    """Render ``p/q`` in lowest terms, or a bare integer."""
    q = as_fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class PowerSeries:
    """Immutable truncated series ``c_0 + c_1 t + ... + c_N t^N``."""

    __slots__ = ("_coeffs",)

    def __init__(self, coefficients: Iterable[Union[Rational, str]]):
        coeffs = tuple(as_fraction(c) for c in coefficients)
        if not coeffs:
            raise ValueError("a series needs at least the degree-0 coefficient")
        self._coeffs = coeffs

    @classmethod
    def constant(cls, value: Rational, order: int) -> "PowerSeries":
        return cls([value] + [0] * order)

    @classmethod
    def monomial(cls, degree: int, order: int, value: Rational = 1) -> "PowerSeries":
        coeffs = [0] * (order + 1)
        if degree <= order:
            coeffs[degree] = value
        return cls(coeffs)

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self._coeffs

    @property
    def order(self) -> int:
        return len(self._coeffs) - 1

    def __getitem__(self, degree: int) -> Fraction:
        return self._coeffs[degree]

    def __len__(self) -> int:
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __repr__(self) -> str:
        shown = ", ".join(format_rational(c) for c in self._coeffs[:8])
        tail = ", ..." if len(self._coeffs) > 8 else ""
        return f"PowerSeries([{shown}{tail}], order={self.order})"

    def truncate(self, order: int) -> "PowerSeries":
        if order > self.order:
            raise ValueError(f"cannot extend a series of order {self.order} to {order}")
        return PowerSeries(self._coeffs[: order + 1])

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries(a + b for a, b in zip(self._coeffs[: n + 1], other._coeffs[: n + 1]))

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries(a - b for a, b in zip(self._coeffs[: n + 1], other._coeffs[: n + 1]))

    def scale(self, factor: Rational) -> "PowerSeries":
        f = as_fraction(factor)
        return PowerSeries(f * c for c in self._coeffs)

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        return multiply(self, other)

    def to_strings(self) -> list[str]:
        return [format_rational(c) for c in self._coeffs]


def multiply(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Cauchy product truncated to ``min(a.order, b.order)``."""
    n = min(a.order, b.order)
    ac, bc = a.coefficients, b.coefficients
    out = []
    for d in range(n + 1):
        total = Fraction(0)
        for i in range(d + 1):
            x = ac[i]
            if x:
                y = bc[d - i]
                if y:
                    total += x * y
        out.append(total)
    return PowerSeries(out)


def regularize(g: PowerSeries) -> PowerSeries:
    """Multiply the degree-d coefficient by d!."""
    return PowerSeries(c * factorial(d) for d, c in enumerate(g.coefficients))


def unregularize(g: PowerSeries) -> PowerSeries:
    """Inverse of :func:`regularize`."""
    return PowerSeries(c / factorial(d) for d, c in enumerate(g.coefficients))


def exp_linear(c: Rational, order: int) -> PowerSeries:
    """Truncated ``exp(c t) = sum (c t)^k / k!``."""
    c = as_fraction(c)
    coeffs = [Fraction(1)]
    for k in range(1, order + 1):
        coeffs.append(coeffs[-1] * c / k)
    return PowerSeries(coeffs)


def normalize_prefactor(s: PowerSeries) -> tuple[Fraction, PowerSeries]:
    """Return ``(c, exp(-c t) * s)`` with c the linear coefficient of ``s``.

    The output has constant term 1 and vanishing linear term.
    """
    if s[0] != 1:
        raise ValueError(f"degree-0 coefficient must be 1, got {format_rational(s[0])}")
    if s.order == 0:
        return Fraction(0), s
    c = s[1]
    if c == 0:
        return c, s
    return c, multiply(exp_linear(-c, s.order), s)


def series_from_strings(values: Sequence[str]) -> PowerSeries:
    return PowerSeries(values)
