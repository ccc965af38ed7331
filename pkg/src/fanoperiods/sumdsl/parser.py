"""Recursive-descent parser for the summation language.

Grammar (whitespace is insignificant)::

    spec        := block ("+" block)*
    block       := "sum" "[" ident ("," ident)* "]" "{" field (";" field)* [";"] "}"
    field       := "constraints" ":" "[" [expr ("," expr)*] "]"
                 | "degree" ":" expr
                 | "term" ":" expr
                 | "prefactor" ":" ("auto" | "none")
    expr        := product (("+" | "-") product)*
    product     := unary (("*" | "/") unary)*
    unary       := "-" unary | power
    power       := atom ["^" atom]
    atom        := integer | ident | "fact" "(" expr ")" | "H" "(" expr ")" | "(" expr ")"

Index variables are implicitly nonnegative.  Constraint and degree entries
must be integer linear forms.  Inside terms, ``(-1)^(L)`` is a sign, ``^k``
with a literal ``k >= 0`` is repeated multiplication, and division is only
allowed by products of factorials, signs and nonzero constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .expr import (
    Add, Const, Fact, Harm, InvFact, LinearForm, Mul, Sign, SumBlock, SumSpec,
    TermExpr, linear_node, normalize,
)


class SumSpecError(ValueError):
    """Base class for errors raised while reading a sum specification."""

    def __init__(self, message: str, text: str = "", position: Optional[int] = None):
        self.message = message
        self.position = position
        if position is not None:
            line = text.count("\n", 0, position) + 1
            column = position - (text.rfind("\n", 0, position) + 1) + 1
            self.line, self.column = line, column
            message = f"{message} at line {line}, column {column} (offset {position})"
        else:
            self.line = self.column = None
        super().__init__(message)


class SumSpecSyntaxError(SumSpecError):
    pass


class SumSpecSemanticError(SumSpecError):
    pass


_INT = re.compile(r"\d+")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPS = "[]{}(),;:+-*/^"


@dataclass(frozen=True)
class _Tok:
    kind: str   # "int", "name", "op", "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, n = 0, len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _INT.match(text, pos)
        if m:
            toks.append(_Tok("int", m.group(), pos))
            pos = m.end()
            continue
        m = _NAME.match(text, pos)
        if m:
            toks.append(_Tok("name", m.group(), pos))
            pos = m.end()
            continue
        if text[pos] in _OPS:
            toks.append(_Tok("op", text[pos], pos))
            pos += 1
            continue
        raise SumSpecSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
    toks.append(_Tok("end", "", n))
    return toks


# Untyped syntax tree: tuples tagged by their first element, position second.

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: Optional[_Tok] = None) -> SumSpecSyntaxError:
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return SumSpecSyntaxError(f"{message}, found {found}", self.text, tok.pos)

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok.text != text or tok.kind == "end":
            raise self.error(f"expected {text!r}")
        return self.next()

    def name(self) -> _Tok:
        tok = self.peek()
        if tok.kind != "name":
            raise self.error("expected a name")
        return self.next()

    # expressions
    def expr(self):
        node = self.product()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.next()
            rhs = self.product()
            node = ("add" if op.text == "+" else "sub", op.pos, node, rhs)
        return node

    def product(self):
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in ("*", "/"):
            op = self.next()
            rhs = self.unary()
            node = ("mul" if op.text == "*" else "div", op.pos, node, rhs)
        return node

    def unary(self):
        if self.peek().kind == "op" and self.peek().text == "-":
            op = self.next()
            return ("neg", op.pos, self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            op = self.next()
            exponent = self.atom()
            return ("pow", op.pos, base, exponent)
        return base

    def atom(self):
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return ("int", tok.pos, int(tok.text))
        if tok.kind == "name":
            self.next()
            if tok.text in ("fact", "H") and self.peek().text == "(":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", tok.pos, tok.text, arg)
            return ("var", tok.pos, tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.next()
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.error("expected a number, name, fact(...), H(...) or '('")

    # structure
    def spec(self) -> list[dict]:
        blocks = [self.block()]
        while self.peek().kind == "op" and self.peek().text == "+":
            self.next()
            blocks.append(self.block())
        if self.peek().kind != "end":
            raise self.error("expected end of input or '+ sum'")
        return blocks

    def block(self) -> dict:
        tok = self.peek()
        if tok.kind != "name" or tok.text != "sum":
            raise self.error("expected 'sum'")
        self.next()
        self.expect("[")
        names = [self.name()]
        while self.peek().text == ",":
            self.next()
            names.append(self.name())
        self.expect("]")
        self.expect("{")
        fields: dict = {"names": names, "pos": tok.pos}
        while True:
            key = self.name()
            if key.text not in ("constraints", "degree", "term", "prefactor"):
                raise SumSpecSyntaxError(f"unknown field {key.text!r}", self.text, key.pos)
            if key.text in fields:
                raise SumSpecSyntaxError(f"duplicate field {key.text!r}", self.text, key.pos)
            self.expect(":")
            if key.text == "constraints":
                self.expect("[")
                items = []
                if self.peek().text != "]":
                    items.append(self.expr())
                    while self.peek().text == ",":
                        self.next()
                        items.append(self.expr())
                self.expect("]")
                fields["constraints"] = items
            elif key.text == "prefactor":
                mode = self.name()
                if mode.text not in ("auto", "none"):
                    raise SumSpecSyntaxError("prefactor must be 'auto' or 'none'", self.text, mode.pos)
                fields["prefactor"] = (mode.text, mode.pos)
            else:
                fields[key.text] = self.expr()
            if self.peek().text == ";":
                self.next()
            if self.peek().text == "}":
                self.next()
                break
            if self.peek().kind != "name":
                raise self.error("expected ';' or '}'")
        for required in ("degree", "term"):
            if required not in fields:
                raise SumSpecSyntaxError(f"block is missing its {required!r} field", self.text, tok.pos)
        return fields


class _Lowerer:
    """Turn the untyped tree into term nodes for one block."""

    def __init__(self, text: str, names: list[str]):
        self.text = text
        self.names = names
        self.index = {n: i for i, n in enumerate(names)}

    def fail(self, message: str, pos: int) -> SumSpecSemanticError:
        return SumSpecSemanticError(message, self.text, pos)

    def rational_linear(self, node):
        """Return (coeffs, constant) as Fractions, or None if not affine."""
        tag = node[0]
        k = len(self.names)
        if tag == "int":
            return [Fraction(0)] * k, Fraction(node[2])
        if tag == "var":
            if node[2] not in self.index:
                raise self.fail(f"unknown index variable {node[2]!r}", node[1])
            c = [Fraction(0)] * k
            c[self.index[node[2]]] = Fraction(1)
            return c, Fraction(0)
        if tag == "neg":
            inner = self.rational_linear(node[2])
            if inner is None:
                return None
            return [-a for a in inner[0]], -inner[1]
        if tag in ("add", "sub"):
            a = self.rational_linear(node[2])
            b = self.rational_linear(node[3])
            if a is None or b is None:
                return None
            s = 1 if tag == "add" else -1
            return [x + s * y for x, y in zip(a[0], b[0])], a[1] + s * b[1]
        if tag == "mul":
            a = self.rational_linear(node[2])
            b = self.rational_linear(node[3])
            if a is None or b is None:
                return None
            if not any(a[0]):
                return [a[1] * y for y in b[0]], a[1] * b[1]
            if not any(b[0]):
                return [b[1] * x for x in a[0]], b[1] * a[1]
            return None
        if tag == "div":
            a = self.rational_linear(node[2])
            b = self.rational_linear(node[3])
            if a is None or b is None or any(b[0]):
                return None
            if b[1] == 0:
                raise self.fail("division by zero", node[1])
            return [x / b[1] for x in a[0]], a[1] / b[1]
        return None

    def integer_form(self, node, what: str) -> LinearForm:
        lin = self.rational_linear(node)
        pos = node[1]
        if lin is None:
            raise self.fail(f"{what} must be a linear form in the index variables", pos)
        coeffs, const = lin
        if any(c.denominator != 1 for c in coeffs) or const.denominator != 1:
            raise self.fail(f"{what} must have integer coefficients", pos)
        return LinearForm(tuple(int(c) for c in coeffs), int(const))

    def term(self, node) -> TermExpr:
        lin = self.rational_linear(node)
        if lin is not None:
            return linear_node(*lin)
        tag = node[0]
        if tag == "var":
            raise self.fail(f"unknown index variable {node[2]!r}", node[1])
        if tag == "call":
            form = self.integer_form(node[3], f"argument of {node[2]}")
            return Fact(form) if node[2] == "fact" else Harm(form)
        if tag == "neg":
            return Mul((Const(Fraction(-1)), self.term(node[2])))
        if tag == "add":
            return Add((self.term(node[2]), self.term(node[3])))
        if tag == "sub":
            return Add((self.term(node[2]), Mul((Const(Fraction(-1)), self.term(node[3])))))
        if tag == "mul":
            return Mul((self.term(node[2]), self.term(node[3])))
        if tag == "div":
            return Mul((self.term(node[2]), self.invert(self.term(node[3]), node[3][1])))
        if tag == "pow":
            base, exponent = node[2], node[3]
            blin = self.rational_linear(base)
            if blin is not None and not any(blin[0]) and blin[1] == -1:
                return Sign(self.integer_form(exponent, "sign exponent"))
            elin = self.rational_linear(exponent)
            if elin is None or any(elin[0]) or elin[1].denominator != 1 or elin[1] < 0:
                raise self.fail("exponent must be a nonnegative integer literal "
                                "unless the base is -1", exponent[1])
            value = self.term(base)
            return Mul(tuple([value] * int(elin[1]))) if elin[1] else Const(Fraction(1))
        raise self.fail("unsupported expression", node[1])

    def invert(self, value: TermExpr, pos: int) -> TermExpr:
        value = normalize(value, self.names)
        if isinstance(value, Const):
            if value.value == 0:
                raise self.fail("division by zero", pos)
            return Const(1 / value.value)
        if isinstance(value, Fact):
            return InvFact(value.form)
        if isinstance(value, InvFact):
            return Fact(value.form)
        if isinstance(value, Sign):
            return value
        if isinstance(value, Mul):
            return Mul(tuple(self.invert(f, pos) for f in value.factors))
        raise self.fail("only factorials, signs and constants may appear in a denominator", pos)


def parse(text: str) -> SumSpec:
    """Parse summation text into a :class:`SumSpec`.

    Raises :class:`SumSpecSyntaxError` or :class:`SumSpecSemanticError`, both
    carrying the offending offset, line and column.
    """
    raw_blocks = _Parser(text).spec()
    blocks = []
    modes = set()
    for raw in raw_blocks:
        names = [t.text for t in raw["names"]]
        seen = set()
        for t in raw["names"]:
            if t.text in seen:
                raise SumSpecSemanticError(f"index variable {t.text!r} declared twice", text, t.pos)
            if t.text in ("sum", "fact", "H", "constraints", "degree", "term", "prefactor"):
                raise SumSpecSemanticError(f"{t.text!r} is reserved", text, t.pos)
            seen.add(t.text)
        low = _Lowerer(text, names)
        constraints = tuple(low.integer_form(c, "constraint") for c in raw.get("constraints", []))
        degree = low.integer_form(raw["degree"], "degree")
        term = normalize(low.term(raw["term"]), names)
        mode, mode_pos = raw.get("prefactor", ("none", raw["pos"]))
        modes.add(mode)
        if len(modes) > 1:
            raise SumSpecSemanticError("all blocks must share one prefactor mode", text, mode_pos)
        blocks.append(SumBlock(tuple(names), constraints, degree, term))
    return SumSpec(tuple(blocks), modes.pop())


def serialize(spec: SumSpec) -> str:
    return spec.serialize()
