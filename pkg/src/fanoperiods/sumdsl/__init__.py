"""A small language for constrained multi-index factorial sums."""

from .bounds import (
    BoundsCertificate, Rejection, UnboundedSumError, VariableBound, check_bounded,
    is_bounded,
)
from .evaluate import NegativeFactorialError, evaluate, evaluate_raw, evaluate_with_prefactor
from .expr import (
    Add, Const, Fact, Harm, InvFact, Lin, LinearForm, Mul, Sign, SumBlock, SumSpec,
    TermExpr, normalize, render_term,
)
from .parser import SumSpecError, SumSpecSemanticError, SumSpecSyntaxError, parse, serialize

__all__ = [
    "Add", "BoundsCertificate", "Const", "Fact", "Harm", "InvFact", "Lin", "LinearForm",
    "Mul", "NegativeFactorialError", "Rejection", "Sign", "SumBlock", "SumSpec",
    "SumSpecError", "SumSpecSemanticError", "SumSpecSyntaxError", "TermExpr",
    "UnboundedSumError", "VariableBound", "check_bounded", "evaluate", "evaluate_raw",
    "evaluate_with_prefactor", "is_bounded", "normalize", "parse", "render_term", "serialize",
]
