"""Exact symbolic scalar kernel: radical arithmetic, angles, parsing."""

from .angles import ExactAngle, cos, sin, sin_cos
from .errors import (
    DivisionByZero,
    EvalError,
    KernelError,
    NegativeRadicand,
    NestingDepthExceeded,
    ParseError,
    PrecisionExhausted,
    UnrationalizableDenominator,
    UnsupportedAngle,
    UnsupportedPiPower,
)
from .intervals import Interval, fraction_to_decimal_str, pi_interval
from .latex import MathAst, eval_ast, parse_and_eval, parse_latex, ratio_parts
from .scalar import (
    SYMBOLIC_NONZERO,
    SYMBOLIC_ZERO,
    BasisTerm,
    ExactScalar,
    ZeroVerdict,
    div,
    equals,
    is_zero,
    sqrt,
)

__all__ = [
    "BasisTerm",
    "ExactScalar",
    "ExactAngle",
    "Interval",
    "MathAst",
    "ZeroVerdict",
    "SYMBOLIC_ZERO",
    "SYMBOLIC_NONZERO",
    "sin_cos",
    "sin",
    "cos",
    "div",
    "sqrt",
    "is_zero",
    "equals",
    "parse_latex",
    "eval_ast",
    "parse_and_eval",
    "ratio_parts",
    "pi_interval",
    "fraction_to_decimal_str",
    "KernelError",
    "DivisionByZero",
    "UnrationalizableDenominator",
    "NegativeRadicand",
    "NestingDepthExceeded",
    "UnsupportedPiPower",
    "UnsupportedAngle",
    "PrecisionExhausted",
    "ParseError",
    "EvalError",
]
