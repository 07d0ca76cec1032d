"""Parser and evaluator for boxed-answer math expressions.

Accepts the LaTeX subset emitted by chain-of-thought responses
(\\frac, \\sqrt with optional index, \\pi, \\cdot, \\times, powers,
parentheses, decimal and integer literals, a:b ratios) as well as the
kernel's plain canonical-string syntax (sqrt(...), pi, /, *).  Decimal
literals evaluate to exact rationals; degree markers are treated as
dimensionless and dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import EvalError, KernelError, ParseError
from .scalar import ExactScalar, div, sqrt

# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    literal: str

    @property
    def value(self) -> Fraction:
        return Fraction(self.literal) if "." not in self.literal else _decimal_fraction(self.literal)


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: "Node"


@dataclass(frozen=True)
class Root:
    arg: "Node"
    index: int = 2


@dataclass(frozen=True)
class Group:
    arg: "Node"


@dataclass(frozen=True)
class Ratio:
    left: "Node"
    right: "Node"


Node = Union[Num, Pi, Neg, BinOp, Pow, Root, Group, Ratio]


@dataclass(frozen=True)
class MathAst:
    root: Node


def _decimal_fraction(lit: str) -> Fraction:
    whole, frac = lit.split(".")
    whole = whole or "0"
    return Fraction(int(whole) * 10 ** len(frac) + int(frac or "0"), 10 ** len(frac))


# -- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<num>\d+\.\d+|\d+\.|\.\d+|\d+)
  | (?P<cmd>\\[a-zA-Z]+)
  | (?P<sym>[+\-*/^(){}\[\]:])
  | (?P<name>[a-zA-Z]+)
  | (?P<ws>\s+)
  | (?P<other>.)
    """,
    re.VERBOSE,
)

_IGNORED_CMDS = {
    r"\left", r"\right", r"\,", r"\;", r"\!", r"\limits",
    r"\displaystyle", r"\mathrm", r"\text", r"\circ", r"\degree",
}
_MUL_CMDS = {r"\cdot", r"\times"}
_FRAC_CMDS = {r"\frac", r"\dfrac", r"\tfrac"}


@dataclass
class _Tok:
    kind: str  # 'num' | 'op' | 'frac' | 'sqrt' | 'pi' | 'name'
    text: str
    pos: int


def _tokenize(s: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    while i < len(s):
        m = _TOKEN_RE.match(s, i)
        if m is None:
            raise ParseError("cannot tokenize", i)
        i = m.end()
        if m.lastgroup == "ws":
            continue
        text = m.group()
        pos = m.start()
        if m.lastgroup == "num":
            if text.endswith("."):
                text = text[:-1]
            if text.startswith("."):
                text = "0" + text
            toks.append(_Tok("num", text, pos))
        elif m.lastgroup == "cmd":
            if text in _IGNORED_CMDS:
                continue
            if text in _MUL_CMDS:
                toks.append(_Tok("op", "*", pos))
            elif text in _FRAC_CMDS:
                toks.append(_Tok("frac", text, pos))
            elif text == r"\sqrt":
                toks.append(_Tok("sqrt", text, pos))
            elif text == r"\pi":
                toks.append(_Tok("pi", text, pos))
            else:
                raise ParseError(f"unsupported command {text}", pos)
        elif m.lastgroup == "sym":
            toks.append(_Tok("op", text, pos))
        elif m.lastgroup == "name":
            # split multi-letter runs: "pi" and "sqrt" are keywords
            rest = text
            p = pos
            while rest:
                if rest.startswith("pi"):
                    toks.append(_Tok("pi", "pi", p))
                    rest, p = rest[2:], p + 2
                elif rest.startswith("sqrt"):
                    toks.append(_Tok("sqrt", "sqrt", p))
                    rest, p = rest[4:], p + 4
                else:
                    raise ParseError(f"unknown identifier {rest!r}", p)
        else:
            if text == "$" or text == "°":
                if text == "°":
                    continue
                continue
            raise ParseError(f"unexpected character {text!r}", pos)
    return toks


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, toks: list[_Tok], src_len: int):
        self.toks = toks
        self.i = 0
        self.src_len = src_len

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> _Tok:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input", self.src_len)
        self.i += 1
        return t

    def expect_op(self, text: str) -> _Tok:
        t = self.next()
        if t.kind != "op" or t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.pos)
        return t

    def parse(self) -> Node:
        node = self.parse_expr()
        t = self.peek()
        if t is not None and t.kind == "op" and t.text == ":":
            self.next()
            right = self.parse_expr()
            node = Ratio(node, right)
            t = self.peek()
        if t is not None and self.peek() is not None:
            t = self.peek()
            raise ParseError(f"trailing input {t.text!r}", t.pos)
        return node

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while True:
            t = self.peek()
            if t is not None and t.kind == "op" and t.text in "+-":
                self.next()
                rhs = self.parse_term()
                node = BinOp(t.text, node, rhs)
            else:
                return node

    def parse_term(self) -> Node:
        node = self.parse_unary()
        while True:
            t = self.peek()
            if t is not None and t.kind == "op" and t.text in "*/":
                self.next()
                rhs = self.parse_unary()
                node = BinOp(t.text, node, rhs)
            elif t is not None and self._starts_atom(t):
                rhs = self.parse_unary()
                node = BinOp("*", node, rhs)
            else:
                return node

    @staticmethod
    def _starts_atom(t: _Tok) -> bool:
        return t.kind in ("num", "frac", "sqrt", "pi") or (
            t.kind == "op" and t.text in "({"
        )

    def parse_unary(self) -> Node:
        t = self.peek()
        if t is not None and t.kind == "op" and t.text in "+-":
            self.next()
            arg = self.parse_unary()
            return arg if t.text == "+" else Neg(arg)
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        t = self.peek()
        if t is not None and t.kind == "op" and t.text == "^":
            self.next()
            exp = self.parse_exponent()
            return Pow(base, exp)
        return base

    def parse_exponent(self) -> Node:
        t = self.peek()
        if t is not None and t.kind == "op" and t.text == "{":
            self.next()
            node = self.parse_expr()
            self.expect_op("}")
            return Group(node)
        if t is not None and t.kind == "op" and t.text in "+-":
            self.next()
            arg = self.parse_exponent()
            return arg if t.text == "+" else Neg(arg)
        t = self.next()
        if t.kind == "num":
            return Num(t.text)
        raise ParseError("expected exponent", t.pos)

    def parse_atom(self) -> Node:
        t = self.next()
        if t.kind == "num":
            return Num(t.text)
        if t.kind == "pi":
            return Pi()
        if t.kind == "frac":
            num = self.parse_braced()
            den = self.parse_braced()
            return BinOp("/", num, den)
        if t.kind == "sqrt":
            index = 2
            nxt = self.peek()
            if nxt is not None and nxt.kind == "op" and nxt.text == "[":
                self.next()
                idx_tok = self.next()
                if idx_tok.kind != "num" or "." in idx_tok.text:
                    raise ParseError("root index must be an integer", idx_tok.pos)
                index = int(idx_tok.text)
                self.expect_op("]")
            arg = self.parse_braced_or_paren()
            return Root(arg, index)
        if t.kind == "op" and t.text == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return Group(node)
        if t.kind == "op" and t.text == "{":
            node = self.parse_expr()
            self.expect_op("}")
            return Group(node)
        raise ParseError(f"unexpected token {t.text!r}", t.pos)

    def parse_braced(self) -> Node:
        t = self.peek()
        if t is not None and t.kind == "op" and t.text == "{":
            self.next()
            node = self.parse_expr()
            self.expect_op("}")
            return Group(node)
        # single-token argument (\frac12 style)
        t = self.next()
        if t.kind == "num":
            return Num(t.text)
        if t.kind == "pi":
            return Pi()
        raise ParseError("expected braced argument", t.pos)

    def parse_braced_or_paren(self) -> Node:
        t = self.peek()
        if t is not None and t.kind == "op" and t.text in "({":
            return self.parse_atom()
        t = self.next()
        if t.kind == "num":
            return Num(t.text)
        if t.kind == "pi":
            return Pi()
        raise ParseError("expected radicand", t.pos)


def parse_latex(s: str) -> MathAst:
    """Parse one math expression (boxed wrapper already stripped)."""
    stripped = s.strip().strip("$").strip()
    if not stripped:
        raise ParseError("empty expression", 0)
    toks = _tokenize(stripped)
    if not toks:
        raise ParseError("empty expression", 0)
    return MathAst(_Parser(toks, len(stripped)).parse())


# -- evaluation ---------------------------------------------------------------

_MAX_EXPONENT = 64


def eval_ast(ast: MathAst) -> ExactScalar:
    """Fold the tree into an exact scalar; a ratio a:b folds to a/b."""
    return _eval(ast.root)


def _eval(node: Node) -> ExactScalar:
    if isinstance(node, Num):
        return ExactScalar.from_fraction(node.value)
    if isinstance(node, Pi):
        return ExactScalar.pi_multiple(1)
    if isinstance(node, Neg):
        return -_eval(node.arg)
    if isinstance(node, Group):
        return _eval(node.arg)
    if isinstance(node, Ratio):
        return div(_eval(node.left), _eval(node.right))
    if isinstance(node, BinOp):
        lhs = _eval(node.left)
        rhs = _eval(node.right)
        if node.op == "+":
            return lhs + rhs
        if node.op == "-":
            return lhs - rhs
        if node.op == "*":
            return lhs * rhs
        return div(lhs, rhs)
    if isinstance(node, Pow):
        exp = _eval_int(node.exp)
        return _eval(node.base).pow_int(exp)
    if isinstance(node, Root):
        arg = _eval(node.arg)
        if node.index == 2:
            return sqrt(arg)
        return _rational_root(arg, node.index)
    raise EvalError(f"unsupported node {type(node).__name__}")


def _eval_int(node: Node) -> int:
    value = _eval(node).as_fraction()
    if value is None or value.denominator != 1:
        raise EvalError("exponent must be an integer")
    n = value.numerator
    if abs(n) > _MAX_EXPONENT:
        raise EvalError(f"exponent {n} out of supported range")
    return n


def _rational_root(arg: ExactScalar, index: int) -> ExactScalar:
    if index < 2 or index > 6:
        raise EvalError(f"unsupported root index {index}")
    f = arg.as_fraction()
    if f is None or f < 0:
        raise EvalError("nth roots are supported for nonnegative rationals only")
    num = _int_nth_root(f.numerator, index)
    den = _int_nth_root(f.denominator, index)
    if num is None or den is None:
        raise EvalError(f"{f} has no exact {index}th root")
    return ExactScalar.from_fraction(Fraction(num, den))


def _int_nth_root(n: int, k: int) -> Optional[int]:
    if n == 0:
        return 0
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** k == n:
            return cand
    return None


def parse_and_eval(s: str) -> ExactScalar:
    return eval_ast(parse_latex(s))


def ratio_parts(ast: MathAst) -> Optional[tuple[Node, Node]]:
    if isinstance(ast.root, Ratio):
        return ast.root.left, ast.root.right
    return None


__all__ = [
    "MathAst",
    "parse_latex",
    "eval_ast",
    "parse_and_eval",
    "ratio_parts",
    "ParseError",
    "EvalError",
    "KernelError",
]
