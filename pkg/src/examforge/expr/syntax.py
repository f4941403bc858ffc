"""Lexer, AST, recursive-descent parser and pretty-printer for the DSL.

Precedence, loosest first::

    or < and < not < comparison (non-associative) < + - < * / < unary - < ^ (right) < atom

``^`` is exponentiation. Bit manipulation is spelled with named functions
(``bitand``, ``shr``, ``wrap`` ...) so instructors never trip over the caret.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from examforge.errors import ExprSyntaxError
from examforge.values import parse_number

# name -> (min arity, max arity or None for variadic)
FUNCTIONS: dict[str, tuple[int, int | None]] = {
    "floor": (1, 1),
    "ceil": (1, 1),
    "abs": (1, 1),
    "min": (2, None),
    "max": (2, None),
    "sqrt": (1, 1),
    "exp": (1, 1),
    "ln": (1, 1),
    "phi": (1, 1),
    "bitand": (2, 2),
    "bitor": (2, 2),
    "bitxor": (2, 2),
    "shl": (2, 2),
    "shr": (2, 2),
    "wrap": (2, 2),
}

KEYWORDS = {"and", "or", "not", "true", "false"}
COMPARISONS = ("<=", ">=", "==", "!=", "<", ">")


# -- AST ---------------------------------------------------------------------
# ``pos`` is excluded from equality so that re-parsed ASTs compare equal.


@dataclass(frozen=True)
class Num:
    value: Fraction
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Str:
    value: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Name:
    id: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Logic:
    op: str  # "and" | "or"
    left: "Expr"
    right: "Expr"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]
    pos: int = field(default=0, compare=False)


Expr = Union[Num, Str, BoolLit, Name, Neg, Not, BinOp, Compare, Logic, Call]


def free_names(e: Expr) -> set[str]:
    """Identifiers referenced anywhere in ``e``."""
    if isinstance(e, Name):
        return {e.id}
    if isinstance(e, (Neg, Not)):
        return free_names(e.operand)
    if isinstance(e, (BinOp, Compare, Logic)):
        return free_names(e.left) | free_names(e.right)
    if isinstance(e, Call):
        out: set[str] = set()
        for a in e.args:
            out |= free_names(a)
        return out
    return set()


# -- lexer -------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # NUM STR IDENT OP EOF
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?|\.\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<op><=|>=|==|!=|[-+*/^(),<>])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> Iterator[Token]:
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            ch = source[pos]
            hint = " (use == for equality)" if ch == "=" else ""
            if ch == '"':
                raise ExprSyntaxError("unterminated string literal", pos)
            raise ExprSyntaxError(f"unexpected character {ch!r}{hint}", pos)
        kind = m.lastgroup
        if kind != "ws":
            yield Token(kind.upper(), m.group(), pos)
        pos = m.end()
    yield Token("EOF", "", pos)


def _unquote(text: str) -> str:
    return re.sub(r"\\(.)", r"\1", text[1:-1])


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.tokens = list(tokenize(source))
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("OP", "IDENT") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.advance()

    def fail(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        raise ExprSyntaxError(f"expected {expected}, found {found}", t.pos)

    def parse(self) -> Expr:
        e = self.or_expr()
        if self.tok.kind != "EOF":
            self.fail("operator or end of input")
        return e

    def or_expr(self) -> Expr:
        left = self.and_expr()
        while self.at("or"):
            t = self.advance()
            left = Logic("or", left, self.and_expr(), t.pos)
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self.at("and"):
            t = self.advance()
            left = Logic("and", left, self.not_expr(), t.pos)
        return left

    def not_expr(self) -> Expr:
        if self.at("not"):
            t = self.advance()
            return Not(self.not_expr(), t.pos)
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.sum()
        if self.tok.kind == "OP" and self.tok.text in COMPARISONS:
            t = self.advance()
            right = self.sum()
            if self.tok.kind == "OP" and self.tok.text in COMPARISONS:
                raise ExprSyntaxError(
                    "comparisons cannot be chained; combine them with 'and'",
                    self.tok.pos,
                )
            return Compare(t.text, left, right, t.pos)
        return left

    def sum(self) -> Expr:
        left = self.term()
        while self.tok.kind == "OP" and self.tok.text in ("+", "-"):
            t = self.advance()
            left = BinOp(t.text, left, self.term(), t.pos)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "OP" and self.tok.text in ("*", "/"):
            t = self.advance()
            left = BinOp(t.text, left, self.unary(), t.pos)
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "OP" and self.tok.text == "-":
            t = self.advance()
            return Neg(self.unary(), t.pos)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "OP" and self.tok.text == "^":
            t = self.advance()
            return BinOp("^", base, self.unary(), t.pos)
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "NUM":
            self.advance()
            return Num(parse_number(t.text), t.pos)
        if t.kind == "STR":
            self.advance()
            return Str(_unquote(t.text), t.pos)
        if t.kind == "IDENT":
            if t.text in ("true", "false"):
                self.advance()
                return BoolLit(t.text == "true", t.pos)
            if t.text in KEYWORDS:
                self.fail("a value")
            self.advance()
            if self.tok.kind == "OP" and self.tok.text == "(":
                return self.call(t)
            return Name(t.text, t.pos)
        if t.kind == "OP" and t.text == "(":
            self.advance()
            inner = self.or_expr()
            self.expect(")")
            return inner
        self.fail("a value")

    def call(self, name: Token) -> Expr:
        if name.text not in FUNCTIONS:
            raise ExprSyntaxError(f"unknown function {name.text!r}", name.pos)
        self.expect("(")
        args: list[Expr] = []
        if not self.at(")"):
            args.append(self.or_expr())
            while self.at(","):
                self.advance()
                args.append(self.or_expr())
        self.expect(")")
        lo, hi = FUNCTIONS[name.text]
        if len(args) < lo or (hi is not None and len(args) > hi):
            want = str(lo) if lo == hi else f"at least {lo}"
            raise ExprSyntaxError(
                f"{name.text}() takes {want} argument(s), got {len(args)}", name.pos
            )
        return Call(name.text, tuple(args), name.pos)


def parse_expr(source: str) -> Expr:
    """Parse DSL source text into an AST, raising ExprSyntaxError on failure."""
    return _Parser(source).parse()


# -- printer -----------------------------------------------------------------

_PREC_OR, _PREC_AND, _PREC_NOT, _PREC_CMP, _PREC_SUM, _PREC_TERM, _PREC_UNARY, _PREC_POW, _PREC_ATOM = range(1, 10)


def _decimal_text(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    # exact only for denominators of the form 2^a 5^b, which is all the parser emits
    d = q.denominator
    digits = 0
    while (10 ** digits) % d != 0:
        digits += 1
        if digits > 4096:
            raise ValueError(f"{q} has no finite decimal expansion")
    scaled = q * 10 ** digits
    if scaled.denominator != 1:
        raise ValueError(f"{q} has no finite decimal expansion")
    s = str(scaled.numerator).rjust(digits + 1, "0")
    return f"{s[:-digits]}.{s[-digits:]}"


def _prec(e: Expr) -> int:
    if isinstance(e, Logic):
        return _PREC_OR if e.op == "or" else _PREC_AND
    if isinstance(e, Not):
        return _PREC_NOT
    if isinstance(e, Compare):
        return _PREC_CMP
    if isinstance(e, BinOp):
        return {"+": _PREC_SUM, "-": _PREC_SUM, "*": _PREC_TERM, "/": _PREC_TERM}.get(e.op, _PREC_POW)
    if isinstance(e, Neg):
        return _PREC_UNARY
    return _PREC_ATOM


def to_source(e: Expr) -> str:
    """Render an AST back to DSL text with the minimum parentheses needed."""
    return _fmt(e, 0)


def _fmt(e: Expr, need: int) -> str:
    s = _fmt_bare(e)
    return f"({s})" if _prec(e) < need else s


def _fmt_bare(e: Expr) -> str:
    if isinstance(e, Num):
        return _decimal_text(e.value)
    if isinstance(e, Str):
        return '"' + e.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Name):
        return e.id
    if isinstance(e, Neg):
        return "-" + _fmt(e.operand, _PREC_UNARY)
    if isinstance(e, Not):
        return "not " + _fmt(e.operand, _PREC_NOT)
    if isinstance(e, Logic):
        p = _prec(e)
        return f"{_fmt(e.left, p)} {e.op} {_fmt(e.right, p + 1)}"
    if isinstance(e, Compare):
        return f"{_fmt(e.left, _PREC_SUM)} {e.op} {_fmt(e.right, _PREC_SUM)}"
    if isinstance(e, BinOp):
        if e.op == "^":
            return f"{_fmt(e.left, _PREC_ATOM)}^{_fmt(e.right, _PREC_UNARY)}"
        p = _prec(e)
        return f"{_fmt(e.left, p)} {e.op} {_fmt(e.right, p + 1)}"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(_fmt(a, 0) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")
