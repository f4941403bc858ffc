"""The parameter expression language: parse, type-check, evaluate."""

from examforge.expr.check import type_check, uses_real
from examforge.expr.evaluate import evaluate, phi
from examforge.expr.syntax import FUNCTIONS, Expr, free_names, parse_expr, to_source

__all__ = [
    "FUNCTIONS",
    "Expr",
    "evaluate",
    "free_names",
    "parse_expr",
    "phi",
    "to_source",
    "type_check",
    "uses_real",
]
