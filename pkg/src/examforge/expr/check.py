"""Static type inference over the expression AST."""

from __future__ import annotations

from typing import Mapping

from examforge.errors import ExprTypeError
from examforge.expr.syntax import (
    BinOp,
    BoolLit,
    Call,
    Compare,
    Expr,
    Logic,
    Name,
    Neg,
    Not,
    Num,
    Str,
)
from examforge.values import VType

_REAL_FUNCS = {"sqrt", "exp", "ln", "phi"}
_BIT_FUNCS = {"bitand", "bitor", "bitxor", "shl", "shr", "wrap"}

R, F, B, T = VType.RATIONAL, VType.REAL, VType.BOOL, VType.TEXT


def _numeric(t: VType, where: str, pos: int) -> None:
    if not t.numeric:
        raise ExprTypeError(f"{where} needs a number, got {t.value}", pos)


def type_check(
    e: Expr, env_types: Mapping[str, VType], warnings: list[str] | None = None
) -> VType:
    """Infer the type of ``e``.

    Mixed rational/real comparisons are allowed (the rational side is
    promoted) but reported through ``warnings`` when a list is supplied.
    """
    if isinstance(e, Num):
        return R
    if isinstance(e, Str):
        return T
    if isinstance(e, BoolLit):
        return B
    if isinstance(e, Name):
        try:
            return env_types[e.id]
        except KeyError:
            raise ExprTypeError(f"unknown name {e.id!r}", e.pos) from None
    if isinstance(e, Neg):
        t = type_check(e.operand, env_types, warnings)
        _numeric(t, "unary '-'", e.pos)
        return t
    if isinstance(e, Not):
        t = type_check(e.operand, env_types, warnings)
        if t is not B:
            raise ExprTypeError(f"'not' needs a boolean, got {t.value}", e.pos)
        return B
    if isinstance(e, Logic):
        for side in (e.left, e.right):
            t = type_check(side, env_types, warnings)
            if t is not B:
                raise ExprTypeError(f"'{e.op}' needs booleans, got {t.value}", e.pos)
        return B
    if isinstance(e, BinOp):
        lt = type_check(e.left, env_types, warnings)
        rt = type_check(e.right, env_types, warnings)
        _numeric(lt, f"'{e.op}'", e.pos)
        _numeric(rt, f"'{e.op}'", e.pos)
        if e.op == "^":
            if rt is not R:
                raise ExprTypeError("exponent must be an exact integer, got real", e.pos)
            return lt
        return R if lt is R and rt is R else F
    if isinstance(e, Compare):
        lt = type_check(e.left, env_types, warnings)
        rt = type_check(e.right, env_types, warnings)
        if e.op in ("==", "!="):
            if lt.numeric and rt.numeric:
                pass
            elif lt is not rt:
                raise ExprTypeError(
                    f"cannot compare {lt.value} with {rt.value}", e.pos
                )
        else:
            if not (lt.numeric and rt.numeric):
                raise ExprTypeError(
                    f"'{e.op}' needs numbers, got {lt.value} and {rt.value}", e.pos
                )
        if {lt, rt} == {R, F} and warnings is not None:
            warnings.append(
                f"comparison at offset {e.pos} mixes exact and approximate numbers; "
                "the exact side is rounded to binary64"
            )
        return B
    if isinstance(e, Call):
        ts = [type_check(a, env_types, warnings) for a in e.args]
        for t in ts:
            _numeric(t, f"{e.func}()", e.pos)
        if e.func in _REAL_FUNCS:
            return F
        if e.func in _BIT_FUNCS:
            if any(t is not R for t in ts):
                raise ExprTypeError(f"{e.func}() needs exact integers", e.pos)
            return R
        if e.func in ("floor", "ceil"):
            return R
        if e.func == "abs":
            return ts[0]
        # min / max
        return R if all(t is R for t in ts) else F
    raise TypeError(f"not an expression node: {e!r}")


def uses_real(e: Expr, env_types: Mapping[str, VType]) -> bool:
    """True if any sub-expression of ``e`` is real-typed."""
    if type_check(e, env_types) is F:
        return True
    if isinstance(e, (Neg, Not)):
        return uses_real(e.operand, env_types)
    if isinstance(e, (BinOp, Compare, Logic)):
        return uses_real(e.left, env_types) or uses_real(e.right, env_types)
    if isinstance(e, Call):
        return any(uses_real(a, env_types) for a in e.args)
    return False
