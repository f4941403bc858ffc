"""
Exact expressions
=================

Parameter formulas are parsed once and evaluated with exact rationals, so
the normalising constant of a joint PDF comes out as a fraction, not a
rounded float.
"""

from fractions import Fraction

from examforge.expr import evaluate, parse_expr, to_source, type_check
from examforge.values import VType

# f(x, y) = c (v1 x^2 + v2 y) on [0, v3] x [0, v4]; c makes it integrate to 1
c_expr = parse_expr("6 / (2*v1*v3^3*v4 + 3*v2*v4^2*v3)")
print(to_source(c_expr))

env = {"v1": Fraction(2), "v2": Fraction(2), "v3": Fraction(1), "v4": Fraction(1)}
c = evaluate(c_expr, env)
print("c =", c)  # 3/5, exactly

# Decimal literals are exact too: 0.45 is 9/20, never 0.45000000000000001
print(evaluate(parse_expr("0.45 * 200"), {}))

# Anything touching sqrt/exp/ln/phi becomes an ordinary float
types = {"mu": VType.RATIONAL, "var": VType.RATIONAL}
z = parse_expr("phi((mu - 1/2) / sqrt(var))")
print(type_check(z, types))
print(evaluate(z, {"mu": Fraction(50), "var": Fraction(96)}))

# 8-bit code tracing: `n |= n >> 1; ...; n++` with unsigned char wrap-around
n = Fraction(150)
for s in (1, 2, 4):
    n = evaluate(parse_expr("bitor(n, shr(n, s))"), {"n": n, "s": Fraction(s)})
print(n, "->", evaluate(parse_expr("wrap(n + 1, 8)"), {"n": n}))
