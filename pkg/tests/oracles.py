"""Independent oracles: differential operators evaluated with sympy."""
import sympy


def sympy_laurent(p, names):
    expr = sympy.Integer(0)
    syms = sympy.symbols(names)
    for e, c in p.terms.items():
        term = sympy.Rational(c.to_fraction())
        for s, k in zip(syms, e):
            term *= s ** k
        expr += term
    return expr


def sympy_apply(u, f, names):
    """Apply sum a_alpha l^alpha to the sympy expression f, l_j acting as its
    anchor vector field (rightmost factor first)."""
    pair = u.pair
    syms = sympy.symbols(names)
    fields = [[sympy_laurent(v, names) for v in vals] for vals in pair.anchor]

    def apply_gen(j, g):
        return sum((c * sympy.diff(g, s) for c, s in zip(fields[j], syms)), sympy.Integer(0))

    out = sympy.Integer(0)
    for alpha, a in u.terms.items():
        cur = f
        for j in reversed([j for j in range(pair.rank) for _ in range(alpha[j])]):
            cur = apply_gen(j, cur)
        out += sympy_laurent(a, names) * cur
    return sympy.expand(out)
