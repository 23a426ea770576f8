"""Univariate polynomials over a NumberField.

Factorization over k uses Trager's norm method; the rational factorization
step underneath it is delegated to sympy.
"""
from __future__ import annotations

from fractions import Fraction
from functools import reduce

import sympy

from .numberfield import FieldElem, NumberField


class UPoly:
    """Dense univariate polynomial, coefficients low to high, no trailing zeros."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs):
        cs = [field(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    @classmethod
    def x(cls, field):
        return cls(field, [0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def lc(self) -> FieldElem:
        return self.coeffs[-1]

    def monic(self) -> "UPoly":
        inv = self.lc().inverse()
        return UPoly(self.field, [c * inv for c in self.coeffs])

    def __add__(self, other):
        other = _as_poly(self.field, other)
        n = max(len(self.coeffs), len(other.coeffs))
        z = self.field.zero
        a = self.coeffs + (z,) * (n - len(self.coeffs))
        b = other.coeffs + (z,) * (n - len(other.coeffs))
        return UPoly(self.field, [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return UPoly(self.field, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_poly(self.field, other))

    def __rsub__(self, other):
        return _as_poly(self.field, other) - self

    def __mul__(self, other):
        other = _as_poly(self.field, other)
        if self.is_zero() or other.is_zero():
            return UPoly(self.field, [])
        out = [self.field.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return UPoly(self.field, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = UPoly(self.field, [1])
        for _ in range(n):
            out = out * self
        return out

    def divmod(self, other: "UPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        dq = len(r) - len(other.coeffs)
        if dq < 0:
            return UPoly(self.field, []), self
        q = [self.field.zero] * (dq + 1)
        inv = other.lc().inverse()
        db = other.degree
        for i in range(len(r) - 1, db - 1, -1):
            c = r[i]
            if c.is_zero():
                continue
            c = c * inv
            q[i - db] = c
            for j, b in enumerate(other.coeffs):
                r[i - db + j] = r[i - db + j] - c * b
        return UPoly(self.field, q), UPoly(self.field, r[:db])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __eq__(self, other):
        if isinstance(other, UPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        """Horner evaluation; x may be anything supporting + and * with field elements."""
        out = None
        for c in reversed(self.coeffs):
            out = c if out is None else out * x + c
        return self.field.zero if out is None else out

    def derivative(self) -> "UPoly":
        return UPoly(self.field, [c * i for i, c in enumerate(self.coeffs)][1:])

    def compose(self, other: "UPoly") -> "UPoly":
        out = UPoly(self.field, [])
        for c in reversed(self.coeffs):
            out = out * other + UPoly(self.field, [c])
        return out

    def is_squarefree(self) -> bool:
        return upoly_gcd(self, self.derivative()).degree == 0

    def __repr__(self):
        return f"UPoly({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            mon = "" if i == 0 else ("z" if i == 1 else f"z^{i}")
            terms.append(f"{c}" if i == 0 else (mon if c == 1 else f"{c}*{mon}"))
        return " + ".join(reversed(terms))


def _as_poly(field, v):
    if isinstance(v, UPoly):
        return v
    return UPoly(field, [v])


def upoly_gcd(a: UPoly, b: UPoly) -> UPoly:
    """Monic gcd (zero if both are zero)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def charpoly(matrix, field: NumberField) -> UPoly:
    """det(z*I - M) by Faddeev-LeVerrier; valid in characteristic zero."""
    n = len(matrix)
    if n == 0:
        return UPoly(field, [1])
    zero, one = field.zero, field.one
    M = [[field(x) for x in row] for row in matrix]
    coeffs = [one]
    Mk = [[zero] * n for _ in range(n)]
    c = one
    for k in range(1, n + 1):
        # Mk = M @ (Mk + c_{k-1} I)
        prev = [row[:] for row in Mk]
        for i in range(n):
            prev[i][i] = prev[i][i] + c
        Mk = [[sum((M[i][l] * prev[l][j] for l in range(n) if not M[i][l].is_zero()), zero)
               for j in range(n)] for i in range(n)]
        tr = sum((Mk[i][i] for i in range(n)), zero)
        c = -tr / k
        coeffs.append(c)
    return UPoly(field, list(reversed(coeffs)))


def minpoly_of_operator(matrix, field: NumberField) -> UPoly:
    """Minimal polynomial of a square matrix, found from the Krylov chain of a
    spanning set of vectors (lcm over the standard basis)."""
    n = len(matrix)
    result = UPoly(field, [1])
    for j in range(n):
        v = [field.one if i == j else field.zero for i in range(n)]
        p = _vector_minpoly(matrix, v, field)
        result = _lcm(result, p)
    return result


def _lcm(a, b):
    g = upoly_gcd(a, b)
    return (a * b // g).monic()


def _vector_minpoly(M, v, field):
    from .linalg import field_solve_combination

    n = len(M)
    chain = [v]
    while True:
        w = chain[-1]
        nxt = [sum((M[i][l] * w[l] for l in range(n)), field.zero) for i in range(n)]
        coeffs = field_solve_combination(chain, nxt, field)
        if coeffs is not None:
            # nxt = sum c_i chain[i]  =>  z^d - sum c_i z^i
            return UPoly(field, [-c for c in coeffs] + [field.one])
        chain.append(nxt)


# -- factorization -------------------------------------------------------------

_Z, _T = sympy.symbols("z t")


def _to_sympy_bivariate(f: UPoly, shift: int):
    """f(z - shift*t) as a sympy polynomial in (z, t) over QQ."""
    expr = 0
    zz = _Z - shift * _T
    for i, c in enumerate(f.coeffs):
        ct = sum(sympy.Rational(q.numerator, q.denominator) * _T**j for j, q in enumerate(c.coeffs))
        expr += ct * zz**i
    return sympy.Poly(sympy.expand(expr), _Z, _T, domain="QQ")


def _from_sympy_univariate(p: sympy.Poly, field) -> UPoly:
    coeffs = p.all_coeffs()[::-1]
    return UPoly(field, [Fraction(int(sympy.numer(c)), int(sympy.denom(c))) for c in coeffs])


def factor(f: UPoly) -> list[UPoly]:
    """Monic irreducible factors of a squarefree polynomial over its field."""
    field = f.field
    if f.degree < 1:
        return []
    if not f.is_squarefree():
        raise ValueError("factor() expects a squarefree polynomial")
    f = f.monic()
    if f.degree == 1:
        return [f]
    if field.degree == 1:
        sp = sympy.Poly([sympy.Rational(c.coeffs[0].numerator, c.coeffs[0].denominator) for c in reversed(f.coeffs)], _Z, domain="QQ")
        _, facs = sp.factor_list()
        out = [_from_sympy_univariate(g, field).monic() for g, _ in facs]
        return sorted(out, key=_sort_key)
    p = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(field.min_poly)], _T, domain="QQ")
    for s in (0, 1, -1, 2, -2, 3, -3, 4, 5, 6, 7):
        g = _to_sympy_bivariate(f, s)
        norm = sympy.Poly(sympy.resultant(p.as_expr(), g.as_expr(), _T), _Z, domain="QQ")
        if sympy.gcd(norm, norm.diff(_Z)).degree() != 0:
            continue
        _, facs = norm.factor_list()
        shift = UPoly(field, [-s * field.gen, field.one])   # z - s t
        g_k = f.compose(shift)
        back = UPoly(field, [s * field.gen, field.one])     # z + s t
        out = []
        for h, _ in facs:
            hk = _from_sympy_univariate(h, field)
            piece = upoly_gcd(g_k, hk)
            if piece.degree > 0:
                out.append(piece.compose(back).monic())
        assert sum(q.degree for q in out) == f.degree
        return sorted(out, key=_sort_key)
    raise RuntimeError("no squarefree norm found")


def _sort_key(p: UPoly):
    return (p.degree, [tuple(c.coeffs) for c in p.coeffs])


def roots_in_field(f: UPoly) -> list[FieldElem]:
    sf = f // upoly_gcd(f, f.derivative()) if f.degree > 0 else f
    return [-q.coeffs[0] for q in factor(sf) if q.degree == 1]


def product(polys, field):
    return reduce(lambda a, b: a * b, polys, UPoly(field, [1]))
