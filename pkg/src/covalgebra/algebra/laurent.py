"""Laurent polynomials k[x_1^+-1, ..., x_m^+-1] with number-field coefficients."""
from __future__ import annotations

from fractions import Fraction

from .numberfield import FieldElem, NumberField, elem_from_json


class LaurentPoly:
    """Finite map exponent vector -> nonzero coefficient. Treat as immutable."""

    __slots__ = ("field", "nvars", "terms", "_hash")

    def __init__(self, field: NumberField, nvars: int, terms=None):
        self.field = field
        self.nvars = nvars
        clean = {}
        if terms:
            for e, c in terms.items():
                c = field(c) if not isinstance(c, FieldElem) or c.field is not field else c
                if not c.is_zero():
                    e = tuple(e)
                    if len(e) != nvars:
                        raise ValueError(f"exponent {e} does not have {nvars} entries")
                    clean[e] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, field, nvars, terms):
        obj = cls.__new__(cls)
        obj.field, obj.nvars, obj.terms, obj._hash = field, nvars, terms, None
        return obj

    # constructors ---------------------------------------------------------------
    @classmethod
    def constant(cls, field, nvars, c=1):
        return cls(field, nvars, {(0,) * nvars: field(c)})

    @classmethod
    def zero(cls, field, nvars):
        return cls._raw(field, nvars, {})

    @classmethod
    def monomial(cls, field, nvars, exp, c=1):
        return cls(field, nvars, {tuple(exp): field(c)})

    @classmethod
    def var(cls, field, nvars, i, power=1):
        e = [0] * nvars
        e[i] = power
        return cls.monomial(field, nvars, e)

    # predicates -----------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.nvars in self.terms)

    def constant_term(self) -> FieldElem:
        return self.terms.get((0,) * self.nvars, self.field.zero)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def is_unit(self):
        """(True, inverse) iff self = c*x^a with c != 0, else (False, None)."""
        if len(self.terms) != 1:
            return False, None
        (e, c), = self.terms.items()
        return True, LaurentPoly._raw(self.field, self.nvars, {tuple(-x for x in e): c.inverse()})

    # arithmetic -----------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            if other.field is not self.field and other.field != self.field:
                if other.field.degree == 1:
                    return other.change_field(self.field)
                raise TypeError(f"mixing {self.field} and {other.field}")
            return other
        if isinstance(other, (int, Fraction, FieldElem)):
            return LaurentPoly.constant(self.field, self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        out = dict(self.terms)
        for e, c in o.terms.items():
            if e in out:
                s = out[e] + c
                if s.is_zero():
                    del out[e]
                else:
                    out[e] = s
            else:
                out[e] = c
        return LaurentPoly._raw(self.field, self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw(self.field, self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, FieldElem)):
            c = self.field(other)
            if c.is_zero():
                return LaurentPoly._raw(self.field, self.nvars, {})
            return LaurentPoly._raw(self.field, self.nvars, {e: v * c for e, v in self.terms.items()})
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.terms or not o.terms:
            return LaurentPoly._raw(self.field, self.nvars, {})
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                p = c1 * c2
                if e in out:
                    out[e] = out[e] + p
                else:
                    out[e] = p
        return LaurentPoly._raw(self.field, self.nvars, {e: c for e, c in out.items() if not c.is_zero()})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            ok, inv = self.is_unit()
            if not ok:
                raise ZeroDivisionError("negative power of a non-unit")
            return inv ** (-n)
        out = LaurentPoly.constant(self.field, self.nvars, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def shift(self, exp) -> "LaurentPoly":
        """Multiply by x^exp."""
        return LaurentPoly._raw(self.field, self.nvars,
                                {tuple(a + b for a, b in zip(e, exp)): c for e, c in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction, FieldElem)):
            return self == LaurentPoly.constant(self.field, self.nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # calculus -------------------------------------------------------------------
    def diff(self, i: int) -> "LaurentPoly":
        """Partial derivative in x_i."""
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return LaurentPoly._raw(self.field, self.nvars, out)

    def apply_derivation(self, values) -> "LaurentPoly":
        """D(self) for the derivation with D(x_i) = values[i]."""
        out = LaurentPoly.zero(self.field, self.nvars)
        for i, v in enumerate(values):
            if v:
                d = self.diff(i)
                if d:
                    out = out + d * v
        return out

    def substitute(self, images, nvars=None) -> "LaurentPoly":
        """Ring map x_i -> images[i]; the images must be units if exponents are negative."""
        nv = self.nvars if nvars is None else nvars
        out = LaurentPoly.zero(self.field, nv)
        for e, c in self.terms.items():
            term = LaurentPoly.constant(self.field, nv, c)
            for i, a in enumerate(e):
                if a:
                    term = term * images[i] ** a
            out = out + term
        return out

    def change_field(self, field: NumberField) -> "LaurentPoly":
        return LaurentPoly(field, self.nvars, {e: field(c) for e, c in self.terms.items()})

    # exact division ---------------------------------------------------------------
    def exponent_bounds(self):
        es = list(self.terms)
        return ([min(e[i] for e in es) for i in range(self.nvars)],
                [max(e[i] for e in es) for i in range(self.nvars)])

    def divexact(self, other: "LaurentPoly") -> "LaurentPoly":
        """self / other, raising ArithmeticError if the quotient is not Laurent."""
        if other.is_zero():
            raise ZeroDivisionError("division by zero Laurent polynomial")
        if self.is_zero():
            return self
        if len(other.terms) == 1:
            (e0, c0), = other.terms.items()
            inv = c0.inverse()
            return LaurentPoly._raw(self.field, self.nvars,
                                    {tuple(a - b for a, b in zip(e, e0)): c * inv for e, c in self.terms.items()})
        lo_a, hi_a = self.exponent_bounds()
        lo_b, hi_b = other.exponent_bounds()
        lo_q = [a - b for a, b in zip(lo_a, lo_b)]
        hi_q = [a - b for a, b in zip(hi_a, hi_b)]
        if any(l > h for l, h in zip(lo_q, hi_q)):
            raise ArithmeticError("inexact Laurent division")
        lead_e = max(other.terms)
        lead_inv = other.terms[lead_e].inverse()
        rem = dict(self.terms)
        q = {}
        while rem:
            e = max(rem)
            qe = tuple(a - b for a, b in zip(e, lead_e))
            if any(x < l or x > h for x, l, h in zip(qe, lo_q, hi_q)):
                raise ArithmeticError("inexact Laurent division")
            qc = rem[e] * lead_inv
            q[qe] = qc
            for be, bc in other.terms.items():
                te = tuple(a + b for a, b in zip(qe, be))
                v = rem.get(te)
                v = -(qc * bc) if v is None else v - qc * bc
                if v.is_zero():
                    rem.pop(te, None)
                else:
                    rem[te] = v
        return LaurentPoly._raw(self.field, self.nvars, q)

    def divides(self, other: "LaurentPoly") -> bool:
        try:
            other.divexact(self)
            return True
        except ArithmeticError:
            return False

    # output -----------------------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items())

    def __repr__(self):
        return f"LaurentPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        names = ["x"] if self.nvars == 1 else [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mon = "*".join(n if a == 1 else f"{n}^{a}" for n, a in zip(names, e) if a)
            if not mon:
                parts.append(str(c))
            elif c == 1:
                parts.append(mon)
            elif c == -1:
                parts.append("-" + mon)
            else:
                parts.append(f"{c}*{mon}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self):
        return {",".join(str(a) for a in e): c.to_json() for e, c in sorted(self.terms.items())}

    @classmethod
    def from_json(cls, field, nvars, data):
        """Accepts {"e1,e2": coeff} maps or lists of {"exp": [...], "coeff": c}."""
        if isinstance(data, (int, str)):
            return cls.constant(field, nvars, elem_from_json(field, data))
        terms = {}
        if isinstance(data, dict):
            items = [([int(a) for a in k.split(",")] if k else [], v) for k, v in data.items()]
        else:
            items = [(t["exp"], t["coeff"]) for t in data]
        for e, v in items:
            terms[tuple(e)] = elem_from_json(field, v)
        return cls(field, nvars, terms)


def is_unit(a: LaurentPoly):
    """(True, inverse) iff a is a nonzero monomial."""
    return a.is_unit()


def log_derivative(u: LaurentPoly, values) -> LaurentPoly:
    """D(u)/u for a unit u and the derivation D(x_i) = values[i]."""
    ok, inv = u.is_unit()
    if not ok:
        raise ValueError("log_derivative needs a unit")
    return u.apply_derivation(values) * inv


def coordinate_derivation(field, nvars, i):
    """Values of d/dx_i on the variables."""
    return [LaurentPoly.constant(field, nvars, 1 if j == i else 0) for j in range(nvars)]
