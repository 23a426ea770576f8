"""Exact number fields k = Q[t]/(p(t)) and their elements."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, str):
        return Fraction(c.strip())
    return Fraction(c)


def _polymul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] += x * y
    return out


def _polydivmod(a, b):
    a = list(a)
    db = len(b) - 1
    while db > 0 and b[db] == 0:
        db -= 1
    q = [Fraction(0)] * max(len(a) - db, 1)
    lead = b[db]
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c:
            c = c / lead
            q[i - db] = c
            for j in range(db + 1):
                a[i - db + j] -= c * b[j]
    return q, a[:db] if db else [Fraction(0)]


def _trim(a):
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def cyclotomic_poly(n: int) -> tuple[Fraction, ...]:
    """Coefficients (low to high) of the n-th cyclotomic polynomial."""
    if n < 1:
        raise ValueError("n must be positive")
    return _cyclotomic(n)


@lru_cache(maxsize=None)
def _cyclotomic(n):
    num = [Fraction(-1)] + [Fraction(0)] * (n - 1) + [Fraction(1)]
    for d in range(1, n):
        if n % d == 0:
            num, rem = _polydivmod(num, _cyclotomic(d))
            assert all(r == 0 for r in rem)
    return tuple(_trim(num))


def _euler_phi(n):
    return sum(1 for a in range(1, n + 1) if gcd(a, n) == 1)


class NumberField:
    """The field Q[t]/(p) for a monic squarefree p, irreducibility trusted.

    ``cyclotomic_order`` is set by :func:`cyclotomic_field` and records n for
    Q(zeta_n); it is what lets the field hand out roots of unity.
    """

    __slots__ = ("min_poly", "degree", "label", "cyclotomic_order", "unchecked", "_red", "_hash")

    def __init__(self, min_poly, label=None, cyclotomic_order=None, unchecked=True):
        p = _trim([_frac(c) for c in min_poly])
        if len(p) < 2:
            raise ValueError("min_poly must have degree >= 1")
        if p[-1] != 1:
            raise ValueError("min_poly must be monic")
        self.min_poly = tuple(p)
        self.degree = len(p) - 1
        self.cyclotomic_order = cyclotomic_order
        self.unchecked = unchecked
        self.label = label or ("Q" if self.degree == 1 else f"Q[t]/({_poly_str(p)})")
        # t^k mod p for degree <= k <= 2*degree - 2
        d = self.degree
        red = {}
        cur = [-c for c in p[:d]]
        for k in range(d, 2 * d - 1):
            red[k] = tuple(cur)
            nxt = [Fraction(0)] + cur[:-1]
            top = cur[-1]
            if top:
                for i in range(d):
                    nxt[i] -= top * p[i]
            cur = nxt
        self._red = red
        self._hash = hash(self.min_poly) if self.degree > 1 else hash("Q")

    def __eq__(self, other):
        if not isinstance(other, NumberField):
            return False
        if self.degree == 1:
            return other.degree == 1
        return self.min_poly == other.min_poly

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"NumberField({self.label})"

    # -- element constructors -------------------------------------------------
    def __call__(self, value=0) -> "FieldElem":
        if isinstance(value, FieldElem):
            if value.field == self:
                return value
            if value.field.degree == 1:
                return FieldElem(self, (value.coeffs[0],) + (Fraction(0),) * (self.degree - 1))
            return embed(value, self)
        if isinstance(value, (list, tuple)):
            cs = [_frac(c) for c in value]
            if len(cs) > self.degree:
                return FieldElem(self, tuple(_reduce(self, cs)))
            return FieldElem(self, tuple(cs) + (Fraction(0),) * (self.degree - len(cs)))
        return FieldElem(self, (_frac(value),) + (Fraction(0),) * (self.degree - 1))

    @property
    def zero(self) -> "FieldElem":
        return self(0)

    @property
    def one(self) -> "FieldElem":
        return self(1)

    @property
    def gen(self) -> "FieldElem":
        """The class of t."""
        if self.degree == 1:
            return self(-self.min_poly[0])
        return self([0, 1])

    def is_rational(self) -> bool:
        return self.degree == 1

    def root_of_unity(self, n: int) -> "FieldElem | None":
        """A primitive n-th root of unity in this field, or None.

        For Q(zeta_c) the chosen root is t^(c/n) when n | c; when c is odd the
        roots of order dividing 2c come from w = -t, of order 2c.
        """
        if n == 1:
            return self.one
        if n == 2:
            return self(-1)
        c = self.cyclotomic_order
        if c is None:
            return None
        if c % n == 0:
            return self.gen ** (c // n)
        if c % 2 and (2 * c) % n == 0:
            return (-self.gen) ** (2 * c // n)
        return None

    def contains_roots_of_unity(self, n: int) -> bool:
        return self.root_of_unity(n) is not None


def _poly_str(p):
    parts = []
    for i, c in enumerate(p):
        if c == 0:
            continue
        mon = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
        if i == 0:
            parts.append(str(c))
        elif c == 1:
            parts.append(mon)
        elif c == -1:
            parts.append("-" + mon)
        else:
            parts.append(f"{c}*{mon}")
    return "+".join(reversed(parts)).replace("+-", "-") or "0"


def _reduce(field, cs):
    d = field.degree
    out = list(cs[:d]) + [Fraction(0)] * max(0, d - len(cs))
    for k in range(d, len(cs)):
        c = cs[k]
        if c:
            if k in field._red:
                for i, r in enumerate(field._red[k]):
                    if r:
                        out[i] += c * r
            else:
                _, rem = _polydivmod([Fraction(0)] * k + [c], field.min_poly)
                for i, r in enumerate(rem):
                    out[i] += r
    return out


class FieldElem:
    """An element of a NumberField, stored as its reduced coefficient vector."""

    __slots__ = ("field", "coeffs", "_hash")

    def __init__(self, field: NumberField, coeffs: tuple):
        self.field = field
        self.coeffs = coeffs
        self._hash = None

    # coercion -----------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if other.field is self.field or other.field == self.field:
                return other
            if other.field.degree == 1:
                return self.field(other.coeffs[0])
            if self.field.degree == 1 and self.is_rational():
                return None
            raise TypeError(f"mixing {self.field} and {other.field}")
        if isinstance(other, (int, Fraction)):
            return self.field(other)
        return NotImplemented

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o is None:
            return other + self
        return FieldElem(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o is None:
            return -(other - self)
        return FieldElem(self.field, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o is None:
            return other * self
        d = self.field.degree
        if d == 1:
            return FieldElem(self.field, (self.coeffs[0] * o.coeffs[0],))
        if o.is_rational():
            c = o.coeffs[0]
            return FieldElem(self.field, tuple(a * c for a in self.coeffs))
        if self.is_rational():
            c = self.coeffs[0]
            return FieldElem(self.field, tuple(c * b for b in o.coeffs))
        return FieldElem(self.field, tuple(_reduce(self.field, _polymul(self.coeffs, o.coeffs))))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        d = self.field.degree
        if self.is_rational():
            return FieldElem(self.field, (1 / self.coeffs[0],) + (Fraction(0),) * (d - 1))
        # extended Euclid on (self, p)
        r0, r1 = list(self.field.min_poly), _trim(list(self.coeffs))
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while len(r1) > 1 or r1[0] != 0:
            if len(r1) == 1:
                inv = 1 / r1[0]
                return self.field([c * inv for c in _trim(s1)])
            q, r = _polydivmod(r0, r1)
            r = _trim(r)
            qs = _polymul(q, s1)
            n = max(len(s0), len(qs))
            s2 = [(s0[i] if i < len(s0) else 0) - (qs[i] if i < len(qs) else 0) for i in range(n)]
            r0, r1, s0, s1 = r1, r, s1, _trim(s2)
        raise ZeroDivisionError("element is a zero divisor; min_poly is reducible")

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o is None:
            return other.field(self.coeffs[0]) / other
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.field(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            if other.field == self.field:
                return self.coeffs == other.coeffs
            if other.field.degree == 1 or self.field.degree == 1:
                return self.is_rational() and other.is_rational() and self.coeffs[0] == other.coeffs[0]
            return False
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs[0]) if self.is_rational() else hash(self.coeffs)
        return self._hash

    def __repr__(self):
        return f"FieldElem({self})"

    def __str__(self):
        if self.is_rational():
            return str(self.coeffs[0])
        return "(" + _poly_str(self.coeffs) + ")"

    def to_json(self):
        if self.field.degree == 1:
            return str(self.coeffs[0])
        return [str(c) for c in self.coeffs]

    def conj_by_power(self, a: int) -> "FieldElem":
        """Image under the automorphism t -> t^a of a cyclotomic field."""
        return evaluate_at(self, self.field.gen ** a)


def evaluate_at(x: FieldElem, image: FieldElem) -> FieldElem:
    """Substitute t -> image (Horner) and return an element of image.field."""
    out = image.field.zero
    for c in reversed(x.coeffs):
        out = out * image + c
    return out


def embed(x: FieldElem, target: NumberField) -> FieldElem:
    """Image of x under the canonical embedding into a larger cyclotomic field."""
    src = x.field
    if src == target:
        return x
    if x.is_rational():
        return target(x.coeffs[0])
    c = src.cyclotomic_order
    if c is None or target.cyclotomic_order is None:
        raise TypeError(f"no canonical embedding {src} -> {target}")
    z = target.root_of_unity(c)
    if z is None:
        raise TypeError(f"{target} does not contain {src}")
    return evaluate_at(x, z)


def rational_field() -> NumberField:
    return cyclotomic_field(1)


@lru_cache(maxsize=None)
def cyclotomic_field(n: int) -> NumberField:
    """Q(zeta_n) = Q[t]/(Phi_n(t)); degree phi(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = list(cyclotomic_poly(n))
    label = "Q" if n <= 2 else f"Q(zeta_{n})"
    field = NumberField(p, label=label, cyclotomic_order=n, unchecked=False)
    assert field.degree == _euler_phi(n)
    return field


def parse_field(spec) -> NumberField:
    """Build a field from the scenario form {"kind": ...}."""
    kind = spec.get("kind", "rational") if isinstance(spec, dict) else spec
    if kind in ("rational", "Q"):
        return rational_field()
    if kind == "cyclotomic":
        return cyclotomic_field(int(spec["n"]))
    if kind == "min_poly":
        return NumberField(spec["coeffs"], label=spec.get("label"), unchecked=True)
    raise ValueError(f"unknown field kind {kind!r}")


def field_to_json(field: NumberField):
    if field.cyclotomic_order is not None:
        if field.cyclotomic_order == 1:
            return {"kind": "rational"}
        return {"kind": "cyclotomic", "n": field.cyclotomic_order}
    return {"kind": "min_poly", "coeffs": [str(c) for c in field.min_poly], "label": field.label}


def elem_from_json(field: NumberField, value) -> FieldElem:
    if isinstance(value, list):
        return field(value)
    return field(_frac(value))
