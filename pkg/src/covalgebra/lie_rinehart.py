"""Enveloping algebras of Lie-Rinehart pairs (A, L) with L free over A.

Elements are kept in PBW normal form: sums of a * l^alpha with the
coefficient on the left and generators in declaration order.  The
straightening rules are

    l_j * a  ->  a * l_j + rho(l_j)(a)
    l_b * l_a ->  l_a * l_b + [l_b, l_a]      (b > a)
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from math import comb

from .algebra.laurent import LaurentPoly
from .algebra.numberfield import NumberField
from .covers import CoverAlgebra, LaurentAlgebra, MonomialSubstitution


class NotLieRinehart(ValueError):
    pass


# -- coefficient rings --------------------------------------------------------------

class LaurentCoeffs:
    """A = k[x^+-1] itself; elements are LaurentPoly."""

    def __init__(self, base: LaurentAlgebra):
        self.base = base

    @property
    def zero(self):
        return self.base.zero

    @property
    def one(self):
        return self.base.one

    def from_base(self, a):
        return self.base.parse(a) if not isinstance(a, LaurentPoly) else a

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return not a.terms

    def derive(self, values, a):
        return a.apply_derivation(values)

    def fmt(self, a):
        return str(a)

    def __eq__(self, other):
        return isinstance(other, LaurentCoeffs) and other.base == self.base

    def __hash__(self):
        return hash(("laurent", self.base))


class CoverCoeffs:
    """A finite etale A-algebra B; elements are coordinate tuples, base
    derivations act through their unique lift."""

    def __init__(self, B: CoverAlgebra):
        self.B = B
        self.base = B.base

    @property
    def zero(self):
        return tuple(self.base.zero for _ in range(self.B.rank))

    @property
    def one(self):
        return tuple(self.B.one())

    def from_base(self, a):
        a = self.base.parse(a) if not isinstance(a, LaurentPoly) else a
        return (a,) + tuple(self.base.zero for _ in range(self.B.rank - 1))

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def mul(self, a, b):
        return tuple(self.B.mul(list(a), list(b)))

    def neg(self, a):
        return tuple(-x for x in a)

    def is_zero(self, a):
        return all(not x.terms for x in a)

    def derive(self, values, a):
        D = self.B.lift(values)
        out = []
        for i in range(self.B.rank):
            v = a[i].apply_derivation(values)
            for j in range(self.B.rank):
                if D[i][j].terms and a[j].terms:
                    v = v + D[i][j] * a[j]
            out.append(v)
        return tuple(out)

    def fmt(self, a):
        parts = []
        for i, x in enumerate(a):
            if x.terms:
                lab = self.B.labels[i] if self.B.labels else f"b{i}"
                if i == 0:
                    parts.append(str(x))
                elif x == x.constant(x.field, x.nvars, 1):
                    parts.append(lab)
                else:
                    parts.append(f"({x})*{lab}")
        return " + ".join(parts) or "0"

    def __eq__(self, other):
        return isinstance(other, CoverCoeffs) and other.B is self.B

    def __hash__(self):
        return hash(("cover", id(self.B)))


# -- pairs ----------------------------------------------------------------------------

@dataclass
class LieRinehartPair:
    """Free L with generators l_1..l_s, anchor rho(l_j) given by its values on
    the base variables, and bracket [l_a, l_b] = sum_j bracket[a][b][j] l_j."""

    ring: object
    rank: int
    anchor: list
    bracket: list
    names: list = dc_field(default_factory=list)

    def __post_init__(self):
        if not self.names:
            self.names = [f"l{j + 1}" for j in range(self.rank)]

    @property
    def base(self) -> LaurentAlgebra:
        return self.ring.base

    def rho(self, j, a):
        return self.ring.derive(self.anchor[j], a)

    # brackets of A-linear combinations of generators
    def lbracket(self, u, v):
        """[sum u_i l_i, sum v_j l_j] as a coefficient vector."""
        R = self.ring
        out = [R.zero] * self.rank
        for i, ui in enumerate(u):
            if R.is_zero(ui):
                continue
            for j, vj in enumerate(v):
                if R.is_zero(vj):
                    continue
                uv = R.mul(ui, vj)
                for k, c in enumerate(self.bracket[i][j]):
                    if not R.is_zero(c):
                        out[k] = R.add(out[k], R.mul(uv, c))
                out[j] = R.add(out[j], R.mul(ui, self.rho(i, vj)))
                out[i] = R.add(out[i], R.neg(R.mul(vj, self.rho(j, ui))))
        return out

    def unit_vec(self, j):
        return [self.ring.one if i == j else self.ring.zero for i in range(self.rank)]

    def check_antisymmetry(self):
        R = self.ring
        for a in range(self.rank):
            for b in range(self.rank):
                for x, y in zip(self.bracket[a][b], self.bracket[b][a]):
                    if not R.is_zero(R.add(x, y)):
                        return False
        return True

    def check_jacobi(self):
        R = self.ring
        e = self.unit_vec
        for a, b, c in itertools.combinations(range(self.rank), 3):
            t1 = self.lbracket(e(a), self.lbracket(e(b), e(c)))
            t2 = self.lbracket(e(b), self.lbracket(e(c), e(a)))
            t3 = self.lbracket(e(c), self.lbracket(e(a), e(b)))
            if any(not R.is_zero(R.add(R.add(x, y), z)) for x, y, z in zip(t1, t2, t3)):
                return False
        return True

    def check_anchor(self):
        """rho([l_a, l_b]) = [rho(l_a), rho(l_b)] on the base variables."""
        base = self.base
        for a in range(self.rank):
            for b in range(a + 1, self.rank):
                for i in range(base.nvars):
                    xi = self.ring.from_base(base.var(i))
                    lhs = self.ring.zero
                    for k, c in enumerate(self.bracket[a][b]):
                        if not self.ring.is_zero(c):
                            lhs = self.ring.add(lhs, self.ring.mul(c, self.rho(k, xi)))
                    rhs = self.ring.add(self.rho(a, self.rho(b, xi)), self.ring.neg(self.rho(b, self.rho(a, xi))))
                    if lhs != rhs:
                        return False
        return True

    def validate(self):
        if not self.check_antisymmetry():
            raise NotLieRinehart("bracket is not antisymmetric")
        if not self.check_jacobi():
            raise NotLieRinehart("Jacobi identity fails")
        if not self.check_anchor():
            raise NotLieRinehart("anchor does not respect brackets")
        return True

    def element(self, terms) -> "UEAElement":
        """From {alpha: coefficient}; coefficients may be base-ring data."""
        R = self.ring
        out = {}
        for alpha, c in terms.items():
            c = self.coerce(c)
            if not R.is_zero(c):
                out[tuple(alpha)] = c
        return UEAElement(self, out)

    def gen(self, j) -> "UEAElement":
        a = [0] * self.rank
        a[j] = 1
        return UEAElement(self, {tuple(a): self.ring.one})

    def coerce(self, c):
        """Ring element from native data or base-ring data."""
        if isinstance(self.ring, CoverCoeffs) and isinstance(c, tuple):
            return c
        return self.ring.from_base(c)

    def scalar(self, a) -> "UEAElement":
        a = self.coerce(a)
        return UEAElement(self, {} if self.ring.is_zero(a) else {(0,) * self.rank: a})

    def one(self) -> "UEAElement":
        return self.scalar(self.ring.one)


def derivation_pair(base: LaurentAlgebra) -> LieRinehartPair:
    """L = Der(A) with basis d/dx_i."""
    R = LaurentCoeffs(base)
    m = base.nvars
    names = ["d"] if m == 1 else [f"d{i + 1}" for i in range(m)]
    return LieRinehartPair(R, m, [base.coordinate_derivation(i) for i in range(m)],
                           [[[R.zero] * m for _ in range(m)] for _ in range(m)], names)


def euler_pair(base: LaurentAlgebra) -> LieRinehartPair:
    """Rank-m pair spanned by x_i d/dx_i (commuting)."""
    R = LaurentCoeffs(base)
    m = base.nvars
    anchor = [[base.var(i) if j == i else base.zero for j in range(m)] for i in range(m)]
    names = ["e"] if m == 1 else [f"e{i + 1}" for i in range(m)]
    return LieRinehartPair(R, m, anchor, [[[R.zero] * m for _ in range(m)] for _ in range(m)], names)


def free_pair(base: LaurentAlgebra, anchor_values, bracket=None, names=None) -> LieRinehartPair:
    R = LaurentCoeffs(base)
    s = len(anchor_values)
    anchor = [[base.parse(v) for v in vals] for vals in anchor_values]
    if bracket is None:
        br = [[[R.zero] * s for _ in range(s)] for _ in range(s)]
    else:
        br = [[[base.parse(c) for c in row] for row in M] for M in bracket]
    return LieRinehartPair(R, s, anchor, br, names or [])


def derivation_pair_with_commutators(base: LaurentAlgebra, vector_fields, names=None):
    """Generators given as derivations sum_i f_i d/dx_i; the bracket is the
    commutator, which must lie in the A-span of the generators (solved
    exactly by comparing coefficients)."""
    from .algebra.linalg import laurent_coordinates
    R = LaurentCoeffs(base)
    V = [[base.parse(f) for f in vf] for vf in vector_fields]
    s = len(V)
    cols = [list(v) for v in V]
    br = [[[R.zero] * s for _ in range(s)] for _ in range(s)]
    for a in range(s):
        for b in range(s):
            if a == b:
                continue
            comm = [V[b][i].apply_derivation(V[a]) - V[a][i].apply_derivation(V[b]) for i in range(base.nvars)]
            if all(not c.terms for c in comm):
                continue
            co = laurent_coordinates(cols, comm)
            if co is None:
                raise NotLieRinehart("commutator leaves the span of the generators")
            br[a][b] = co
    return LieRinehartPair(R, s, V, br, names or [])


# -- normal forms -------------------------------------------------------------------------

def _clean(R, d):
    return {k: v for k, v in d.items() if not R.is_zero(v)}


def _addto(R, d, alpha, c):
    if R.is_zero(c):
        return
    if alpha in d:
        s = R.add(d[alpha], c)
        if R.is_zero(s):
            del d[alpha]
        else:
            d[alpha] = s
    else:
        d[alpha] = c


class UEAElement:
    """Normal-form element of U(L): {alpha: coefficient}."""

    __slots__ = ("pair", "terms")

    def __init__(self, pair: LieRinehartPair, terms):
        self.pair = pair
        self.terms = _clean(pair.ring, dict(terms))

    @property
    def filtration_degree(self):
        return max((sum(a) for a in self.terms), default=-1)

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        R = self.pair.ring
        out = dict(self.terms)
        for a, c in other.terms.items():
            _addto(R, out, a, c)
        return UEAElement(self.pair, out)

    def __neg__(self):
        R = self.pair.ring
        return UEAElement(self.pair, {a: R.neg(c) for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return uea_multiply(self, other)

    def __eq__(self, other):
        return isinstance(other, UEAElement) and self.pair is other.pair and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms))

    def leading(self):
        d = self.filtration_degree
        return {a: c for a, c in self.terms.items() if sum(a) == d}

    def __str__(self):
        return format_element(self)

    def __repr__(self):
        return f"UEAElement({self})"


def format_element(u: UEAElement) -> str:
    """Canonical text: terms by degree then exponent, each as (a)*l^alpha."""
    if not u.terms:
        return "0"
    R, names = u.pair.ring, u.pair.names
    parts = []
    for alpha in sorted(u.terms, key=lambda a: (sum(a), tuple(-x for x in a))):
        mon = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(names, alpha) if e)
        c = R.fmt(u.terms[alpha])
        if not mon:
            parts.append(c)
        elif c == "1":
            parts.append(mon)
        else:
            parts.append(f"({c})*{mon}")
    return " + ".join(parts)


class _Engine:
    """Cached products l_j * l^beta in normal form."""

    def __init__(self, pair):
        self.pair = pair
        self.cache = {}

    def gen_times_monomial(self, j, beta):
        key = (j, beta)
        if key in self.cache:
            return self.cache[key]
        pair, R = self.pair, self.pair.ring
        a = next((i for i in range(j) if beta[i]), None)
        if a is None:
            nb = list(beta)
            nb[j] += 1
            out = {tuple(nb): R.one}
        else:
            # l_j l_a l^rest = l_a (l_j l^rest) + [l_j, l_a] l^rest
            rest = list(beta)
            rest[a] -= 1
            rest = tuple(rest)
            out = dict(self.gen_times(a, self.gen_times_monomial(j, rest)))
            for k, c in enumerate(pair.bracket[j][a]):
                if R.is_zero(c):
                    continue
                for g, cg in self.gen_times_monomial(k, rest).items():
                    _addto(R, out, g, R.mul(c, cg))
        self.cache[key] = out
        return out

    def gen_times(self, j, terms):
        """l_j * (sum c l^beta) = sum (c l_j l^beta + rho_j(c) l^beta)."""
        pair, R = self.pair, self.pair.ring
        out = {}
        for beta, c in terms.items():
            for g, cg in self.gen_times_monomial(j, beta).items():
                _addto(R, out, g, R.mul(c, cg))
            _addto(R, out, beta, pair.rho(j, c))
        return out


_ENGINES: dict = {}


def _engine(pair):
    eng = _ENGINES.get(id(pair))
    if eng is None or eng.pair is not pair:
        eng = _Engine(pair)
        _ENGINES[id(pair)] = eng
    return eng


def uea_multiply(u: UEAElement, v: UEAElement) -> UEAElement:
    if u.pair is not v.pair:
        raise ValueError("elements of different enveloping algebras")
    pair, R = u.pair, u.pair.ring
    eng = _engine(pair)
    out = {}
    for alpha, a in u.terms.items():
        cur = dict(v.terms)
        word = [j for j in range(pair.rank) for _ in range(alpha[j])]
        for j in reversed(word):
            cur = eng.gen_times(j, cur)
        for g, c in cur.items():
            _addto(R, out, g, R.mul(a, c))
    return UEAElement(pair, out)


def word_product(pair, word) -> UEAElement:
    """Normal form of l_{w_1} ... l_{w_k}."""
    out = pair.one()
    for j in word:
        out = uea_multiply(out, pair.gen(j))
    return out


# -- actions ------------------------------------------------------------------------------

def uea_act(u: UEAElement, target, module=None):
    """u . target for target in the coefficient ring, or for a coordinate
    vector of a connection module (l_j acting as nabla along rho(l_j))."""
    pair, R = u.pair, u.pair.ring
    if module is None:
        out = R.zero
        for alpha, a in u.terms.items():
            cur = target
            word = [j for j in range(pair.rank) for _ in range(alpha[j])]
            for j in reversed(word):
                cur = pair.rho(j, cur)
            out = R.add(out, R.mul(a, cur))
        return out
    from .connmod import _gamma_along, matvec
    r = module.rank
    out = [module.base.zero] * r
    for alpha, a in u.terms.items():
        cur = list(target)
        word = [j for j in range(pair.rank) for _ in range(alpha[j])]
        for j in reversed(word):
            th = pair.anchor[j]
            G = _gamma_along(module, th)
            gv = matvec(G, cur)
            cur = [x.apply_derivation(th) + y for x, y in zip(cur, gv)]
        out = [o + a * c for o, c in zip(out, cur)]
    return out


# -- associated graded --------------------------------------------------------------------

@dataclass
class GradedTable:
    rank: int
    dims: list
    expected: list
    symmetric: bool

    @property
    def ok(self):
        return self.dims == self.expected and self.symmetric

    def to_json(self):
        return {"rank": self.rank, "dims": self.dims, "expected": self.expected, "symmetric": self.symmetric}


def graded_dimension_check(pair: LieRinehartPair, up_to_degree: int) -> GradedTable:
    """Rank of F_d / F_{d-1} from normal forms of all words of length d,
    against binomial(s + d - 1, d).  Also checks that every word's top part
    is the sorted monomial with coefficient 1 (the symbol map lands in Sym)."""
    s = pair.rank
    R = pair.ring
    dims, expected, sym = [], [], True
    for d in range(up_to_degree + 1):
        tops = set()
        for word in itertools.product(range(s), repeat=d):
            u = word_product(pair, word)
            alpha = tuple(word.count(j) for j in range(s))
            top = u.leading()
            if u.filtration_degree != d or set(top) != {alpha} or top[alpha] != R.one:
                sym = False
            tops |= set(top)
        dims.append(len(tops))
        expected.append(comb(s + d - 1, d))
    return GradedTable(s, dims, expected, sym)


# -- random elements ----------------------------------------------------------------------

def random_coefficient(base: LaurentAlgebra, rng: random.Random, terms=2, span=2):
    out = base.zero
    for _ in range(rng.randint(1, terms)):
        e = [rng.randint(-span, span) for _ in range(base.nvars)]
        out = out + LaurentPoly.monomial(base.field, base.nvars, e, rng.choice([-2, -1, 1, 2, 3]))
    return out


def random_element(pair: LieRinehartPair, rng: random.Random, max_degree=3, max_terms=3) -> UEAElement:
    out = {}
    R = pair.ring
    for _ in range(rng.randint(1, max_terms)):
        d = rng.randint(0, max_degree)
        alpha = [0] * pair.rank
        for _ in range(d):
            alpha[rng.randrange(pair.rank)] += 1
        _addto(R, out, tuple(alpha), R.from_base(random_coefficient(pair.base, rng)))
    return UEAElement(pair, out)


def confluence_check(pair, rng, trials=200, max_degree=3):
    """(u v) w == u (v w) on random triples; returns the number of failures."""
    bad = 0
    for _ in range(trials):
        u, v, w = (random_element(pair, rng, max_degree) for _ in range(3))
        if uea_multiply(uea_multiply(u, v), w) != uea_multiply(u, uea_multiply(v, w)):
            bad += 1
    return bad


def action_check(pair, rng, trials=50, max_degree=3):
    """uea_act(uv, t) == uea_act(u, uea_act(v, t)); returns failures."""
    bad = 0
    for _ in range(trials):
        u, v = random_element(pair, rng, max_degree), random_element(pair, rng, max_degree)
        t = pair.ring.from_base(random_coefficient(pair.base, rng, 3, 3))
        if uea_act(uea_multiply(u, v), t) != uea_act(u, uea_act(v, t)):
            bad += 1
    return bad


# -- base change --------------------------------------------------------------------------

def _monomials(s, d):
    out = []
    for k in range(d + 1):
        for combo in itertools.combinations_with_replacement(range(s), k):
            out.append(tuple(combo.count(j) for j in range(s)))
    return out


@dataclass
class BaseChangeCertificate:
    kind: str
    degree: int
    basis_size: int
    invertible: bool
    multiplicative: bool
    samples: int
    straightening: list = dc_field(default_factory=list)

    @property
    def ok(self):
        return self.invertible and self.multiplicative

    def to_json(self):
        return {"kind": self.kind, "degree": self.degree, "basis_size": self.basis_size,
                "invertible": self.invertible, "multiplicative": self.multiplicative,
                "samples": self.samples, "straightening": self.straightening}


def _pair_over_cover(pair: LieRinehartPair, B: CoverAlgebra) -> LieRinehartPair:
    R = CoverCoeffs(B)
    br = [[[R.from_base(c) for c in row] for row in M] for M in pair.bracket]
    return LieRinehartPair(R, pair.rank, pair.anchor, br, list(pair.names))


def _pair_over_field(pair: LieRinehartPair, L: NumberField) -> LieRinehartPair:
    base = pair.base.with_field(L)
    R = LaurentCoeffs(base)
    anchor = [[v.change_field(L) for v in vals] for vals in pair.anchor]
    br = [[[c.change_field(L) for c in row] for row in M] for M in pair.bracket]
    return LieRinehartPair(R, pair.rank, anchor, br, list(pair.names))


def _pair_twisted(pair: LieRinehartPair, sig: MonomialSubstitution) -> LieRinehartPair:
    from .connmod import transported_derivations
    base = pair.base
    thetas = transported_derivations(sig, base)    # sigma d_i sigma^-1 on variables
    anchor = []
    for vals in pair.anchor:
        # sigma o (sum v_i d_i) o sigma^-1 = sum sigma(v_i) theta_i
        new = [base.zero] * base.nvars
        for i, v in enumerate(vals):
            sv = sig.apply(v, base)
            new = [a + sv * t for a, t in zip(new, thetas[i])]
        anchor.append(new)
    R = pair.ring
    br = [[[sig.apply(c, base) for c in row] for row in M] for M in pair.bracket]
    return LieRinehartPair(R, pair.rank, anchor, br, list(pair.names))


def uea_base_change(pair: LieRinehartPair, extension=None, degree=3, rng=None, samples=20):
    """Compare B (x)_A U(L) with U(B (x)_A L) on normal-form bases up to the
    given degree.  Supported extensions: None (identity), a NumberField
    (coefficient extension), a MonomialSubstitution (automorphism of A) and a
    CoverAlgebra over the same base (anchor lifted to B)."""
    rng = rng or random.Random(11)
    if extension is None:
        kind, target = "identity", pair

        def phi_coeff(c):
            return c
    elif isinstance(extension, NumberField):
        kind, target = "field", _pair_over_field(pair, extension)

        def phi_coeff(c):
            return c.change_field(extension)
    elif isinstance(extension, MonomialSubstitution):
        extension.validate()
        kind, target = "substitution", _pair_twisted(pair, extension)

        def phi_coeff(c):
            return extension.apply(c, pair.base)
    elif isinstance(extension, CoverAlgebra):
        kind, target = "cover", _pair_over_cover(pair, extension)
        phi_coeff = target.ring.from_base
    else:
        raise TypeError(f"unsupported extension {type(extension).__name__}")
    target.validate()

    def phi(u):
        return UEAElement(target, {a: phi_coeff(c) for a, c in u.terms.items()})

    basis = _monomials(pair.rank, degree)
    # phi maps the basis l^alpha to l^alpha; the coefficient extension is
    # free, so the matrix on F_d is the identity on the B-basis b_i l^alpha
    images = [phi(UEAElement(pair, {a: pair.ring.one})) for a in basis]
    invertible = all(set(img.terms) == {a} and img.terms[a] == target.ring.one
                     for img, a in zip(images, basis))
    mult = True
    pool = [UEAElement(pair, {a: pair.ring.one}) for a in basis if sum(a) <= 2]
    pool += [pair.scalar(pair.base.var(i)) for i in range(pair.base.nvars)]
    pool += [random_element(pair, rng, 2) for _ in range(samples)]
    count = 0
    for u in pool:
        for v in pool[:len(pool) // 2 + 1]:
            if phi(uea_multiply(u, v)) != uea_multiply(phi(u), phi(v)):
                mult = False
            count += 1
    table = []
    if kind == "cover":
        B = extension
        for i in range(1, B.rank):
            b = target.scalar(tuple(B.basis_vec(i)))
            for j in range(pair.rank):
                prod = uea_multiply(target.gen(j), b)
                table.append(f"{pair.names[j]} * {B.labels[i] if B.labels else i} = {prod}")
    return BaseChangeCertificate(kind, degree, len(basis), invertible, mult, count, table)


__all__ = [
    "LieRinehartPair", "UEAElement", "LaurentCoeffs", "CoverCoeffs", "NotLieRinehart", "GradedTable",
    "BaseChangeCertificate", "derivation_pair", "euler_pair", "free_pair",
    "derivation_pair_with_commutators", "uea_multiply", "uea_act", "graded_dimension_check",
    "uea_base_change", "word_product", "random_element", "random_coefficient", "confluence_check",
    "action_check", "format_element",
]
