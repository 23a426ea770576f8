"""Finite groups, their representations over number fields, characters,
central primitive idempotents and tensor-finiteness witnesses."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

from .algebra.linalg import field_kernel, field_matmul, field_rref, field_solve_combination, sparse_kernel
from .algebra.numberfield import FieldElem, NumberField, rational_field
from .algebra.upoly import UPoly, charpoly, factor, minpoly_of_operator, upoly_gcd


class InvalidTable(ValueError):
    pass


class NotAHomomorphism(ValueError):
    pass


class NotACharacter(ValueError):
    pass


class ZeroRepresentation(ValueError):
    pass


class FiniteGroup:
    """A group given by its multiplication table; element 0 is the identity."""

    def __init__(self, table, label="G", names=None, kind=None):
        self.mul = tuple(tuple(int(x) for x in row) for row in table)
        self.order = len(self.mul)
        self.label = label
        self.kind = kind
        self.names = tuple(names) if names else tuple(f"g{i}" for i in range(self.order))
        self._validate()
        self.inv = tuple(next(h for h in range(self.order) if self.mul[g][h] == 0) for g in range(self.order))
        self.conj_classes = self._classes()
        self.class_of = [0] * self.order
        for ci, cl in enumerate(self.conj_classes):
            for g in cl:
                self.class_of[g] = ci
        self._hash = hash(self.mul)

    def _validate(self):
        n = self.order
        if n == 0 or any(len(row) != n for row in self.mul):
            raise InvalidTable("table must be square and nonempty")
        rng = set(range(n))
        for row in self.mul:
            if set(row) != rng:
                raise InvalidTable("rows must be permutations (Latin square)")
        for col in range(n):
            if {self.mul[r][col] for r in range(n)} != rng:
                raise InvalidTable("columns must be permutations (Latin square)")
        if self.mul[0] != tuple(range(n)) or any(self.mul[g][0] != g for g in range(n)):
            raise InvalidTable("element 0 must be the identity")
        m = self.mul
        for a in range(n):
            for b in range(n):
                ab = m[a][b]
                for c in range(n):
                    if m[ab][c] != m[a][m[b][c]]:
                        raise InvalidTable(f"associativity fails at ({a},{b},{c})")

    def _classes(self):
        seen, classes = set(), []
        for g in range(self.order):
            if g in seen:
                continue
            cl = sorted({self.mul[self.mul[h][g]][self.inv[h]] for h in range(self.order)})
            seen.update(cl)
            classes.append(tuple(cl))
        return tuple(classes)

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and self.mul == other.mul

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"FiniteGroup({self.label}, order={self.order})"

    def __len__(self):
        return self.order

    def elements(self):
        return range(self.order)

    def m(self, a, b):
        return self.mul[a][b]

    def power(self, g, k):
        out = 0
        if k < 0:
            g, k = self.inv[g], -k
        for _ in range(k):
            out = self.mul[out][g]
        return out

    def element_order(self, g):
        k, h = 1, g
        while h != 0:
            h = self.mul[h][g]
            k += 1
        return k

    @property
    def exponent(self):
        e = 1
        for g in range(self.order):
            o = self.element_order(g)
            e = e * o // gcd(e, o)
        return e

    def is_abelian(self):
        return all(self.mul[a][b] == self.mul[b][a] for a in range(self.order) for b in range(a))

    def generated(self, gens):
        elems = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul[x][g]
                    if y not in elems:
                        elems.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(elems)

    @property
    def generators(self):
        """A small generating set, chosen greedily by element order."""
        if not hasattr(self, "_gens"):
            gens, span = [], {0}
            for g in sorted(range(1, self.order), key=lambda g: (-self.element_order(g), g)):
                if g not in span:
                    gens.append(g)
                    span = set(self.generated(gens))
                if len(span) == self.order:
                    break
            self._gens = tuple(gens)
        return self._gens

    def is_subgroup(self, elems):
        s = set(elems)
        return 0 in s and all(self.mul[a][self.inv[b]] in s for a in s for b in s)

    def is_normal(self, elems):
        s = set(elems)
        return self.is_subgroup(s) and all(self.mul[self.mul[g][h]][self.inv[g]] in s
                                           for g in range(self.order) for h in s)

    def subgroup(self, elems, label=None):
        """(subgroup as FiniteGroup, embedding list) for a subset closed under mul."""
        elems = sorted(set(elems))
        if not self.is_subgroup(elems):
            raise InvalidTable("not a subgroup")
        pos = {g: i for i, g in enumerate(elems)}
        table = [[pos[self.mul[a][b]] for b in elems] for a in elems]
        return FiniteGroup(table, label or f"sub({self.label})", [self.names[g] for g in elems]), elems

    def quotient(self, normal, label=None):
        """(quotient group, projection list) for a normal subgroup."""
        if not self.is_normal(normal):
            raise NotAHomomorphism("subgroup is not normal")
        cosets, which = [], {}
        for g in range(self.order):
            if g in which:
                continue
            c = sorted(self.mul[g][n] for n in normal)
            for x in c:
                which[x] = len(cosets)
            cosets.append(c)
        table = [[which[self.mul[a[0]][b[0]]] for b in cosets] for a in cosets]
        return FiniteGroup(table, label or f"{self.label}/N"), [which[g] for g in range(self.order)]

    def to_json(self):
        return {"label": self.label, "order": self.order, "classes": [list(c) for c in self.conj_classes]}


# -- builders ------------------------------------------------------------------

def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)], f"C{n}",
                       [f"g^{a}" for a in range(n)], kind=("cyclic", n))


def dihedral_group(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n; index a + n*b stands for r^a s^b."""
    def idx(a, b):
        return (a % n) + n * (b % 2)
    table = []
    for b1 in range(2):
        for a1 in range(n):
            row = [None] * (2 * n)
            for b2 in range(2):
                for a2 in range(n):
                    row[idx(a2, b2)] = idx(a1 + (a2 if b1 == 0 else -a2), b1 + b2)
            table.append(row)
    names = [f"r^{a}" if b == 0 else f"r^{a}s" for b in range(2) for a in range(n)]
    return FiniteGroup(table, f"D{n}", names, kind=("dihedral", n))


def symmetric_group(n: int) -> FiniteGroup:
    if n > 4:
        raise ValueError("symmetric groups are supported for n <= 4")
    perms = list(itertools.permutations(range(n)))
    pos = {p: i for i, p in enumerate(perms)}
    table = [[pos[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms]
    names = ["".join(str(i + 1) for i in p) for p in perms]
    g = FiniteGroup(table, f"S{n}", names, kind=("symmetric", n))
    g.perms = perms
    return g


def quaternion_group() -> FiniteGroup:
    # units 1,i,j,k with signs; index = 2*unit + (sign<0)
    mult = {("1", u): (1, u) for u in "1ijk"}
    mult.update({(u, "1"): (1, u) for u in "1ijk"})
    mult.update({("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
                 ("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j"),
                 ("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j")})
    elems = [(s, u) for u in "1ijk" for s in (1, -1)]
    pos = {e: i for i, e in enumerate(elems)}
    table = []
    for s1, u1 in elems:
        row = []
        for s2, u2 in elems:
            s, u = mult[(u1, u2)]
            row.append(pos[(s * s1 * s2, u)])
        table.append(row)
    names = [("" if s > 0 else "-") + u for s, u in elems]
    return FiniteGroup(table, "Q8", names, kind=("quaternion", 8))


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    n, m = G.order, H.order
    table = [[G.mul[a // m][b // m] * m + H.mul[a % m][b % m] for b in range(n * m)] for a in range(n * m)]
    names = [f"({G.names[a // m]},{H.names[a % m]})" for a in range(n * m)]
    return FiniteGroup(table, f"{G.label}x{H.label}", names, kind=("product", G.kind, H.kind))


def units_group(n: int) -> FiniteGroup:
    """(Z/n)^x, elements listed in increasing order (1 first)."""
    units = [u for u in range(1, max(n, 2)) if gcd(u, n) == 1] if n > 1 else [1]
    pos = {u: i for i, u in enumerate(units)}
    table = [[pos[(a * b) % n if n > 1 else 1] for b in units] for a in units]
    g = FiniteGroup(table, f"U{n}", [f"t->t^{u}" for u in units], kind=("units", n))
    g.units = units
    return g


def holomorph_cyclic(n: int) -> FiniteGroup:
    """Z/n x| (Z/n)^x with (a,u)(b,v) = (a + u b, u v); S3 for n = 3."""
    units = [u for u in range(1, n) if gcd(u, n) == 1]
    elems = [(a, u) for u in units for a in range(n)]
    pos = {e: i for i, e in enumerate(elems)}
    table = [[pos[((a + u * b) % n, (u * v) % n)] for (b, v) in elems] for (a, u) in elems]
    g = FiniteGroup(table, f"Hol(C{n})", [f"({a},{u})" for a, u in elems], kind=("holomorph", n))
    g.pairs = elems
    return g


def trivial_group() -> FiniteGroup:
    return FiniteGroup([[0]], "1", ["e"], kind=("cyclic", 1))


def build_group(spec) -> FiniteGroup:
    """Group from a scenario spec such as {"kind": "cyclic", "n": 4}."""
    kind = spec["kind"]
    if kind == "cyclic":
        return cyclic_group(int(spec["n"]))
    if kind == "dihedral":
        return dihedral_group(int(spec["n"]))
    if kind == "symmetric":
        return symmetric_group(int(spec["n"]))
    if kind == "quaternion8":
        return quaternion_group()
    if kind == "direct_product":
        return direct_product(build_group(spec["left"]), build_group(spec["right"]))
    if kind == "units":
        return units_group(int(spec["n"]))
    if kind == "holomorph":
        return holomorph_cyclic(int(spec["n"]))
    if kind == "trivial":
        return trivial_group()
    if kind == "table":
        return FiniteGroup(spec["table"], spec.get("label", "G"), spec.get("names"))
    raise ValueError(f"unknown group kind {kind!r}")


# -- group algebra -----------------------------------------------------------------

def ga_mul(a, b, group: FiniteGroup, field: NumberField):
    out = [field.zero] * group.order
    for g, x in enumerate(a):
        if x.is_zero():
            continue
        row = group.mul[g]
        for h, y in enumerate(b):
            if not y.is_zero():
                out[row[h]] = out[row[h]] + x * y
    return out


def ga_element(group, field, g):
    return [field.one if h == g else field.zero for h in range(group.order)]


def ga_is_central(a, group, field):
    return all(ga_mul(a, ga_element(group, field, g), group, field) ==
               ga_mul(ga_element(group, field, g), a, group, field) for g in group.generators)


# -- representations ----------------------------------------------------------------

def _ident(n, field):
    return [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]


class GroupRep:
    """A matrix representation: matrices[g] is the d x d matrix of g."""

    def __init__(self, group: FiniteGroup, field: NumberField, matrices, label="V", check=True):
        self.group = group
        self.field = field
        self.matrices = tuple(tuple(tuple(field(x) for x in row) for row in M) for M in matrices)
        self.dim = len(self.matrices[0]) if self.matrices else 0
        self.label = label
        if len(self.matrices) != group.order:
            raise ValueError("one matrix per group element required")
        if check:
            self._validate()

    def _validate(self):
        f = self.field
        if [list(r) for r in self.matrices[0]] != _ident(self.dim, f):
            raise NotAHomomorphism("identity must act as the identity matrix")
        for g in range(self.group.order):
            for h in self.group.generators:
                lhs = field_matmul([list(r) for r in self.matrices[g]], [list(r) for r in self.matrices[h]], f)
                if lhs != [list(r) for r in self.matrices[self.group.mul[g][h]]]:
                    raise NotAHomomorphism(f"M({g})M({h}) != M({g}{h})")

    @classmethod
    def from_generators(cls, group, field, images, label="V"):
        """Extend {g: matrix} multiplicatively; the g must generate the group."""
        if not images:
            raise ValueError("no generator images given")
        d = len(next(iter(images.values())))
        mats = {0: _ident(d, field)}
        frontier = [0]
        while frontier:
            nxt = []
            for g in frontier:
                for s, S in images.items():
                    h = group.mul[g][s]
                    P = field_matmul(mats[g], S, field)
                    if h not in mats:
                        mats[h] = P
                        nxt.append(h)
                    elif mats[h] != P:
                        raise NotAHomomorphism("generator images violate a relation")
            frontier = nxt
        if len(mats) != group.order:
            raise NotAHomomorphism("given elements do not generate the group")
        return cls(group, field, [mats[g] for g in range(group.order)], label)

    def matrix(self, g):
        return [list(r) for r in self.matrices[g]]

    def character(self) -> "Character":
        return Character(self.group, self.field,
                         [sum((M[i][i] for i in range(self.dim)), self.field.zero) for M in self.matrices])

    def __repr__(self):
        return f"GroupRep({self.label}, dim={self.dim}, {self.group.label}, {self.field.label})"

    def to_json(self):
        return {"label": self.label, "dim": self.dim,
                "matrices": [[[x.to_json() for x in row] for row in M] for M in self.matrices]}


def trivial_rep(group, field, dim=1):
    return GroupRep(group, field, [_ident(dim, field)] * group.order, "triv", check=False)


def zero_rep(group, field):
    return GroupRep(group, field, [[] for _ in range(group.order)], "0", check=False)


def regular_rep(group, field):
    n = group.order
    mats = []
    for g in range(n):
        M = [[field.zero] * n for _ in range(n)]
        for h in range(n):
            M[group.mul[g][h]][h] = field.one
        mats.append(M)
    return GroupRep(group, field, mats, "reg", check=False)


def one_dim_rep(group, field, values, label="chi"):
    return GroupRep(group, field, [[[field(v)]] for v in values], label)


def sign_rep(group, field):
    """The sign character: permutation parity for S_n, s -> -1 for dihedral and
    the order-2 quotient of a cyclic group of even order."""
    kind = group.kind[0] if group.kind else None
    if kind == "symmetric":
        vals = [_perm_sign(p) for p in group.perms]
    elif kind == "dihedral":
        n = group.kind[1]
        vals = [1 if g < n else -1 for g in range(group.order)]
    elif kind == "cyclic" and group.order % 2 == 0:
        vals = [(-1) ** a for a in range(group.order)]
    elif kind == "units" or kind == "holomorph" or group.order == 2:
        lin = [b for b in irreducibles(group, rational_field()) if b.dim == 1 and not b.is_trivial]
        if not lin:
            raise ValueError(f"{group.label} has no sign character")
        vals = [lin[0].character.values[g] for g in range(group.order)]
    else:
        raise ValueError(f"no sign character defined for {group.label}")
    return one_dim_rep(group, field, vals, "sign")


def _perm_sign(p):
    s, seen = 1, set()
    for i in range(len(p)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = p[j]
            length += 1
        if length % 2 == 0:
            s = -s
    return s


def cyclic_character(group, field, j, generator=1):
    """g^a -> zeta_n^(j a) for a cyclic group of order n generated by `generator`."""
    n = group.order
    z = field.root_of_unity(n)
    if z is None:
        raise ValueError(f"{field.label} lacks primitive {n}-th roots of unity")
    vals = [None] * n
    for a in range(n):
        vals[group.power(generator, a)] = z ** (j * a)
    return one_dim_rep(group, field, vals, f"chi{j % n}")


def standard_rep_s3(field):
    """The 2-dim irreducible of S3 on {x in k^3 : sum x = 0}, basis e1-e2, e2-e3."""
    G = symmetric_group(3)
    mats = []
    basis = [(1, -1, 0), (0, 1, -1)]
    for p in G.perms:
        imgs = []
        for v in basis:
            w = [0, 0, 0]
            for i in range(3):
                w[p[i]] += v[i]
            # w = a*(1,-1,0) + b*(0,1,-1): a = w0, b = -w2
            imgs.append((w[0], -w[2]))
        mats.append([[imgs[c][r] for c in range(2)] for r in range(2)])
    return GroupRep(G, field, mats, "std")


def direct_sum(*reps):
    G, f = reps[0].group, reps[0].field
    dim = sum(r.dim for r in reps)
    mats = []
    for g in range(G.order):
        M = [[f.zero] * dim for _ in range(dim)]
        off = 0
        for r in reps:
            for i in range(r.dim):
                for j in range(r.dim):
                    M[off + i][off + j] = r.matrices[g][i][j]
            off += r.dim
        mats.append(M)
    return GroupRep(G, f, mats, "+".join(r.label for r in reps), check=False)


def tensor_rep(V, W):
    f = V.field
    mats = []
    for g in range(V.group.order):
        A, B = V.matrices[g], W.matrices[g]
        mats.append([[A[i][j] * B[k][l] for j in range(V.dim) for l in range(W.dim)]
                     for i in range(V.dim) for k in range(W.dim)])
    return GroupRep(V.group, f, mats, f"{V.label}*{W.label}", check=False)


def dual_rep(V):
    G = V.group
    mats = [[[V.matrices[G.inv[g]][j][i] for j in range(V.dim)] for i in range(V.dim)] for g in range(G.order)]
    return GroupRep(G, V.field, mats, f"{V.label}^*", check=False)


def base_change_rep(V, field):
    return GroupRep(V.group, field, [[[field(x) for x in row] for row in M] for M in V.matrices],
                    V.label, check=False)


def restrict_rep(V, subgroup: FiniteGroup, embedding):
    """Restriction along an injective homomorphism subgroup -> V.group."""
    G = V.group
    if len(set(embedding)) != subgroup.order:
        raise NotAHomomorphism("embedding is not injective")
    for a in range(subgroup.order):
        for b in range(subgroup.order):
            if G.mul[embedding[a]][embedding[b]] != embedding[subgroup.mul[a][b]]:
                raise NotAHomomorphism("embedding does not respect the tables")
    return GroupRep(subgroup, V.field, [V.matrices[embedding[h]] for h in range(subgroup.order)],
                    f"{V.label}|", check=False)


def inflate_rep(V, group: FiniteGroup, quotient_map):
    """Inflation along a surjective homomorphism group -> V.group."""
    Q = V.group
    if set(quotient_map) != set(range(Q.order)):
        raise NotAHomomorphism("quotient map is not surjective")
    for a in range(group.order):
        for b in range(group.order):
            if quotient_map[group.mul[a][b]] != Q.mul[quotient_map[a]][quotient_map[b]]:
                raise NotAHomomorphism("quotient map does not respect the tables")
    return GroupRep(group, V.field, [V.matrices[quotient_map[g]] for g in range(group.order)],
                    f"infl({V.label})", check=False)


def intertwiners(V, W):
    """k-basis of Hom_{k[N]}(V, W) as W.dim x V.dim matrices (brute force)."""
    f = V.field
    n, m = V.dim, W.dim
    if n == 0 or m == 0:
        return []
    rows = []
    # X V(g) - W(g) X = 0; unknown X[i][j] at index i*n + j
    for g in V.group.generators:
        A, B = V.matrices[g], W.matrices[g]
        for i in range(m):
            for j in range(n):
                row = {}
                for l in range(n):
                    if not A[l][j].is_zero():
                        row[i * n + l] = row.get(i * n + l, f.zero) + A[l][j]
                for l in range(m):
                    if not B[i][l].is_zero():
                        row[l * n + j] = row.get(l * n + j, f.zero) - B[i][l]
                if row:
                    rows.append(row)
    return [[[v.get(i * n + j, f.zero) for j in range(n)] for i in range(m)]
            for v in sparse_kernel(rows, m * n, f)]


# -- characters -------------------------------------------------------------------

class Character:
    """A class function, stored per element."""

    def __init__(self, group, field, values):
        self.group = group
        self.field = field
        self.values = tuple(field(v) for v in values)

    @property
    def dim(self):
        return self.values[0]

    def is_class_function(self):
        return all(len({self.values[g] for g in cl}) == 1 for cl in self.group.conj_classes)

    def class_values(self):
        return [self.values[cl[0]] for cl in self.group.conj_classes]

    def inner(self, other) -> FieldElem:
        G = self.group
        s = sum((self.values[g] * other.values[G.inv[g]] for g in range(G.order)), self.field.zero)
        return s / G.order

    def __add__(self, other):
        return Character(self.group, self.field, [a + b for a, b in zip(self.values, other.values)])

    def __sub__(self, other):
        return Character(self.group, self.field, [a - b for a, b in zip(self.values, other.values)])

    def __mul__(self, other):
        if isinstance(other, Character):
            return Character(self.group, self.field, [a * b for a, b in zip(self.values, other.values)])
        return Character(self.group, self.field, [a * other for a in self.values])

    __rmul__ = __mul__

    def __pow__(self, n):
        out = Character(self.group, self.field, [1] * self.group.order)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Character) and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def is_zero(self):
        return all(v.is_zero() for v in self.values)

    def __repr__(self):
        return "Character(" + ", ".join(str(v) for v in self.class_values()) + ")"

    def to_json(self):
        return [v.to_json() for v in self.class_values()]


def zero_character(group, field):
    return Character(group, field, [0] * group.order)


# -- k-irreducibles via the centre of k[N] -------------------------------------------

@dataclass(frozen=True)
class CentralIdempotent:
    coeffs: tuple
    rep_label: str

    def to_json(self):
        return {"label": self.rep_label, "coeffs": [c.to_json() for c in self.coeffs]}


@dataclass
class IrreducibleBlock:
    """One k-irreducible representation together with its block data."""

    index: int
    label: str
    rep: GroupRep
    character: Character
    idempotent: CentralIdempotent
    endo_dim: int        # d_rho = dim_k End_{k[N]}(rho)
    centre_dim: int      # dim_k of the centre of the block

    @property
    def dim(self):
        return self.rep.dim

    @property
    def is_trivial(self):
        return self.dim == 1 and all(v == 1 for v in self.character.values)


def _class_sum_structure(group):
    """a[i][j][k] with C_i C_j = sum_k a_ijk C_k (integers)."""
    cls = group.conj_classes
    r = len(cls)
    a = [[[0] * r for _ in range(r)] for _ in range(r)]
    for i, ci in enumerate(cls):
        for j, cj in enumerate(cls):
            counts = {}
            for x in ci:
                for y in cj:
                    z = group.mul[x][y]
                    counts[z] = counts.get(z, 0) + 1
            for k, ck in enumerate(cls):
                a[i][j][k] = counts.get(ck[0], 0)
    return a


def _centre_idempotents(group, field):
    """Primitive idempotents of Z(k[N]) in the class-sum basis."""
    a = _class_sum_structure(group)
    r = len(group.conj_classes)
    rng = random.Random(1729)
    for attempt in range(64):
        if attempt == 0:
            lam = list(range(r))
        else:
            lam = [rng.randint(-3, 3 + attempt) for _ in range(r)]
        # L_c[k][j] = coefficient of C_k in c*C_j
        L = [[sum(lam[i] * a[i][j][k] for i in range(r)) for j in range(r)] for k in range(r)]
        cp = charpoly(L, field)
        if cp.is_squarefree():
            break
    else:
        raise RuntimeError("no primitive element of the centre found")
    Lk = [[field(x) for x in row] for row in L]
    pieces = []
    for mu in factor(cp):
        Mu = _poly_of_matrix(mu, Lk, field)
        pieces.append(field_kernel(Mu, field))
    # 1 = sum e_i with e_i in piece i
    basis = [v for p in pieces for v in p]
    one = [field.one] + [field.zero] * (r - 1)
    coeffs = field_solve_combination(basis, one, field)
    out, pos = [], 0
    for p in pieces:
        e = [field.zero] * r
        for v, c in zip(p, coeffs[pos:pos + len(p)]):
            e = [x + c * y for x, y in zip(e, v)]
        pos += len(p)
        out.append((e, len(p)))
    return out


def _poly_of_matrix(p: UPoly, M, field):
    n = len(M)
    out = [[field.zero] * n for _ in range(n)]
    for c in reversed(p.coeffs):
        out = field_matmul(out, M, field)
        for i in range(n):
            out[i][i] = out[i][i] + c
    return out


def _rep_on_subspace(group, field, basis, act, pivots):
    """Matrices of `act(g, v)` on the span of the reduced rows `basis`;
    coordinates are read off at the pivot columns."""
    n = len(basis)
    mats = []
    for g in range(group.order):
        cols = [act(g, w) for w in basis]
        mats.append([[cols[j][pivots[i]] for j in range(n)] for i in range(n)])
    return mats


def _span_basis(vectors, field):
    R, piv = field_rref(vectors, field)
    return [list(r) for r in R[:len(piv)]], list(piv)


def _commutant(mats, gens, field):
    n = len(mats[0])
    rows = []
    for g in gens:
        A = mats[g]
        for i in range(n):
            for j in range(n):
                row = {}
                for l in range(n):
                    if not A[l][j].is_zero():
                        row[i * n + l] = row.get(i * n + l, field.zero) + A[l][j]
                    if not A[i][l].is_zero():
                        row[l * n + j] = row.get(l * n + j, field.zero) - A[i][l]
                if row:
                    rows.append(row)
    out = []
    for v in sparse_kernel(rows, n * n, field):
        out.append([[v.get(i * n + j, field.zero) for j in range(n)] for i in range(n)])
    return out


def _find_irreducible(group, field, basis, pivots, rng):
    """Shrink a submodule of the left regular module until its endomorphism
    ring has no element with a reducible (or non-squarefree) minimal polynomial."""
    def act(g, v):
        return ga_mul(ga_element(group, field, g), v, group, field)

    while True:
        mats = _rep_on_subspace(group, field, basis, act, pivots)
        E = _commutant(mats, group.generators, field)
        if len(E) == 1:
            return basis, mats, 1
        n = len(basis)
        candidates = list(E)
        for _ in range(12):
            coefs = [rng.randint(-2, 2) for _ in E]
            candidates.append([[sum((c * X[i][j] for c, X in zip(coefs, E)), field.zero) for j in range(n)]
                               for i in range(n)])
        split = None
        for X in candidates:
            mu = minpoly_of_operator(X, field)
            if mu.degree <= 0:
                continue
            sq = mu // upoly_gcd(mu, mu.derivative())
            if sq.degree < mu.degree:
                K = field_kernel(_poly_of_matrix(sq, X, field), field)
            else:
                facs = factor(mu)
                if len(facs) < 2:
                    continue
                K = field_kernel(_poly_of_matrix(facs[0], X, field), field)
            if 0 < len(K) < n:
                split = K
                break
        if split is None:
            return basis, mats, len(E)
        # K holds coordinates in the current basis
        basis, pivots = _span_basis([[sum((c * b[t] for c, b in zip(v, basis)), field.zero)
                              for t in range(group.order)] for v in split], field)


def _value_key(v: FieldElem, field, roots):
    for j, z in enumerate(roots):
        if v == z:
            return (0, j)
    return (1, tuple(v.coeffs))


@lru_cache(maxsize=None)
def irreducibles(group: FiniteGroup, field: NumberField) -> tuple:
    """All k-irreducible representations of N, one per block of k[N].

    Ordered: trivial first, then by dimension and character values.
    """
    N = group.order
    rng = random.Random(7)
    blocks = _split_abelian_blocks(group, field)
    for zc, zdim in ([] if blocks else _centre_idempotents(group, field)):
        e = [field.zero] * N
        for ci, cl in enumerate(group.conj_classes):
            for g in cl:
                e[g] = zc[ci]
        span, piv = _span_basis([ga_mul(ga_element(group, field, g), e, group, field) for g in range(N)], field)
        basis, mats, d = _find_irreducible(group, field, span, piv, rng)
        rep = GroupRep(group, field, mats, "rho", check=False)
        chi = rep.character()
        blocks.append((e, rep, chi, d, zdim))
    roots = [field.one, field(-1)]
    for big in (group.exponent, group.exponent * 2 // gcd(group.exponent, 2)):
        z = field.root_of_unity(big)
        if z is not None:
            roots = [z ** j for j in range(big)]
            break

    def key(b):
        e, rep, chi, d, zdim = b
        trivial = rep.dim == 1 and all(v == 1 for v in chi.values)
        return (not trivial, rep.dim, [_value_key(v, field, roots) for v in chi.values])

    blocks.sort(key=key)
    out = []
    for i, (e, rep, chi, d, zdim) in enumerate(blocks):
        label = _irr_label(i, rep, chi, group)
        rep.label = label
        idem = CentralIdempotent(tuple(e), label)
        out.append(IrreducibleBlock(i, label, rep, chi, idem, d, zdim))
    return tuple(out)


def _split_abelian_blocks(group, field):
    """Blocks of an abelian group whose exponent-th roots of unity lie in the
    field: all one-dimensional, enumerated as homomorphisms to mu_exp."""
    if not group.is_abelian():
        return []
    ex = group.exponent
    z = field.root_of_unity(ex)
    if z is None:
        return []
    gens = group.generators
    powers = [z ** j for j in range(ex)]
    choices = [[k for k in range(ex) if (k * group.element_order(g)) % ex == 0] for g in gens]
    seen, out = set(), []
    for ks in itertools.product(*choices):
        vals = {0: 0}
        frontier, ok = [0], True
        while frontier and ok:
            nxt = []
            for g in frontier:
                for s, k in zip(gens, ks):
                    h = group.mul[g][s]
                    v = (vals[g] + k) % ex
                    if h not in vals:
                        vals[h] = v
                        nxt.append(h)
                    elif vals[h] != v:
                        ok = False
                        break
            frontier = nxt
        if not ok:
            continue
        key = tuple(vals[g] for g in range(group.order))
        if key in seen:
            continue
        seen.add(key)
        rep = GroupRep(group, field, [[[powers[v]]] for v in key], "rho", check=False)
        chi = rep.character()
        e = list(formula_idempotent(chi, 1))
        out.append((e, rep, chi, 1, 1))
    return out if len(out) == group.order else []


def _irr_label(i, rep, chi, group):
    if i == 0:
        return "triv"
    kind = group.kind[0] if group.kind else None
    if kind in ("symmetric", "dihedral") and rep.dim == 1 and all(v == 1 or v == -1 for v in chi.values):
        if kind == "symmetric":
            return "sign"
    if kind == "symmetric" and group.kind[1] == 3 and rep.dim == 2:
        return "std"
    return f"rho{i}"


def central_idempotents(group, field):
    """Central primitive idempotents of k[N], one per k-irreducible block."""
    return [b.idempotent for b in irreducibles(group, field)]


def formula_idempotent(chi: Character, d: int):
    """(dim rho / (d |N|)) sum_n chi(n^{-1}) n."""
    G = chi.group
    c = chi.dim / (d * G.order)
    return tuple(c * chi.values[G.inv[g]] for g in range(G.order))


def hom_dim(V, W) -> int:
    """dim_k Hom_{k[N]}(V, W) = <chi_V, chi_W>."""
    return int(V.character().inner(W.character()).to_fraction())


def decompose_character(chi: Character):
    """Multiplicities of k-irreducibles: list of (IrreducibleBlock, m), m > 0."""
    blocks = irreducibles(chi.group, chi.field)
    out = []
    total = zero_character(chi.group, chi.field)
    for b in blocks:
        ip = chi.inner(b.character)
        if not ip.is_rational():
            raise NotACharacter(f"non-rational multiplicity {ip}")
        m = ip.to_fraction() / b.endo_dim
        if m.denominator != 1 or m < 0:
            raise NotACharacter(f"multiplicity {m} of {b.label}")
        if m:
            out.append((b, int(m)))
            total = total + b.character * int(m)
    if total != chi:
        raise NotACharacter("character is not a sum of irreducibles")
    return out


# -- finiteness witnesses ------------------------------------------------------------

@dataclass(frozen=True)
class WitnessPair:
    f: tuple
    g: tuple

    def to_json(self):
        return {"f": list(self.f), "g": list(self.g), "f_str": _ipoly_str(self.f), "g_str": _ipoly_str(self.g)}

    def __str__(self):
        return f"({_ipoly_str(self.f)}, {_ipoly_str(self.g)})"


def _ipoly_str(c):
    parts = []
    for i in range(len(c) - 1, -1, -1):
        a = c[i]
        if not a:
            continue
        mon = "1" if i == 0 else ("x" if i == 1 else f"x^{i}")
        parts.append(mon if a == 1 and i else f"{a}" if i == 0 else f"{a}{mon}")
    return "+".join(parts) or "0"


@dataclass
class FinitenessWitness:
    witness: WitnessPair
    classes: list          # labels of S_V, ordered like irreducibles()
    matrix: list           # m_V[t][s] = multiplicity of t in V (x) s
    charpoly: tuple

    def to_json(self):
        return {"witness": self.witness.to_json(), "S_V": self.classes, "m_V": self.matrix,
                "charpoly": list(self.charpoly)}


def finiteness_witness(V: GroupRep) -> FinitenessWitness:
    if V.dim == 0:
        raise ZeroRepresentation("the zero representation has no witness")
    chi = V.character()
    blocks = irreducibles(V.group, V.field)
    S = {blocks[0].label}
    frontier = [blocks[0]]
    products = {}
    while frontier:
        nxt = []
        for s in frontier:
            dec = decompose_character(chi * s.character)
            products[s.label] = {b.label: m for b, m in dec}
            for b, _ in dec:
                if b.label not in S:
                    S.add(b.label)
                    nxt.append(b)
        frontier = nxt
    order = [b.label for b in blocks if b.label in S]
    mat = [[products[s].get(t, 0) for s in order] for t in order]
    cp = charpoly(mat, rational_field())
    coeffs = tuple(int(c.to_fraction()) for c in cp.coeffs)
    f = tuple(max(c, 0) for c in coeffs)
    g = tuple(max(-c, 0) for c in coeffs)
    w = WitnessPair(_trim_int(f), _trim_int(g))
    return FinitenessWitness(w, order, mat, coeffs)


def _trim_int(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


def evaluate_on_character(poly, chi: Character) -> Character:
    """Character of f(V) = sum_n (V^{(x) n})^{(+) a_n}."""
    out = zero_character(chi.group, chi.field)
    power = Character(chi.group, chi.field, [1] * chi.group.order)
    for a in poly:
        if a:
            out = out + power * a
        power = power * chi
    return out


def verify_witness(V: GroupRep, w: WitnessPair) -> bool:
    if _trim_int(w.f) == _trim_int(w.g):
        return False
    if any(a < 0 for a in w.f + w.g):
        return False
    chi = V.character()
    return evaluate_on_character(w.f, chi) == evaluate_on_character(w.g, chi)


def parse_witness(data) -> WitnessPair:
    return WitnessPair(tuple(int(a) for a in data["f"]), tuple(int(a) for a in data["g"]))


def random_rep(group, field, rng: random.Random, max_dim=4):
    """A random direct sum of k-irreducibles of total dimension <= max_dim."""
    blocks = [b for b in irreducibles(group, field) if b.dim <= max_dim]
    chosen, dim = [], 0
    while True:
        fits = [b for b in blocks if dim + b.dim <= max_dim]
        if not fits or (chosen and rng.random() < 0.4):
            break
        b = rng.choice(fits)
        chosen.append(b.rep)
        dim += b.dim
    rep = direct_sum(*chosen) if len(chosen) > 1 else chosen[0]
    return rep


__all__ = [
    "FiniteGroup", "GroupRep", "Character", "CentralIdempotent", "IrreducibleBlock", "WitnessPair",
    "FinitenessWitness", "InvalidTable", "NotAHomomorphism", "NotACharacter", "ZeroRepresentation",
    "build_group", "cyclic_group", "dihedral_group", "symmetric_group", "quaternion_group",
    "direct_product", "units_group", "holomorph_cyclic", "trivial_group", "irreducibles",
    "central_idempotents", "decompose_character", "finiteness_witness", "verify_witness",
    "restrict_rep", "inflate_rep", "regular_rep", "trivial_rep", "sign_rep", "cyclic_character",
    "standard_rep_s3", "tensor_rep", "direct_sum", "dual_rep", "intertwiners", "hom_dim",
    "formula_idempotent", "random_rep", "base_change_rep", "one_dim_rep",
    "zero_rep", "evaluate_on_character", "parse_witness", "ga_mul",
]
