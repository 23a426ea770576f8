"""Exact linear algebra over k and over Frac(k[x^+-1]).

Over the Laurent ring everything goes through fraction-free (Bareiss)
Gauss-Jordan elimination, so intermediate entries stay Laurent polynomials
and every division is exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .laurent import LaurentPoly
from .numberfield import NumberField
from .upoly import UPoly, upoly_gcd


# ---------------------------------------------------------------------------
# dense linear algebra over the coefficient field

def field_rref(matrix, field: NumberField):
    """Reduced row echelon form over k. Returns (rows, pivot_columns)."""
    M = [[field(x) for x in row] for row in matrix]
    if not M:
        return [], []
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if not M[i][c].is_zero()), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = M[r][c].inverse()
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and not M[i][c].is_zero():
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def field_kernel(matrix, field: NumberField, ncols: int | None = None):
    """Basis of {v : M v = 0} over k."""
    if not matrix:
        n = ncols or 0
        return [[field.one if i == j else field.zero for i in range(n)] for j in range(n)]
    n = len(matrix[0])
    R, piv = field_rref(matrix, field)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [field.zero] * n
        v[f] = field.one
        for row, pc in zip(R, piv):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def field_rank(matrix, field: NumberField) -> int:
    return len(field_rref(matrix, field)[1]) if matrix else 0


def field_solve(matrix, rhs, field: NumberField):
    """One solution of M v = rhs over k, or None if inconsistent."""
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    n = len(matrix[0]) if matrix else 0
    R, piv = field_rref(aug, field)
    if n in piv:
        return None
    v = [field.zero] * n
    for row, pc in zip(R, piv):
        v[pc] = row[n]
    return v


def field_solve_combination(vectors, target, field):
    """Coefficients c with sum c_i vectors[i] = target, or None."""
    if not vectors:
        return [] if all(x.is_zero() for x in target) else None
    cols = [[vectors[j][i] for j in range(len(vectors))] for i in range(len(target))]
    return field_solve(cols, target, field)


def field_inverse(matrix, field):
    n = len(matrix)
    aug = [list(row) + [field.one if i == j else field.zero for j in range(n)] for i, row in enumerate(matrix)]
    R, piv = field_rref(aug, field)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R]


def field_matmul(A, B, field):
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    return [[sum((A[i][l] * B[l][j] for l in range(inner) if not A[i][l].is_zero()), field.zero)
             for j in range(cols)] for i in range(len(A))]


def sparse_kernel(rows, ncols, field):
    """Kernel of a sparse system; rows are dicts column -> FieldElem.

    Elimination is column-ordered, which keeps banded systems (recurrences
    in the exponent) sparse.
    """
    pivot_rows = {}
    for row in rows:
        r = {c: v for c, v in row.items() if not v.is_zero()}
        while r:
            c = min(r)
            if c in pivot_rows:
                prow = pivot_rows[c]
                f = r[c]
                for cc, vv in prow.items():
                    nv = r.get(cc, field.zero) - f * vv
                    if nv.is_zero():
                        r.pop(cc, None)
                    else:
                        r[cc] = nv
            else:
                inv = r[c].inverse()
                pivot_rows[c] = {cc: vv * inv for cc, vv in r.items()}
                break
    # back substitution to reduced form
    for c in sorted(pivot_rows, reverse=True):
        prow = pivot_rows[c]
        for c2 in sorted(pivot_rows):
            if c2 >= c:
                break
            other = pivot_rows[c2]
            if c in other:
                f = other[c]
                for cc, vv in prow.items():
                    nv = other.get(cc, field.zero) - f * vv
                    if nv.is_zero():
                        other.pop(cc, None)
                    else:
                        other[cc] = nv
    free = [c for c in range(ncols) if c not in pivot_rows]
    basis = []
    for f in free:
        v = {f: field.one}
        for pc, prow in pivot_rows.items():
            if f in prow:
                v[pc] = -prow[f]
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# Laurent matrices

def lzero(field, nvars):
    return LaurentPoly.zero(field, nvars)


def lconst(field, nvars, c):
    return LaurentPoly.constant(field, nvars, c)


def zeros(rows, cols, field, nvars):
    z = lzero(field, nvars)
    return [[z] * cols for _ in range(rows)]


def identity(n, field, nvars):
    one, z = lconst(field, nvars, 1), lzero(field, nvars)
    return [[one if i == j else z for j in range(n)] for i in range(n)]


def matmul(A, B):
    if not A or not B:
        return [[] for _ in A]
    n, inner, m = len(A), len(B), len(B[0])
    f, nv = B[0][0].field, B[0][0].nvars
    out = []
    for i in range(n):
        row = []
        Ai = A[i]
        for j in range(m):
            acc = lzero(f, nv)
            for l in range(inner):
                a = Ai[l]
                if a.terms:
                    b = B[l][j]
                    if b.terms:
                        acc = acc + a * b
            row.append(acc)
        out.append(row)
    return out


def matvec(A, v):
    return [row[0] for row in matmul(A, [[x] for x in v])] if A else []


def matadd(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def matsub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def matscale(A, c):
    return [[a * c for a in row] for row in A]


def transpose(A):
    return [list(col) for col in zip(*A)] if A else []


def kron(A, B):
    return [[a * b for a in ra for b in rb] for ra in A for rb in B]


def mat_is_zero(A):
    return all(x.is_zero() for row in A for x in row)


def mat_diff(A, values):
    """Entrywise application of the derivation with D(x_i) = values[i]."""
    return [[x.apply_derivation(values) for x in row] for row in A]


def mat_map(A, fn):
    return [[fn(x) for x in row] for row in A]


def as_laurent_matrix(M, field, nvars):
    return [[x if isinstance(x, LaurentPoly) else lconst(field, nvars, x) for x in row] for row in M]


def is_constant_matrix(M):
    return all(x.is_constant() for row in M for x in row)


def constant_part(M, field):
    return [[x.constant_term() for x in row] for row in M]


def from_field_matrix(M, field, nvars):
    return [[lconst(field, nvars, x) for x in row] for row in M]


# -- Bareiss ------------------------------------------------------------------

def bareiss_rref(matrix):
    """Fraction-free Gauss-Jordan. Returns (R, pivots, d) where every pivot
    entry of R equals d and R is row equivalent to the input over Frac(A)."""
    M = [list(row) for row in matrix]
    if not M or not M[0]:
        return M, [], None
    f, nv = M[0][0].field, M[0][0].nvars
    d = lconst(f, nv, 1)
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        cands = [i for i in range(r, len(M)) if M[i][c].terms]
        if not cands:
            continue
        # prefer the sparsest pivot
        p = min(cands, key=lambda i: (len(M[i][c].terms), i))
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        prow = M[r]
        for i in range(len(M)):
            if i == r:
                continue
            row = M[i]
            a = row[c]
            if not a.terms:
                if piv == d:
                    continue
                M[i] = [(piv * x).divexact(d) if x.terms else x for x in row]
                continue
            M[i] = [((piv * x - a * y).divexact(d)) if (x.terms or y.terms) else x
                    for x, y in zip(row, prow)]
        d = piv
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r] + M[r:], pivots, d


def det(matrix) -> LaurentPoly:
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    if any(len(row) != n for row in matrix):
        raise ValueError("det of a non-square matrix")
    M = [list(row) for row in matrix]
    f, nv = M[0][0].field, M[0][0].nvars
    sign = 1
    prev = lconst(f, nv, 1)
    for k in range(n):
        p = next((i for i in range(k, n) if M[i][k].terms), None)
        if p is None:
            return lzero(f, nv)
        if p != k:
            M[k], M[p] = M[p], M[k]
            sign = -sign
        piv = M[k][k]
        for i in range(k + 1, n):
            a = M[i][k]
            row = M[i]
            M[i] = [lzero(f, nv) if j <= k else (piv * row[j] - a * M[k][j]).divexact(prev)
                    for j in range(n)]
        prev = piv
    return M[n - 1][n - 1] if sign == 1 else -M[n - 1][n - 1]


def rank(matrix) -> int:
    if not matrix or not matrix[0]:
        return 0
    return len(bareiss_rref(matrix)[1])


# -- fractions ------------------------------------------------------------------

class Frac:
    """Element num/den of Frac(A). Kept in lowest terms only for one variable."""

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly | None = None):
        if den is None:
            den = LaurentPoly.constant(num.field, num.nvars, 1)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num, self.den = _normalize(num, den)

    def is_zero(self):
        return self.num.is_zero()

    def __add__(self, o):
        o = _as_frac(o, self)
        if self.den == o.den:
            return Frac(self.num + o.num, self.den)
        return Frac(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return Frac(-self.num, self.den)

    def __sub__(self, o):
        return self + (-_as_frac(o, self))

    def __mul__(self, o):
        o = _as_frac(o, self)
        return Frac(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _as_frac(o, self)
        return Frac(self.num * o.den, self.den * o.num)

    def __eq__(self, o):
        o = _as_frac(o, self)
        return (self.num * o.den - o.num * self.den).is_zero()

    def __hash__(self):
        return hash(self.to_laurent()) if self.is_laurent() else hash((self.num, self.den))

    def is_laurent(self) -> bool:
        return self.den.is_monomial() or self.den.divides(self.num)

    def to_laurent(self) -> LaurentPoly:
        return self.num.divexact(self.den)

    def __repr__(self):
        if self.den == 1:
            return f"Frac({self.num})"
        return f"Frac(({self.num})/({self.den}))"

    def to_json(self):
        if self.is_laurent():
            return self.to_laurent().to_json()
        return {"num": self.num.to_json(), "den": self.den.to_json()}


def _as_frac(o, like):
    if isinstance(o, Frac):
        return o
    if isinstance(o, LaurentPoly):
        return Frac(o)
    return Frac(LaurentPoly.constant(like.num.field, like.num.nvars, o))


def _normalize(num, den):
    f, nv = num.field, num.nvars
    if num.is_zero():
        return num, LaurentPoly.constant(f, nv, 1)
    if den.is_monomial():
        return num.divexact(den), LaurentPoly.constant(f, nv, 1)
    if nv == 1:
        g = laurent_gcd_1var(num, den)
        if not g.is_monomial():
            num, den = num.divexact(g), den.divexact(g)
    else:
        try:
            return num.divexact(den), LaurentPoly.constant(f, nv, 1)
        except ArithmeticError:
            pass
    # make the denominator's lowest term a monic constant
    e0 = min(den.terms)
    c0 = den.terms[e0]
    shift = tuple(-a for a in e0)
    inv = c0.inverse()
    return num.shift(shift) * inv, den.shift(shift) * inv


def _to_upoly(p: LaurentPoly):
    lo = min(e[0] for e in p.terms)
    hi = max(e[0] for e in p.terms)
    cs = [p.field.zero] * (hi - lo + 1)
    for e, c in p.terms.items():
        cs[e[0] - lo] = c
    return UPoly(p.field, cs)


def laurent_gcd_1var(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """gcd in k[x^+-1] (defined up to units)."""
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    g = upoly_gcd(_to_upoly(a), _to_upoly(b))
    return LaurentPoly(a.field, 1, {(i,): c for i, c in enumerate(g.coeffs)})


def primitive_vector(v):
    """Divide a Laurent vector by its content (monomials, scalars and, for one
    variable, the polynomial gcd) and normalise the first nonzero entry."""
    nz = [x for x in v if x.terms]
    if not nz:
        return list(v)
    nv = nz[0].nvars
    if nv == 1:
        g = nz[0]
        for x in nz[1:]:
            g = laurent_gcd_1var(g, x)
            if g.is_monomial():
                break
        if not g.is_monomial():
            v = [x.divexact(g) for x in v]
    nz = [x for x in v if x.terms]
    # monomial content
    lo = [min(e[i] for x in nz for e in x.terms) for i in range(nv)]
    shift = tuple(-a for a in lo)
    first = nz[0]
    lead = first.terms[max(first.terms)]
    inv = lead.inverse()
    return [x.shift(shift) * inv if x.terms else x for x in v]


@dataclass
class LinearSolution:
    """Result of solve_linear: status is "consistent" or "inconsistent"."""

    status: str
    particular: list | None
    kernel: list = dc_field(default_factory=list)
    rank: int = 0

    @property
    def consistent(self) -> bool:
        return self.status == "consistent"


class FractionMatrix:
    """Matrix with entries in Frac(A)."""

    def __init__(self, rows):
        self.rows = [[x if isinstance(x, Frac) else Frac(x) for x in row] for row in rows]

    @property
    def shape(self):
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    def cleared(self, rhs=None):
        """Row-wise clear denominators; returns Laurent rows (and rhs)."""
        out, out_rhs = [], []
        for i, row in enumerate(self.rows):
            entries = list(row) + ([_as_frac(rhs[i], row[0])] if rhs is not None else [])
            den = None
            for x in entries:
                if x.den != 1:
                    den = x.den if den is None else _lcm_laurent(den, x.den)
            if den is None:
                cleared = [x.num for x in entries]
            else:
                cleared = [(x.num * den).divexact(x.den) for x in entries]
            if rhs is not None:
                out.append(cleared[:-1])
                out_rhs.append(cleared[-1])
            else:
                out.append(cleared)
        return (out, out_rhs) if rhs is not None else out


def _lcm_laurent(a, b):
    if a.nvars == 1:
        g = laurent_gcd_1var(a, b)
        return (a * b).divexact(g)
    if a.divides(b):
        return b
    if b.divides(a):
        return a
    return a * b


def solve_linear(M, rhs=None) -> LinearSolution:
    """Solve M v = rhs over Frac(A).

    M: Laurent matrix, list of Frac rows, or FractionMatrix. rhs defaults to 0.
    The particular solution is a list of Frac; kernel vectors are
    denominator-cleared Laurent vectors.
    """
    if not isinstance(M, FractionMatrix):
        M = FractionMatrix(M)
    nrows, ncols = M.shape
    if nrows == 0:
        raise ValueError("solve_linear needs at least one row")
    ref = M.rows[0][0].num
    f, nv = ref.field, ref.nvars
    if rhs is None:
        rhs = [LaurentPoly.zero(f, nv)] * nrows
    A, b = M.cleared(rhs)
    aug = [row + [bi] for row, bi in zip(A, b)]
    R, piv, d = bareiss_rref(aug)
    rk = len([p for p in piv if p < ncols])
    kernel = []
    free = [c for c in range(ncols) if c not in piv]
    for fc in free:
        v = [LaurentPoly.zero(f, nv)] * ncols
        v[fc] = d if d is not None else LaurentPoly.constant(f, nv, 1)
        for row, pc in zip(R, piv):
            if pc < ncols:
                v[pc] = -row[fc]
        kernel.append(primitive_vector(v))
    if ncols in piv:
        return LinearSolution("inconsistent", None, kernel, rk)
    part = [Frac(LaurentPoly.zero(f, nv))] * ncols
    for row, pc in zip(R, piv):
        part[pc] = Frac(row[ncols], d)
    return LinearSolution("consistent", part, kernel, rk)


def solve_laurent(M, rhs):
    """Solve M v = rhs and insist that a Laurent solution exists and is unique."""
    sol = solve_linear(M, rhs)
    if not sol.consistent:
        raise ArithmeticError("inconsistent system")
    if sol.kernel:
        raise ArithmeticError("solution is not unique")
    return [x.to_laurent() for x in sol.particular]


def inverse_laurent(M):
    """Inverse of a square Laurent matrix whose determinant is a unit."""
    n = len(M)
    D = det(M)
    ok, _ = D.is_unit()
    if not ok:
        raise ArithmeticError(f"determinant {D} is not a unit")
    f, nv = M[0][0].field, M[0][0].nvars
    cols = []
    for j in range(n):
        e = [LaurentPoly.constant(f, nv, 1 if i == j else 0) for i in range(n)]
        cols.append(solve_laurent(M, e))
    return transpose(cols)


def vector_to_field(v):
    return [x.constant_term() for x in v]


def flatten_coefficients(entries):
    """Map each Laurent entry to its coefficient dict; used to turn A-linear
    identities with k-unknowns into k-linear systems."""
    return [x.terms for x in entries]


__all__ = [
    "Frac", "FractionMatrix", "LinearSolution", "solve_linear", "solve_laurent", "det", "rank",
    "bareiss_rref", "field_kernel", "field_rref", "field_rank", "field_solve", "field_inverse",
    "sparse_kernel", "matmul", "matvec", "identity", "zeros", "kron", "transpose", "inverse_laurent",
    "BasisExtractionFailed", "free_basis", "constant_free_basis", "laurent_coordinates",
]


# -- free bases of submodules ---------------------------------------------------

class BasisExtractionFailed(ArithmeticError):
    """Raised when a spanning set does not visibly contain a free A-basis."""

    def __init__(self, msg, matrix=None):
        super().__init__(msg)
        self.matrix = matrix


def laurent_coordinates(basis, v):
    """Coordinates of v in the Frac-independent columns `basis`, or None if
    v is not an A-linear combination of them."""
    if not basis:
        return [] if all(x.is_zero() for x in v) else None
    M = transpose(basis)
    sol = solve_linear(M, v)
    if not sol.consistent:
        return None
    try:
        return [x.to_laurent() for x in sol.particular]
    except ArithmeticError:
        return None


def free_basis(vectors, first=None):
    """An A-basis of the A-span of `vectors`, taken from (primitive versions
    of) the vectors themselves. `first`, if given, is forced into the basis.

    The result is certified: every input vector has Laurent coordinates.
    Raises BasisExtractionFailed otherwise.
    """
    vectors = [list(v) for v in vectors if any(x.terms for x in v)]
    cands = ([list(first)] if first is not None else [])
    cands += [primitive_vector(v) for v in vectors] + vectors
    if not cands:
        return []
    target = rank(transpose(vectors)) if vectors else 0
    chosen = []
    for v in cands:
        if len(chosen) == target:
            break
        if rank(transpose(chosen + [v])) > len(chosen):
            chosen.append(v)
    for v in vectors:
        if laurent_coordinates(chosen, v) is None:
            raise BasisExtractionFailed("span is not visibly free on the chosen columns", vectors)
    return chosen


def constant_free_basis(vectors, field, nvars, first=None):
    """Fast path for spans of constant vectors: a k-basis, as Laurent vectors."""
    rows = ([vector_to_field(first)] if first is not None else []) + [vector_to_field(v) for v in vectors]
    n = len(rows[0]) if rows else 0
    chosen, cur = [], 0
    for r in rows:
        if any(not x.is_zero() for x in r) and field_rank(chosen + [r], field) > cur:
            chosen.append(r)
            cur += 1
    return [[lconst(field, nvars, x) for x in r] for r in chosen][: n]
