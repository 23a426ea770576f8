"""Free modules with integrable connection over a Laurent ring, with finite
group actions: pushforwards of covers, the functor V -> Hom_{k[N]}(V, B),
isotypic decomposition, flat sections and morphism spaces."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .algebra.laurent import LaurentPoly
from .algebra.linalg import (BasisExtractionFailed, constant_free_basis, det, free_basis, identity,
                             is_constant_matrix, kron, laurent_coordinates, mat_diff, matmul,
                             sparse_kernel, transpose)
from .algebra.numberfield import NumberField
from .algebra.upoly import charpoly, roots_in_field
from .covers import (CoverAlgebra, ExtraSymmetry, GaloisAction, LaurentAlgebra, MonomialSubstitution,
                     beta_matrix, components, constants)
from .groups import (FiniteGroup, GroupRep, WitnessPair, finiteness_witness, hom_dim, regular_rep,
                     restrict_rep, inflate_rep)


class TowerMismatch(ValueError):
    pass


class ConstantsObstruction(RuntimeError):
    """c(B)^G != k; carries the representation-side witness."""

    def __init__(self, msg, witness=None, constants_dim=None):
        super().__init__(msg)
        self.witness = witness
        self.constants_dim = constants_dim


class NotIntegrable(ValueError):
    pass


def _zero_mat(r, c, base):
    return [[base.zero] * c for _ in range(r)]


def _madd(*Ms):
    out = [list(r) for r in Ms[0]]
    for M in Ms[1:]:
        out = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(out, M)]
    return out


def _mneg(M):
    return [[-a for a in r] for r in M]


def _mscale(M, c):
    return [[a * c for a in r] for r in M]


def _vec(F):
    return [x for row in F for x in row]


def _unvec(v, r, c):
    return [list(v[i * c:(i + 1) * c]) for i in range(r)]


# -- the module type ----------------------------------------------------------------

@dataclass
class ConnectionModule:
    """A^r with nabla_i = d/dx_i + gamma[i], optional A-linear N-action
    (n_action[g]) and semilinear extra symmetries g_action = [(sigma, S)]."""

    base: LaurentAlgebra
    rank: int
    gamma: list
    n_group: FiniteGroup | None = None
    n_action: list | None = None
    g_action: list | None = None
    label: str = "M"
    basis: list | None = None       # optional: embedding into an ambient module
    meta: dict = dc_field(default_factory=dict)

    @property
    def field(self):
        return self.base.field

    def nabla(self, i, v):
        g = self.gamma[i]
        return [v[a].diff(i) + sum((g[a][b] * v[b] for b in range(self.rank) if v[b].terms), self.base.zero)
                for a in range(self.rank)]

    def is_flat_vector(self, v):
        return all(all(x.is_zero() for x in self.nabla(i, v)) for i in range(self.base.nvars))

    def check_integrable(self):
        m = self.base.nvars
        for i in range(m):
            for j in range(i + 1, m):
                Gi, Gj = self.gamma[i], self.gamma[j]
                c = _madd(mat_diff(Gj, self.base.coordinate_derivation(i)),
                          _mneg(mat_diff(Gi, self.base.coordinate_derivation(j))),
                          matmul(Gi, Gj), _mneg(matmul(Gj, Gi)))
                if any(x.terms for r in c for x in r):
                    return False
        return True

    def check_n_action(self):
        """M_n gamma_i = d_i(M_n) + gamma_i M_n for all n, i, and the group law."""
        if self.n_action is None:
            return True
        G = self.n_group
        for g in range(G.order):
            for h in G.generators:
                if matmul(self.n_action[g], self.n_action[h]) != self.n_action[G.mul[g][h]]:
                    return False
        for M in self.n_action:
            for i in range(self.base.nvars):
                lhs = matmul(M, self.gamma[i])
                rhs = _madd(mat_diff(M, self.base.coordinate_derivation(i)), matmul(self.gamma[i], M))
                if lhs != rhs:
                    return False
        return True

    def check_g_action(self):
        """Each s = (sigma, S) intertwines nabla_d with nabla_{sigma d sigma^-1},
        and commutes with the N-action."""
        if not self.g_action:
            return True
        for sig, S in self.g_action:
            thetas = transported_derivations(sig, self.base)
            sg = [sig.apply_matrix(G, self.base) for G in self.gamma]
            for i, th in enumerate(thetas):
                lhs = matmul(S, sg[i])
                G_th = _gamma_along(self, th)
                rhs = _madd(mat_diff(S, th), matmul(G_th, S))
                if lhs != rhs:
                    return False
            if self.n_action is not None:
                for M in self.n_action:
                    if matmul(M, S) != matmul(S, sig.apply_matrix(M, self.base)):
                        return False
        return True

    def validate(self):
        if not self.check_integrable():
            raise NotIntegrable(f"{self.label}: connection is not integrable")
        if not self.check_n_action():
            raise ValueError(f"{self.label}: N-action does not commute with the connection")
        if not self.check_g_action():
            raise ValueError(f"{self.label}: extra symmetry is not compatible")
        return True

    def to_json(self):
        out = {"label": self.label, "rank": self.rank,
               "gamma": [[[str(x) for x in r] for r in G] for G in self.gamma]}
        if self.n_action is not None:
            out["n_group"] = self.n_group.label
            out["n_action"] = {str(g): [[str(x) for x in r] for r in self.n_action[g]]
                               for g in self.n_group.generators}
        if self.basis is not None:
            out["basis"] = [[str(x) for x in v] for v in self.basis]
        return out


def _gamma_along(M: ConnectionModule, values):
    """Connection matrix of nabla_theta for theta = sum values[i] d/dx_i."""
    out = _zero_mat(M.rank, M.rank, M.base)
    for i, v in enumerate(values):
        if v.terms:
            out = _madd(out, _mscale(M.gamma[i], v))
    return out


def _inverse_substitution(sig: MonomialSubstitution, base: LaurentAlgebra):
    """Images tau(x_j) with sigma(tau(x_j)) = x_j."""
    m = base.nvars
    E = [[Fraction(sig.exponents[i][j]) for j in range(m)] for i in range(m)]
    # gamma_j solves E^T gamma_j = e_j
    ET = [[E[j][i] for j in range(m)] for i in range(m)]
    inv = _frac_inverse(ET)
    out = []
    for j in range(m):
        g = [int(inv[i][j]) for i in range(m)]
        c = base.field.one
        for i in range(m):
            c = c * base.field(sig.scalars[i]) ** (-g[i])
        out.append(LaurentPoly.monomial(base.field, m, g, c))
    return out


def _frac_inverse(M):
    n = len(M)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        p = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [r[n:] for r in aug]


def transported_derivations(sig: MonomialSubstitution, base: LaurentAlgebra):
    """Values of sigma o d/dx_i o sigma^{-1} on the variables, for each i."""
    tau = _inverse_substitution(sig, base)
    imgs = sig.images(base)
    out = []
    for i in range(base.nvars):
        out.append([t.diff(i).substitute(imgs) for t in tau])
    return out


# -- constructors --------------------------------------------------------------------

def trivial_with_rep(V: GroupRep, base: LaurentAlgebra, label=None) -> ConnectionModule:
    """O (x)_k V: zero connection, constant action matrices."""
    r = V.dim
    mats = [[[base.const(x) for x in row] for row in V.matrix(g)] for g in range(V.group.order)]
    return ConnectionModule(base, r, [_zero_mat(r, r, base) for _ in range(base.nvars)],
                            V.group, mats, None, label or f"O(x){V.label}")


def pushforward(B: CoverAlgebra, act: GaloisAction | None, sym: ExtraSymmetry | None = None,
                label="f_*O") -> ConnectionModule:
    gamma = [B.lift(B.base.coordinate_derivation(i)) for i in range(B.base.nvars)]
    M = ConnectionModule(B.base, B.rank, gamma,
                         act.group if act else None, act.matrices if act else None,
                         list(sym.generators) if sym else None, label)
    M.meta["cover"] = B
    M.meta["action"] = act
    return M


def direct_sum(*mods) -> ConnectionModule:
    base = mods[0].base
    r = sum(m.rank for m in mods)

    def block(mats):
        out = _zero_mat(r, r, base)
        off = 0
        for m, X in zip(mods, mats):
            for a in range(m.rank):
                for b in range(m.rank):
                    out[off + a][off + b] = X[a][b]
            off += m.rank
        return out
    gamma = [block([m.gamma[i] for m in mods]) for i in range(base.nvars)]
    nact = None
    if all(m.n_action is not None for m in mods) and len({m.n_group for m in mods}) == 1:
        nact = [block([m.n_action[g] for m in mods]) for g in range(mods[0].n_group.order)]
    return ConnectionModule(base, r, gamma, mods[0].n_group if nact else None, nact, None,
                            "+".join(m.label for m in mods))


def tensor(M: ConnectionModule, N: ConnectionModule) -> ConnectionModule:
    base = M.base
    IM, IN = identity(M.rank, base.field, base.nvars), identity(N.rank, base.field, base.nvars)
    gamma = [_madd(kron(M.gamma[i], IN), kron(IM, N.gamma[i])) for i in range(base.nvars)]
    nact, grp = None, None
    if M.n_action is not None and N.n_action is not None and M.n_group == N.n_group:
        grp = M.n_group
        nact = [kron(M.n_action[g], N.n_action[g]) for g in range(grp.order)]
    gact = None
    if M.g_action and N.g_action and len(M.g_action) == len(N.g_action):
        gact = [(s1, kron(S1, S2)) for (s1, S1), (s2, S2) in zip(M.g_action, N.g_action)]
    return ConnectionModule(base, M.rank * N.rank, gamma, grp, nact, gact, f"{M.label}(x){N.label}")


def internal_hom_gamma(M: ConnectionModule, N: ConnectionModule):
    """Connection on Hom(M, N) in row-major vec(F): dF + gamma^N F - F gamma^M."""
    base = M.base
    IM, IN = identity(M.rank, base.field, base.nvars), identity(N.rank, base.field, base.nvars)
    return [_madd(kron(N.gamma[i], IM), _mneg(kron(IN, transpose(M.gamma[i])))) for i in range(base.nvars)]


# -- flat sections -----------------------------------------------------------------

@dataclass
class FlatSectionSpace:
    basis: list
    dim: int
    status: str
    method: str

    def to_json(self):
        return {"dim": self.dim, "status": self.status, "method": self.method,
                "basis": [[str(x) for x in v] for v in self.basis]}


def _euler_residues(M: ConnectionModule):
    """R_i with gamma_i = R_i / x_i and R_i constant, or None."""
    out = []
    for i in range(M.base.nvars):
        xi = M.base.var(i)
        R = [[(g * xi) for g in row] for row in M.gamma[i]]
        if not is_constant_matrix(R):
            return None
        out.append([[g.constant_term() for g in row] for row in R])
    return out


def _integer_roots(R, f):
    """Integers e with det(e I + R) = 0."""
    cp = charpoly([[-x for x in row] for row in R], f)
    out = []
    for r in roots_in_field(cp):
        if r.is_rational() and r.to_fraction().denominator == 1:
            out.append(int(r.to_fraction()))
    return sorted(set(out))


def _verify(M, vecs):
    for v in vecs:
        if not M.is_flat_vector(v):
            raise AssertionError("flat-section solver produced a non-flat vector")
    return vecs


def _kernel_of_stack(mats, f, n):
    rows = [r for X in mats for r in X]
    from .algebra.linalg import field_kernel
    return field_kernel(rows, f, ncols=n) if rows else [[f.one if i == j else f.zero for j in range(n)]
                                                       for i in range(n)]


def _euler_solutions(M, Rs):
    f, base, r = M.field, M.base, M.rank
    cands = [_integer_roots(R, f) for R in Rs]
    out = []
    for e in itertools.product(*cands):
        mats = [[[R[a][b] + (e[i] if a == b else 0) for b in range(r)] for a in range(r)]
                for i, R in enumerate(Rs)]
        for v in _kernel_of_stack(mats, f, r):
            out.append([LaurentPoly.monomial(f, base.nvars, e, c) if not c.is_zero() else base.zero for c in v])
    return out


def _pole_split_1var(M):
    """For m = 1: (R_{-1}, [P_0, P_1, ...]) if gamma = R_{-1}/x + polynomial, else None."""
    G = M.gamma[0]
    r = M.rank
    f = M.field
    lo = 0
    top = -1
    for row in G:
        for g in row:
            if g.terms:
                lo = min(lo, min(e[0] for e in g.terms))
                top = max(top, max(e[0] for e in g.terms))
    if lo < -1:
        return None
    Rm1 = [[g.terms.get((-1,), f.zero) for g in row] for row in G]
    polys = [[[g.terms.get((k,), f.zero) for g in row] for row in G] for k in range(0, top + 1)]
    del r
    return Rm1, polys


def _bounded_solutions(M, lo, hi):
    """Sparse k-linear search over exponents in the box [lo_i, hi_i]."""
    f, base, r, m = M.field, M.base, M.rank, M.base.nvars
    ranges = [range(lo[i], hi[i] + 1) for i in range(m)]
    exps = list(itertools.product(*ranges))
    index = {e: k for k, e in enumerate(exps)}
    rows = {}
    for i in range(m):
        G = M.gamma[i]
        for e in exps:
            k = index[e]
            # d_i(x^e c) = e_i x^{e - 1_i} c
            if e[i]:
                te = tuple(a - (1 if j == i else 0) for j, a in enumerate(e))
                for a in range(r):
                    row = rows.setdefault((i, te, a), {})
                    row[k * r + a] = row.get(k * r + a, f.zero) + e[i]
            for a in range(r):
                for b in range(r):
                    for ge, gc in G[a][b].terms.items():
                        te = tuple(x + y for x, y in zip(e, ge))
                        row = rows.setdefault((i, te, a), {})
                        row[k * r + b] = row.get(k * r + b, f.zero) + gc
    ker = sparse_kernel(list(rows.values()), len(exps) * r, f)
    out = []
    for v in ker:
        vec = [base.zero] * r
        for col, c in v.items():
            k, b = divmod(col, r)
            vec[b] = vec[b] + LaurentPoly.monomial(f, m, exps[k], c)
        out.append(vec)
    return _canonical_flat_basis(out, f)


def _canonical_flat_basis(vecs, f):
    """Reduced echelon form of a k-basis of flat sections, for determinism."""
    if not vecs:
        return []
    keys = sorted({(a, e) for v in vecs for a, x in enumerate(v) for e in x.terms})
    pos = {k: i for i, k in enumerate(keys)}
    rows = []
    for v in vecs:
        row = [f.zero] * len(keys)
        for a, x in enumerate(v):
            for e, c in x.terms.items():
                row[pos[(a, e)]] = c
        rows.append(row)
    from .algebra.linalg import field_rref
    R, _ = field_rref(rows, f)
    nv = vecs[0][0].nvars
    out = []
    for row in R:
        vec = [LaurentPoly.zero(f, nv) for _ in vecs[0]]
        for (a, e), c in zip(keys, row):
            if not c.is_zero():
                vec[a] = vec[a] + LaurentPoly.monomial(f, nv, e, c)
        out.append(vec)
    return out


def flat_sections(M: ConnectionModule, bound=None, method="auto") -> FlatSectionSpace:
    """k-basis of {v in A^r : nabla_i v = 0 for all i}.

    method "auto" uses the complete solvers when they apply (residue form
    gamma_i = R_i/x_i in any number of variables; one variable with a simple
    pole plus polynomial part) and otherwise a bounded box search.
    """
    f, r, m = M.field, M.rank, M.base.nvars
    if r == 0:
        return FlatSectionSpace([], 0, "complete", "trivial")
    B = 32 if bound is None else int(bound)
    if method == "auto":
        Rs = _euler_residues(M)
        if Rs is not None:
            sols = _canonical_flat_basis(_euler_solutions(M, Rs), f)
            return FlatSectionSpace(_verify(M, sols), len(sols), "complete", "residue")
        if m == 1:
            split = _pole_split_1var(M)
            if split is not None:
                Rm1, polys = split
                lows = _integer_roots(Rm1, f)
                nonzero = [P for P in polys if any(not x.is_zero() for row in P for x in row)]
                if not lows:
                    return FlatSectionSpace([], 0, "complete", "indicial")
                top = polys[len(polys) - 1] if polys else None
                if top is not None and nonzero and _field_det(top, f) != 0:
                    return FlatSectionSpace([], 0, "complete", "indicial")
                lo = min(lows)
                sols = _bounded_solutions(M, [lo], [max(lo, B)])
                return FlatSectionSpace(_verify(M, sols), len(sols), f"bounded({B})", "indicial+box")
    sols = _bounded_solutions(M, [-B] * m, [B] * m)
    return FlatSectionSpace(_verify(M, sols), len(sols), f"bounded({B})", "box")


def _field_det(P, f):
    cp = charpoly(P, f)
    c0 = cp.coeffs[0] if cp.coeffs else f.zero
    return c0 if len(P) % 2 == 0 else -c0


def is_trivializable(M: ConnectionModule, sols: FlatSectionSpace | None = None) -> bool:
    """Flat sections form an A-basis (so M = O (x) solutions)."""
    sols = sols or flat_sections(M)
    if sols.dim != M.rank:
        return False
    if M.rank == 0:
        return True
    return det(transpose(sols.basis)).is_unit()[0]


# -- Reynolds images and the functor Hom_{k[N]}(V, -) ----------------------------------

def _image_basis(P, base, label):
    cols = transpose(P)
    if is_constant_matrix(P):
        return constant_free_basis(cols, base.field, base.nvars)
    try:
        return free_basis(cols)
    except BasisExtractionFailed as exc:
        raise BasisExtractionFailed(f"{label}: projector image resists the free-basis search", P) from exc


def _induced(ambient_gamma, W, base):
    """gamma' with d(W) + gamma W = W gamma'."""
    out = []
    for i, G in enumerate(ambient_gamma):
        DW = _madd(mat_diff(transpose(W), base.coordinate_derivation(i)), matmul(G, transpose(W)))
        cols = [laurent_coordinates(W, c) for c in transpose(DW)]
        if any(c is None for c in cols):
            raise BasisExtractionFailed("submodule is not stable under the connection")
        out.append(transpose(cols) if cols else [])
    return out


def _coords_matrix(W, vectors):
    cols = [laurent_coordinates(W, v) for v in vectors]
    if any(c is None for c in cols):
        raise BasisExtractionFailed("vector outside the extracted span")
    return transpose(cols)


def hom_functor(V: GroupRep, push: ConnectionModule, label=None) -> ConnectionModule:
    """Hom_{k[N]}(V, push) as the Reynolds image in push (x)_k V^*."""
    base = push.base
    d, n = V.dim, push.rank
    if d == 0:
        return ConnectionModule(base, 0, [[] for _ in range(base.nvars)], None, None, None,
                                label or f"H({V.label})")
    G = push.n_group
    if G is None or G != V.group:
        raise ValueError("representation and module must carry the same group")
    c = Fraction(1, G.order)
    P = _zero_mat(n * d, n * d, base)
    for g in range(G.order):
        Rinv_T = [[base.const(x) for x in row] for row in transpose(V.matrix(G.inv[g]))]
        P = _madd(P, kron(push.n_action[g], Rinv_T))
    P = _mscale(P, c)
    W = _image_basis(P, base, "hom_functor")
    gamma_amb = [kron(Gm, identity(d, base.field, base.nvars)) for Gm in push.gamma]
    gamma = _induced(gamma_amb, W, base)
    gact = None
    if push.g_action:
        gact = []
        for sig, S in push.g_action:
            Samb = kron(S, identity(d, base.field, base.nvars))
            imgs = [[sig.apply(x, base) for x in w] for w in W]
            Sp = _coords_matrix(W, [matvec(Samb, w) for w in imgs])
            gact.append((sig, Sp))
    out = ConnectionModule(base, len(W), gamma, None, None, gact, label or f"H({V.label})", W)
    out.meta["projector"] = P
    out.meta["rep"] = V
    return out


def matvec(M, v):
    z = v[0] * 0 if v else None
    return [sum((M[i][j] * v[j] for j in range(len(v)) if v[j].terms), z) for i in range(len(M))]


@dataclass
class Decomposition:
    summands: list
    labels: list
    certificate: LaurentPoly
    invertible: bool
    notes: list

    def to_json(self):
        return {"count": len(self.summands), "labels": self.labels, "certificate_det": str(self.certificate),
                "invertible": self.invertible, "ranks": [s.rank for s in self.summands],
                "gammas": [[[[str(x) for x in r] for r in G] for G in s.gamma] for s in self.summands],
                "notes": self.notes}


def idempotent_operator(push: ConnectionModule, coeffs):
    base = push.base
    P = _zero_mat(push.rank, push.rank, base)
    for g, c in enumerate(coeffs):
        if not c.is_zero():
            P = _madd(P, _mscale(push.n_action[g], c))
    return P


def decompose_pushforward(push: ConnectionModule, idems) -> Decomposition:
    """Images e * push for central idempotents e, with the direct-sum certificate."""
    base = push.base
    summands, labels, allW = [], [], []
    for e in idems:
        P = idempotent_operator(push, e.coeffs)
        W = _image_basis(P, base, "decompose")
        if not W:
            continue
        gamma = _induced(push.gamma, W, base)
        nact = [_coords_matrix(W, [matvec(push.n_action[g], w) for w in W]) for g in range(push.n_group.order)]
        S = ConnectionModule(base, len(W), gamma, push.n_group, nact, None, f"e[{e.rep_label}]", W)
        summands.append(S)
        labels.append(e.rep_label)
        allW += W
    cert = det(transpose(allW)) if allW else base.one
    notes = []
    B = push.meta.get("cover")
    if B is not None:
        cdim = constants(B).dim
        if cdim != 1:
            notes.append(f"constant ring has dimension {cdim}; summands need not be distinct "
                         "as plain connection modules")
    return Decomposition(summands, labels, cert, cert.is_unit()[0] and len(allW) == push.rank, notes)


# -- morphisms --------------------------------------------------------------------------

@dataclass
class MorphismSpace:
    maps: list           # r_N x r_M Laurent matrices
    dim: int
    flat_dim: int
    status: str

    def to_json(self):
        return {"dim": self.dim, "flat_dim": self.flat_dim, "status": self.status,
                "maps": [[[str(x) for x in r] for r in F] for F in self.maps]}


def _flatten_conditions(mats, f):
    """Rows of the k-system sum_t lam_t X_t = 0 (X_t Laurent matrices)."""
    rows = {}
    for t, X in enumerate(mats):
        for a, row in enumerate(X):
            for b, x in enumerate(row):
                for e, c in x.terms.items():
                    rows.setdefault((a, b, e), {})[t] = c
    return list(rows.values())


def hom_connection(M: ConnectionModule, N: ConnectionModule, n_equivariant=True, g_equivariant=True,
                   bound=None) -> MorphismSpace:
    """Flat morphisms M -> N, cut down by the equivariance conditions."""
    base = M.base
    f = base.field
    if M.rank == 0 or N.rank == 0:
        return MorphismSpace([], 0, 0, "complete")
    H = ConnectionModule(base, N.rank * M.rank, internal_hom_gamma(M, N), label="Hom")
    sols = flat_sections(H, bound)
    Fs = [_unvec(v, N.rank, M.rank) for v in sols.basis]
    conds = []
    if n_equivariant and M.n_action is not None and N.n_action is not None:
        for g in M.n_group.generators:
            conds.append([_madd(matmul(N.n_action[g], F), _mneg(matmul(F, M.n_action[g]))) for F in Fs])
    if g_equivariant and M.g_action and N.g_action:
        for (sig, SM), (_, SN) in zip(M.g_action, N.g_action):
            conds.append([_madd(matmul(SN, sig.apply_matrix(F, base)), _mneg(matmul(F, SM))) for F in Fs])
    if conds and Fs:
        rows = []
        for block in conds:
            rows += _flatten_conditions(block, f)
        ker = sparse_kernel(rows, len(Fs), f) if rows else [{t: f.one} for t in range(len(Fs))]
        maps = []
        for lam in ker:
            F = _zero_mat(N.rank, M.rank, base)
            for t, c in lam.items():
                F = _madd(F, _mscale(Fs[t], c))
            maps.append(F)
    else:
        maps = Fs
    return MorphismSpace(maps, len(maps), len(Fs), sols.status)


def is_flat_morphism(F, M: ConnectionModule, N: ConnectionModule):
    """F gamma^M = d F + gamma^N F for every coordinate derivation."""
    for i in range(M.base.nvars):
        lhs = matmul(F, M.gamma[i])
        rhs = _madd(mat_diff(F, M.base.coordinate_derivation(i)), matmul(N.gamma[i], F))
        if lhs != rhs:
            return False
    return True


def find_isomorphism(M, N, space: MorphismSpace | None = None, tries=20):
    """An element of the morphism space with unit determinant, or None."""
    if M.rank != N.rank:
        return None
    space = space or hom_connection(M, N)
    if M.rank == 0:
        return []
    rng = random.Random(3)
    cands = list(space.maps)
    for _ in range(tries):
        if not space.maps:
            break
        F = _zero_mat(N.rank, M.rank, M.base)
        for X in space.maps:
            F = _madd(F, _mscale(X, rng.randint(-3, 3)))
        cands.append(F)
    for F in cands:
        if det(F).is_unit()[0]:
            return F
    return None


# -- certificates --------------------------------------------------------------------------

@dataclass
class Certificate:
    matrix: list
    det: LaurentPoly | None
    invertible: bool
    flat: bool
    details: dict = dc_field(default_factory=dict)

    @property
    def ok(self):
        return self.invertible and self.flat

    def to_json(self):
        return {"det": None if self.det is None else str(self.det), "invertible": self.invertible,
                "flat": self.flat, "matrix": [[str(x) for x in r] for r in self.matrix], **self.details}


def _certify(T, M, N, details=None):
    if not T:
        return Certificate([], None, True, True, details or {})
    D = det(T)
    return Certificate(T, D, D.is_unit()[0], is_flat_morphism(T, M, N), details or {})


def pullback(M: ConnectionModule, B: CoverAlgebra, act: GaloisAction) -> ConnectionModule:
    """B (x)_A M with connection psi(d) (x) 1 + 1 (x) nabla and N acting on B."""
    base = M.base
    IB, IM = identity(B.rank, base.field, base.nvars), identity(M.rank, base.field, base.nvars)
    gamma = [_madd(kron(B.lift(base.coordinate_derivation(i)), IM), kron(IB, M.gamma[i]))
             for i in range(base.nvars)]
    nact = [kron(act.matrices[g], IM) for g in range(act.group.order)]
    return ConnectionModule(base, B.rank * M.rank, gamma, act.group, nact, None, f"f^*{M.label}")


@dataclass
class RoundtripResult:
    unit: Certificate
    beta: Certificate | None

    @property
    def ok(self):
        return self.unit.ok and (self.beta is None or self.beta.ok)

    def to_json(self):
        return {"unit": self.unit.to_json(), "beta": None if self.beta is None else self.beta.to_json()}


def galois_equivalence_roundtrip(M: ConnectionModule, B: CoverAlgebra, act: GaloisAction) -> RoundtripResult:
    """Unit M -> (f^* M)^N (m -> 1 (x) m) and, for M = f_*O, the beta isomorphism
    f^* f_* O -> O_B^{|N|}."""
    base = M.base
    PM = pullback(M, B, act)
    n = act.group.order
    P = _zero_mat(PM.rank, PM.rank, base)
    for g in range(n):
        P = _madd(P, PM.n_action[g])
    P = _mscale(P, Fraction(1, n))
    W = _image_basis(P, base, "invariants")
    gamma = _induced(PM.gamma, W, base)
    inv = ConnectionModule(base, len(W), gamma, label="(f^*M)^N", basis=W)
    units = []
    for a in range(M.rank):
        v = [base.zero] * PM.rank
        v[a] = base.one          # 1 (x) m_a sits at index 0 * r + a
        units.append(v)
    T = _coords_matrix(W, units) if units else []
    unit = _certify(T, M, inv, {"invariants_rank": len(W)})
    beta_cert = None
    if M.meta.get("cover") is B:
        Bm = beta_matrix(B, act)
        target = direct_sum(*[pushforward(B, None) for _ in range(n)])
        beta_cert = _certify(Bm, pullback_plain(B, M), target)
    return RoundtripResult(unit, beta_cert)


def pullback_plain(B, M):
    base = M.base
    IB, IM = identity(B.rank, base.field, base.nvars), identity(M.rank, base.field, base.nvars)
    gamma = [_madd(kron(B.lift(base.coordinate_derivation(i)), IM), kron(IB, M.gamma[i]))
             for i in range(base.nvars)]
    return ConnectionModule(base, B.rank * M.rank, gamma, label="B(x)M")


# -- regular representation ------------------------------------------------------------

@dataclass
class RegularRepResult:
    evaluation: Certificate
    generators_match: bool
    end_dim: int
    group_order: int
    constants_dim: int

    @property
    def discrepancy(self):
        return self.end_dim - self.group_order

    @property
    def ok(self):
        return self.evaluation.ok and self.generators_match and self.discrepancy == 0

    def to_json(self):
        return {"evaluation": self.evaluation.to_json(), "generators_match": self.generators_match,
                "end_dim": self.end_dim, "group_order": self.group_order,
                "discrepancy": self.discrepancy, "constants_dim": self.constants_dim}


def regular_rep_check(push: ConnectionModule) -> RegularRepResult:
    """Hom_{k[N]}(k[N], push) -> push, phi -> phi(1), and the comparison of
    k[N] with the flat endomorphisms of push."""
    base = push.base
    G = push.n_group
    reg = regular_rep(G, base.field)
    H = hom_functor(reg, push)
    d = G.order
    # phi(1): column of Phi at the identity basis vector e_0
    T = transpose([[w[i * d + 0] for i in range(push.rank)] for w in H.basis])
    ev = _certify(T, H, push)
    match = True
    for g in G.generators:
        # right multiplication r_g on k[N]: e_h -> e_{hg}
        R = [[base.const(1 if G.mul[h][g] == h2 else 0) for h in range(d)] for h2 in range(d)]
        imgs = []
        for w in H.basis:
            Phi = _unvec(w, push.rank, d)
            imgs.append(_vec(matmul(Phi, R)))
        E = _coords_matrix(H.basis, imgs)
        if matmul(T, E) != matmul(push.n_action[g], T):
            match = False
    plain = ConnectionModule(base, push.rank, push.gamma, None, None, push.g_action, push.label)
    end = hom_connection(plain, plain)
    cdim = constants(push.meta["cover"]).dim if "cover" in push.meta else 1
    return RegularRepResult(ev, match, end.dim, d, cdim)


# -- towers and components ------------------------------------------------------------

@dataclass
class Tower:
    big: CoverAlgebra
    big_action: GaloisAction
    mid: CoverAlgebra
    mid_action: GaloisAction
    inclusion: list          # columns: images of the mid basis in big coordinates
    normal: list             # N_0 as elements of the big group
    quotient_map: list       # big group -> mid group

    def validate(self):
        big, mid = self.big, self.mid
        Nb = self.big_action.group
        if not Nb.is_normal(self.normal):
            raise TowerMismatch("N_0 is not normal")
        for i in range(mid.rank):
            for j in range(mid.rank):
                lhs = _combine(self.inclusion, mid.mult[i][j], big)
                if lhs != big.mul(self.inclusion[i], self.inclusion[j]):
                    raise TowerMismatch("inclusion is not multiplicative")
        for g in range(Nb.order):
            for i in range(mid.rank):
                lhs = self.big_action.apply(g, self.inclusion[i])
                rhs = _combine(self.inclusion, _col(self.mid_action.matrices[self.quotient_map[g]], i), big)
                if lhs != rhs:
                    raise TowerMismatch("actions are not compatible along the inclusion")
        for g in self.normal:
            for v in self.inclusion:
                if self.big_action.apply(g, v) != v:
                    raise TowerMismatch("N_0 does not fix the intermediate cover")
        return True


def _col(M, j):
    return [r[j] for r in M]


def _combine(vectors, coeffs, B):
    out = [B.base.zero] * B.rank
    for v, c in zip(vectors, coeffs):
        if c.terms:
            out = [a + c * b for a, b in zip(out, v)]
    return out


def kummer_tower(n_big: int, n_mid: int, base: LaurentAlgebra, u=None) -> Tower:
    """Kummer(n_big, u) over Kummer(n_mid, u), y_mid -> y^(n_big / n_mid)."""
    from .covers import Kummer, build_cover, canonical_action
    if n_big % n_mid:
        raise TowerMismatch("n_mid must divide n_big")
    u = u if u is not None else base.var(0)
    big = build_cover(Kummer(n_big, u), base)
    mid = build_cover(Kummer(n_mid, u), base)
    ab, am = canonical_action(big), canonical_action(mid)
    if ab is None or am is None:
        raise TowerMismatch("the base field lacks the needed roots of unity")
    q = n_big // n_mid
    inc = [big.basis_vec(j * q) for j in range(n_mid)]
    normal = [a for a in range(n_big) if a % n_mid == 0]
    qmap = [a % n_mid for a in range(n_big)]
    t = Tower(big, ab, mid, am, inc, normal, qmap)
    t.validate()
    return t


@dataclass
class CompatibilityResult:
    big: ConnectionModule
    small: ConnectionModule
    certificate: Certificate
    hom_dim: int

    @property
    def ok(self):
        return self.certificate.ok and self.big.rank == self.small.rank

    def to_json(self):
        return {"rank_big": self.big.rank, "rank_small": self.small.rank, "hom_dim": self.hom_dim,
                "certificate": self.certificate.to_json(),
                "gamma_big": [[[str(x) for x in r] for r in G] for G in self.big.gamma],
                "gamma_small": [[[str(x) for x in r] for r in G] for G in self.small.gamma]}


def intermediate_compatibility(tower: Tower, W: GroupRep) -> CompatibilityResult:
    """Hom_{k[N/N0]}(W, push_mid) -> Hom_{k[N]}(infl W, push_big), phi -> i o phi."""
    tower.validate()
    Nb = tower.big_action.group
    push_big = pushforward(tower.big, tower.big_action)
    push_mid = pushforward(tower.mid, tower.mid_action)
    Winf = inflate_rep(W, Nb, tower.quotient_map)
    Hb = hom_functor(Winf, push_big)
    Hm = hom_functor(W, push_mid)
    d = W.dim
    imgs = []
    for w in Hm.basis:
        Phi = _unvec(w, tower.mid.rank, d)
        big_cols = [_combine(tower.inclusion, _col(Phi, c), tower.big) for c in range(d)]
        imgs.append(_vec(transpose(big_cols)))
    T = _coords_matrix(Hb.basis, imgs) if imgs else []
    cert = _certify(T, Hm, Hb)
    hd = hom_connection(Hm, Hb).dim
    return CompatibilityResult(Hb, Hm, cert, hd)


def component_compatibility(B: CoverAlgebra, act: GaloisAction, V: GroupRep, which=0) -> CompatibilityResult:
    """Hom_{k[N]}(V, B) -> Hom_{k[H0]}(V|H0, e0 B), phi -> e0 * phi."""
    comps = components(B, act)
    comp = comps[which]
    push = pushforward(B, act)
    pc = pushforward(comp.cover, comp.action)
    H = hom_functor(V, push)
    Vr = restrict_rep(V, comp.subgroup, comp.stabilizer)
    Hc = hom_functor(Vr, pc)
    d = V.dim
    imgs = []
    for w in H.basis:
        Phi = _unvec(w, B.rank, d)
        cols = []
        for c in range(d):
            cut = B.mul(comp.idempotent, _col(Phi, c))
            co = laurent_coordinates(comp.inclusion, cut)
            if co is None:
                raise BasisExtractionFailed("cut vector outside the component")
            cols.append(co)
        imgs.append(_vec(transpose(cols)))
    T = _coords_matrix(Hc.basis, imgs) if imgs else []
    cert = _certify(T, H, Hc, {"components": len(comps), "stabilizer": comp.stabilizer})
    hd = hom_connection(H, Hc).dim
    return CompatibilityResult(H, Hc, cert, hd)


# -- finiteness on the bundle side ---------------------------------------------------------

@dataclass
class BundleFiniteness:
    witness: WitnessPair
    beta: Certificate
    rank_check: bool

    def to_json(self):
        return {"witness": self.witness.to_json(), "beta": self.beta.to_json(), "rank_check": self.rank_check}


def constants_invariant_dim(B: CoverAlgebra, sym: ExtraSymmetry | None) -> int:
    """dim_k c(B)^G, G generated by the extra symmetries (constants have
    constant coordinates, so sigma acts trivially on them)."""
    ring = constants(B)
    if not sym:
        return ring.dim
    from .algebra.linalg import field_kernel
    f = B.field
    rows = []
    for sig, S in sym.generators:
        Sc = [[x.constant_term() for x in r] for r in S]
        # (S - I) c = 0 on span(ring.basis)
        for a in range(B.rank):
            rows.append([sum((Sc[a][j] * v[j] for j in range(B.rank)), f.zero) - v[a] for v in ring.basis])
    return len(field_kernel(rows, f, ncols=ring.dim)) if rows else ring.dim


def bundle_finiteness(push: ConnectionModule, sym: ExtraSymmetry | None = None) -> BundleFiniteness:
    B, act = push.meta["cover"], push.meta["action"]
    G = push.n_group
    w = finiteness_witness(regular_rep(G, push.field)).witness
    cdim = constants_invariant_dim(B, sym)
    if cdim != 1:
        raise ConstantsObstruction(f"c(B)^G has dimension {cdim}", w, cdim)
    Bm = beta_matrix(B, act)
    target = direct_sum(*[pushforward(B, None) for _ in range(G.order)])
    cert = _certify(Bm, pullback_plain(B, push), target)
    r = push.rank
    rank_ok = sum(a * r ** i for i, a in enumerate(w.f)) == sum(a * r ** i for i, a in enumerate(w.g))
    return BundleFiniteness(w, cert, rank_ok)


def fully_faithful_check(V: GroupRep, W: GroupRep, push: ConnectionModule):
    """(dim of flat equivariant morphisms H(V) -> H(W), <chi_V, chi_W>)."""
    HV, HW = hom_functor(V, push), hom_functor(W, push)
    return hom_connection(HV, HW).dim, hom_dim(V, W)


__all__ = [
    "ConnectionModule", "FlatSectionSpace", "MorphismSpace", "Decomposition", "Certificate",
    "RoundtripResult", "RegularRepResult", "CompatibilityResult", "BundleFiniteness", "Tower",
    "TowerMismatch", "ConstantsObstruction", "NotIntegrable", "trivial_with_rep", "pushforward",
    "hom_functor", "decompose_pushforward", "flat_sections", "hom_connection", "tensor", "direct_sum",
    "galois_equivalence_roundtrip", "regular_rep_check", "intermediate_compatibility",
    "component_compatibility", "bundle_finiteness", "kummer_tower", "find_isomorphism",
    "fully_faithful_check", "is_trivializable", "is_flat_morphism", "pullback", "NumberField",
]
