import random

import pytest
from hypothesis import example, given, settings, strategies as st

from covalgebra.algebra.linalg import det, matmul, transpose
from covalgebra.algebra.numberfield import cyclotomic_field, rational_field
from covalgebra.connmod import (ConnectionModule, ConstantsObstruction, NotIntegrable, TowerMismatch,
                                bundle_finiteness, component_compatibility, decompose_pushforward,
                                direct_sum, find_isomorphism, flat_sections, fully_faithful_check,
                                galois_equivalence_roundtrip, hom_connection, hom_functor,
                                intermediate_compatibility, is_flat_morphism, is_trivializable,
                                kummer_tower, pushforward, regular_rep_check, tensor, trivial_with_rep)
from covalgebra.covers import (Disjoint, ExtraSymmetry, Kummer, LaurentAlgebra, MonomialSubstitution,
                               Tensor, Trivial, build_cover, canonical_action, constant_cyclotomic)
from covalgebra.groups import (central_idempotents, hom_dim, irreducibles, random_rep, regular_rep,
                               standard_rep_s3, symmetric_group, tensor_rep, trivial_rep, verify_witness,
                               zero_rep)

from strategies import laurent_polys

Q = rational_field()
A1 = LaurentAlgebra(Q, 1)
A2 = LaurentAlgebra(Q, 2)
X = A1.var(0)


def kummer_push(n, field=None, base=None):
    f = field or cyclotomic_field(n)
    A = base or LaurentAlgebra(f, 1)
    B = build_cover(Kummer(n, A.var(0)), A)
    act = canonical_action(B)
    return B, act, pushforward(B, act)


def gaussian_push():
    B = build_cover(constant_cyclotomic(4, Q), A1)
    act = canonical_action(B)
    return B, act, pushforward(B, act)


def rank1(gamma, base=A1):
    return ConnectionModule(base, 1, [[[base.parse(g)]] for g in gamma])


# -- constructors ----------------------------------------------------------------------

def test_trivial_with_rep_examples():
    S3 = symmetric_group(3)
    std = standard_rep_s3(Q)
    M = trivial_with_rep(std, A1)
    assert M.rank == 2 and M.gamma == [[[A1.zero] * 2] * 2]
    assert M.n_action[3] == [[A1.const(x) for x in row] for row in std.matrix(3)]
    assert M.validate()
    assert trivial_with_rep(trivial_rep(S3, Q), A1).rank == 1


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_kummer_pushforward_connection(n):
    B, act, push = kummer_push(n)
    A = push.base
    assert push.rank == n
    for j in range(n):
        for k in range(n):
            want = A.parse(f"{j}/{n}*x^-1") if j == k else A.zero
            assert push.gamma[0][j][k] == want
    assert push.validate()


def test_gaussian_pushforward():
    _, _, push = gaussian_push()
    assert push.gamma == [[[A1.zero, A1.zero], [A1.zero, A1.zero]]]
    assert push.n_action[1] == [[A1.one, A1.zero], [A1.zero, -A1.one]]


def test_two_variable_pushforward_is_integrable():
    B = build_cover(Tensor(Kummer(2, A2.var(0)), Kummer(3, A2.parse("x1*x2"))), A2)
    push = pushforward(B, None)
    assert push.check_integrable()


def test_non_integrable_connection_detected():
    # gamma_1 = 0, gamma_2 = x1: d_1(gamma_2) != 0
    M = ConnectionModule(A2, 1, [[[A2.zero]], [[A2.var(0)]]])
    with pytest.raises(NotIntegrable):
        M.validate()


def test_extra_symmetry_on_pushforward():
    B = build_cover(Kummer(2, X), A1)
    act = canonical_action(B)
    inv = MonomialSubstitution((Q(1),), ((-1,),))
    S = [[A1.one, A1.zero], [A1.zero, A1.parse("x^-1")]]
    sym = ExtraSymmetry([(inv, S)], order=2)
    assert sym.validate(B, act)
    push = pushforward(B, act, sym)
    assert push.check_g_action()
    # the plain matrix of y -> y is not compatible with x -> 1/x
    bad = pushforward(B, act, ExtraSymmetry([(inv, [[A1.one, A1.zero], [A1.zero, A1.one]])]))
    assert not bad.check_g_action()


def test_direct_sum_and_tensor_ranks():
    _, _, push = kummer_push(2, Q, A1)
    s = direct_sum(push, push)
    t = tensor(push, push)
    assert s.rank == 4 and t.rank == 4
    assert s.validate() and t.validate()


# -- hom functor ------------------------------------------------------------------------------

def test_hom_functor_sign_on_kummer2():
    _, act, push = kummer_push(2, Q, A1)
    sign = irreducibles(act.group, Q)[1].rep
    H = hom_functor(sign, push)
    assert H.rank == 1
    assert H.gamma == [[[A1.parse("1/2*x^-1")]]]
    # the basis vector is y (x) sign^*
    assert H.basis == [[A1.zero, A1.one]]


def test_hom_functor_zero_rep():
    _, act, push = kummer_push(2, Q, A1)
    assert hom_functor(zero_rep(act.group, Q), push).rank == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_hom_functor_rank_equals_dimension(n):
    _, act, push = kummer_push(n)
    for b in irreducibles(act.group, push.field):
        assert hom_functor(b.rep, push).rank == b.dim
    assert hom_functor(regular_rep(act.group, push.field), push).rank == n


def test_hom_functor_rank_on_nonabelian_cover():
    B = build_cover(Tensor(Kummer(3, X), constant_cyclotomic(3, Q)), A1)
    act = canonical_action(B)
    push = pushforward(B, act)
    for b in irreducibles(act.group, Q):
        H = hom_functor(b.rep, push)
        assert H.rank == b.dim
        assert H.validate()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_hom_functor_is_monoidal_up_to_isomorphism(n):
    _, act, push = kummer_push(n)
    irr = [b.rep for b in irreducibles(act.group, push.field)]
    V, W = irr[1], irr[-1]
    lhs = hom_functor(tensor_rep(V, W), push)
    rhs = tensor(hom_functor(V, push), hom_functor(W, push))
    lhs.n_action = rhs.n_action = None
    F = find_isomorphism(lhs, rhs)
    assert F is not None
    assert is_flat_morphism(F, lhs, rhs)


# -- decomposition -------------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_kummer_decomposition(n):
    _, act, push = kummer_push(n)
    dec = decompose_pushforward(push, central_idempotents(act.group, push.field))
    assert dec.invertible
    assert [s.rank for s in dec.summands] == [1] * n
    A = push.base
    gammas = sorted(str(s.gamma[0][0][0]) for s in dec.summands)
    assert gammas == sorted(str(A.parse(f"{j}/{n}*x^-1")) for j in range(n))


def test_kummer2_over_rationals_decomposition():
    _, act, push = kummer_push(2, Q, A1)
    dec = decompose_pushforward(push, central_idempotents(act.group, Q))
    assert [s.gamma[0][0][0] for s in dec.summands] == [A1.zero, A1.parse("1/2*x^-1")]
    assert dec.certificate == A1.one
    assert dec.notes == []


def test_gaussian_decomposition_is_flagged():
    _, act, push = gaussian_push()
    dec = decompose_pushforward(push, central_idempotents(act.group, Q))
    assert len(dec.summands) == 2
    assert all(s.gamma == [[[A1.zero]]] for s in dec.summands)
    assert dec.notes


def test_trivial_cover_single_summand():
    B = build_cover(Trivial(), A1)
    act = canonical_action(B)
    push = pushforward(B, act)
    dec = decompose_pushforward(push, central_idempotents(act.group, Q))
    assert len(dec.summands) == 1 and dec.summands[0].rank == 1


def test_s3_closure_decomposition_is_isotypic():
    B = build_cover(Tensor(Kummer(3, X), constant_cyclotomic(3, Q)), A1)
    act = canonical_action(B)
    push = pushforward(B, act)
    blocks = irreducibles(act.group, Q)
    dec = decompose_pushforward(push, [b.idempotent for b in blocks])
    assert dec.invertible
    # block ranks are dim(rho)^2 / d_rho
    assert [s.rank for s in dec.summands] == [b.dim * b.dim // b.endo_dim for b in blocks]


# -- flat sections --------------------------------------------------------------------------------

def test_flat_sections_examples():
    triv = rank1(["0"])
    assert flat_sections(triv).basis == [[A1.one]]
    assert flat_sections(rank1(["1/2*x^-1"])).dim == 0
    res = flat_sections(rank1(["-1*x^-1"]))
    assert res.dim == 1 and res.status == "complete"
    assert res.basis == [[X]]
    assert flat_sections(rank1(["-1*x^-1"]), method="box").basis == [[X]]


def test_flat_sections_with_polynomial_part():
    # a' + (1/x - 1) a = 0 has no Laurent solution; a' + (2/x) a = 0 gives x^-2
    assert flat_sections(rank1(["x^-1 - 1"])).dim == 0
    assert flat_sections(rank1(["2*x^-1"])).basis == [[A1.parse("x^-2")]]


def test_flat_sections_of_zero_module():
    M = ConnectionModule(A1, 0, [[]])
    assert flat_sections(M).dim == 0 and is_trivializable(M)


@st.composite
def residue_matrices(draw, r):
    return [[draw(st.integers(-3, 3)) for _ in range(r)] for _ in range(r)]


@given(st.integers(1, 3).flatmap(residue_matrices))
@settings(max_examples=25)
def test_residue_solver_agrees_with_box(R):
    r = len(R)
    M = ConnectionModule(A1, r, [[[A1.parse(f"{c}*x^-1") for c in row] for row in R]])
    full = flat_sections(M)
    box = flat_sections(M, method="box")
    assert full.status == "complete"
    assert full.basis == box.basis
    assert full.dim <= r
    for v in full.basis:
        assert M.is_flat_vector(v)


@given(a=st.integers(-4, 4), b=st.integers(-4, 4), p=laurent_polys(Q, 1, max_terms=2, span=3))
@settings(max_examples=30)
def test_gauge_transformed_trivial_module(a, b, p):
    # T = [[1, p], [0, 1]] diag(x^a, x^b); gamma = -dT T^-1 has flat basis the columns of T
    g = [[A1.parse(f"{-a}*x^-1"), -p.diff(0) + p * A1.parse(f"{a - b}*x^-1")],
         [A1.zero, A1.parse(f"{-b}*x^-1")]]
    M = ConnectionModule(A1, 2, [g])
    res = flat_sections(M)
    assert res.dim == 2
    assert is_trivializable(M, res)
    T = [[A1.var(0, a), p * A1.var(0, b)], [A1.zero, A1.var(0, b)]]
    for col in transpose(T):
        assert M.is_flat_vector(col)
    assert flat_sections(M, method="box").basis == res.basis


@given(R=residue_matrices(2), c=st.integers(-2, 2), d=st.integers(-2, 2))
@example(R=[[2, 2], [3, 3]], c=2, d=0)
@settings(max_examples=15)
def test_two_variable_residue_solver_agrees_with_box(R, c, d):
    # gamma_2 = (c R + d) / x2 commutes with gamma_1 = R / x1
    R2 = [[c * R[i][j] + (d if i == j else 0) for j in range(2)] for i in range(2)]
    M = ConnectionModule(A2, 2, [[[A2.parse(f"{v}*x1^-1") for v in row] for row in R],
                                 [[A2.parse(f"{v}*x2^-1") for v in row] for row in R2]])
    assert M.check_integrable()
    full = flat_sections(M)
    # flat exponents are minus integer eigenvalues, bounded by the largest absolute row sum
    bound = max(1, max(sum(abs(v) for v in row) for row in R + R2))
    assert full.basis == flat_sections(M, bound=bound, method="box").basis
    assert full.dim <= 2


@pytest.mark.parametrize("n", [2, 3, 4])
def test_pushforward_flat_sections_bound(n):
    _, act, push = kummer_push(n)
    sols = flat_sections(push)
    assert sols.dim == 1 <= push.rank
    assert not is_trivializable(push, sols)
    for b in irreducibles(act.group, push.field):
        T = trivial_with_rep(b.rep, push.base)
        assert flat_sections(T).dim == T.rank and is_trivializable(T)


# -- morphisms ------------------------------------------------------------------------------------

def test_hom_connection_examples():
    _, act, push = kummer_push(2, Q, A1)
    triv, sign = [b.rep for b in irreducibles(act.group, Q)]
    Hs, Ht = hom_functor(sign, push), hom_functor(triv, push)
    assert hom_connection(Hs, Hs).dim == 1
    assert hom_connection(Ht, Hs).dim == 0


def test_gaussian_fullness_failure():
    _, act, push = gaussian_push()
    triv, sign = [b.rep for b in irreducibles(act.group, Q)]
    flat = hom_connection(hom_functor(triv, push), hom_functor(sign, push), n_equivariant=False)
    assert flat.dim == 1
    assert fully_faithful_check(triv, sign, push) == (1, 0)


@pytest.mark.parametrize("seed", range(4))
def test_fully_faithful_on_random_pairs(seed):
    rng = random.Random(seed)
    _, act, push = kummer_push(4)
    f = push.field
    V, W = random_rep(act.group, f, rng, 3), random_rep(act.group, f, rng, 3)
    got, want = fully_faithful_check(V, W, push)
    assert got == want == hom_dim(V, W)


def test_morphisms_are_flat_and_equivariant():
    _, act, push = kummer_push(3)
    reg = regular_rep(act.group, push.field)
    H = hom_functor(reg, push)
    space = hom_connection(H, push)
    assert space.dim == 3
    for F in space.maps:
        assert is_flat_morphism(F, H, push)


# -- round trip, regular representation, finiteness ------------------------------------------------

def test_roundtrip_examples():
    B, act, push = kummer_push(2, Q, A1)
    res = galois_equivalence_roundtrip(trivial_with_rep(trivial_rep(act.group, Q), A1), B, act)
    assert res.unit.matrix == [[A1.one]] and res.ok
    res = galois_equivalence_roundtrip(rank1(["-1*x^-1"]), B, act)
    assert res.ok and res.unit.matrix == [[A1.one]]
    res = galois_equivalence_roundtrip(push, B, act)
    assert res.ok
    assert res.beta.det == A1.parse("4*x")


@pytest.mark.parametrize("n", [3, 4])
def test_roundtrip_on_pushforward(n):
    B, act, push = kummer_push(n)
    res = galois_equivalence_roundtrip(push, B, act)
    assert res.ok and res.unit.details["invariants_rank"] == n


def test_regular_rep_check():
    assert regular_rep_check(kummer_push(2, Q, A1)[2]).ok
    assert regular_rep_check(kummer_push(3)[2]).ok
    res = regular_rep_check(pushforward(*_zeta3()))
    assert res.evaluation.ok and res.generators_match
    assert res.discrepancy == 2 and res.constants_dim == 2


def _zeta3():
    B = build_cover(constant_cyclotomic(3, Q), A1)
    return B, canonical_action(B)


def test_bundle_finiteness():
    _, _, push = kummer_push(2, Q, A1)
    res = bundle_finiteness(push)
    assert res.beta.ok and res.rank_check
    assert str(res.witness) == "(x^2, 2x)"
    assert verify_witness(regular_rep(push.n_group, Q), res.witness)
    B = build_cover(Trivial(), A1)
    res = bundle_finiteness(pushforward(B, canonical_action(B)))
    assert str(res.witness) == "(x, 1)"


def test_bundle_finiteness_obstruction():
    _, _, push = gaussian_push()
    with pytest.raises(ConstantsObstruction) as info:
        bundle_finiteness(push)
    assert info.value.constants_dim == 2
    assert str(info.value.witness) == "(x^2, 2x)"


# -- towers and components ------------------------------------------------------------------------

def test_kummer_tower_compatibility():
    L = cyclotomic_field(4)
    tower = kummer_tower(4, 2, LaurentAlgebra(L, 1))
    A = tower.big.base
    irr = [b.rep for b in irreducibles(tower.mid_action.group, L)]
    res = intermediate_compatibility(tower, irr[1])
    assert res.ok and res.big.gamma == res.small.gamma == [[[A.parse("1/2*x^-1")]]]
    assert intermediate_compatibility(tower, irr[0]).big.gamma == [[[A.zero]]]
    reg = intermediate_compatibility(tower, regular_rep(tower.mid_action.group, L))
    assert reg.ok and reg.big.rank == 2


def test_tower_mismatch():
    with pytest.raises(TowerMismatch):
        kummer_tower(4, 3, LaurentAlgebra(cyclotomic_field(12), 1))
    with pytest.raises(TowerMismatch):
        kummer_tower(4, 2, A1)


def test_component_compatibility_swap():
    B = build_cover(Disjoint(2, Trivial()), A1)
    act = canonical_action(B)
    reps = [regular_rep(act.group, Q)] + [b.rep for b in irreducibles(act.group, Q)]
    for V in reps:
        res = component_compatibility(B, act, V)
        assert res.ok and res.big.rank == res.small.rank == V.dim


def test_component_compatibility_single_component():
    _, act, _ = kummer_push(2, Q, A1)
    B = build_cover(Kummer(2, X), A1)
    res = component_compatibility(B, act, regular_rep(act.group, Q))
    assert res.ok
    assert res.certificate.details["components"] == 1
    assert det(res.certificate.matrix).is_unit()[0]


def test_identity_is_flat_morphism():
    _, _, push = kummer_push(3)
    A = push.base
    I = [[A.one if i == j else A.zero for j in range(3)] for i in range(3)]
    assert is_flat_morphism(I, push, push)
    assert matmul(I, push.gamma[0]) == push.gamma[0]
    assert not is_flat_morphism([[A.var(0) if i == j else A.zero for j in range(3)] for i in range(3)],
                                push, push)


@pytest.mark.parametrize("n", [2, 3])
def test_reynolds_projector_is_idempotent(n):
    _, act, push = kummer_push(n)
    for V in [regular_rep(act.group, push.field)] + [b.rep for b in irreducibles(act.group, push.field)]:
        P = hom_functor(V, push).meta["projector"]
        assert matmul(P, P) == P
