import random
from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from wachlab import linalg as la
from wachlab.corpus import conjugate, random_block_sum, random_module
from wachlab.errors import InvariantError, ParameterError, UnsupportedEigenstructure
from wachlab.filtered import (ADMISSIBLE, NOT_ADMISSIBLE, VERIFIED_ON_ENUMERATED, BlockSpec, Flag,
                              FilPhiNModule, blocks_module, crystalline_companion, decompose_standard,
                              direct_sum, griffiths_check, hat_filtration, is_admissible, is_naive,
                              isomorphic, jordan_strings, standard_block, sym_power, t_H, t_N, tensor,
                              twist, unit_object)

p = 3
E = la.identity(2)


def d2_with(*steps):
    B = standard_block(2, 0)
    return B.with_fil(Flag.from_spans(2, steps))


MODIFIED_D2 = d2_with((0, E), (1, [(0, 1)]), (2, [(0, 1)]))


# -- flags -----------------------------------------------------------------

def test_flag_normalisation():
    f = Flag.from_spans(2, [(0, E), (1, [(0, 1)]), (2, [(0, 1)])])
    assert f.levels == (0, 2)
    g = Flag.from_spans(2, [(3, [(1, 1)])])
    assert g.levels == (2, 3) and len(g.fil(2)) == 2 and len(g.fil(-10)) == 2 and g.fil(4) == ()
    with pytest.raises(InvariantError) as err:
        Flag.from_spans(2, [(0, [(1, 0)]), (1, [(0, 1)])])
    assert err.value.invariant == "flag-decreasing"


def test_module_invariants_named():
    with pytest.raises(InvariantError) as err:
        FilPhiNModule(p, 2, la.diag([1, 3]), [[0, 1], [1, 0]], Flag.trivial(2))
    assert err.value.invariant == "N-nilpotent"
    with pytest.raises(InvariantError) as err:
        FilPhiNModule(p, 2, la.diag([1, 1]), [[0, 1], [0, 0]], Flag.trivial(2))
    assert err.value.invariant == "N-phi-relation"
    with pytest.raises(InvariantError) as err:
        FilPhiNModule(p, 2, la.diag([0, 1]), la.zeros(2), Flag.trivial(2))
    assert err.value.invariant == "phi-invertible"


# -- invariants t_N, t_H ---------------------------------------------------

def test_tate_block_data():
    B = standard_block(2, 0)
    e1, e2 = E
    assert la.apply(B.phi, e1) == e1 and la.apply(B.phi, e2) == la.scale(p, [e2])[0]
    assert la.apply(B.nmat, e2) == e1
    assert t_N(B) == 1 and t_H(B) == 1


def test_t_examples():
    assert t_N(unit_object(p)) == 0 and t_H(unit_object(p)) == 0
    B = standard_block(2, -1)
    assert B.phi == la.diag([3, 9]) and t_N(B) == 3 and t_H(B) == 3
    assert dict(B.fil.jumps()) == {1: 1, 2: 1}
    assert Flag.trivial(3).t_H() == 0


# -- hat filtration, Griffiths, naivety --------------------------------------

def test_hat_examples():
    D = FilPhiNModule(p, 2, la.diag([1, 1]), la.zeros(2), Flag.from_spans(2, [(0, E), (1, [(1, 2)])]))
    assert hat_filtration(D) == D.fil
    h = hat_filtration(MODIFIED_D2)
    assert h.fil(2) == () and h.fil(1) == la.span([(0, 1)])
    for i in range(1, 4):
        B = standard_block(i, 1 - i)
        assert hat_filtration(B) == B.fil


def test_modified_d2_values():
    # jumps at 0 and 2, so t_H = 2; the hat filtration has jumps {0, 1}
    assert MODIFIED_D2.t_H() == 2
    assert crystalline_companion(MODIFIED_D2).t_H() == 1


def test_griffiths_and_naive_examples():
    assert griffiths_check(standard_block(2, 0))
    assert not griffiths_check(MODIFIED_D2)
    assert not is_naive(MODIFIED_D2)
    for i in range(1, 5):
        for j in range(-2, 3):
            B = standard_block(i, j)
            assert griffiths_check(B) and is_naive(B)


def test_companion_of_crystalline_is_identity():
    D = FilPhiNModule(p, 2, la.diag([1, 9]), la.zeros(2), Flag.from_spans(2, [(0, E), (2, [(1, 1)])]))
    assert crystalline_companion(D) == D


# -- admissibility ---------------------------------------------------------

def test_admissibility_examples():
    v = is_admissible(standard_block(2, 0))
    assert v.status == ADMISSIBLE and v.exhaustive
    bad = d2_with((0, E), (1, [(1, 0)]))
    v = is_admissible(bad)
    assert v.status == NOT_ADMISSIBLE and v.witness == la.span([(1, 0)])
    assert bad.sub_t_H(v.witness) > bad.sub_t_N(v.witness)
    assert is_admissible(unit_object(p)).status == ADMISSIBLE


def test_admissibility_global_mismatch():
    v = is_admissible(standard_block(2, 0).with_fil(Flag.trivial(2, 0)))
    assert v.status == NOT_ADMISSIBLE and "t_H" in v.reason


def test_admissibility_scalar_phi_exact():
    D = FilPhiNModule(p, 2, la.diag([3, 3]), la.zeros(2), Flag.from_spans(2, [(0, E), (2, [(1, 1)])]))
    v = is_admissible(D)
    assert v.status == NOT_ADMISSIBLE and v.exhaustive and v.witness == la.span([(1, 1)])
    D2 = FilPhiNModule(p, 2, la.diag([3, 3]), la.zeros(2), Flag.from_spans(2, [(0, E), (1, [(1, 1)]), (2, ())]))
    assert D2.t_H() == 1
    D3 = FilPhiNModule(p, 2, la.diag([3, 3]), la.zeros(2), Flag.trivial(2, 1))
    assert is_admissible(D3).status == ADMISSIBLE


def test_admissibility_sampled_tier():
    T = tensor(standard_block(2, 0), standard_block(2, 0))
    v = is_admissible(T)
    assert v.status == VERIFIED_ON_ENUMERATED and not v.exhaustive and v.enumerated_count > 0


def test_irrational_eigenvalues_rejected():
    phi = la.as_matrix([[0, 2], [1, 0]])  # x^2 - 2
    D = FilPhiNModule(p, 2, phi, la.zeros(2), Flag.from_spans(2, [(-1, E), (1, [(1, 0)])]))
    assert D.t_H() == D.t_N()
    with pytest.raises(UnsupportedEigenstructure):
        is_admissible(D)


# -- constructors ------------------------------------------------------------

def test_twist_examples():
    assert twist(unit_object(p), 0) == unit_object(p)
    T = twist(standard_block(2, 0), -1)
    assert T.phi == la.diag([3, 9]) and T.fil.levels == (1, 2)
    for i in range(1, 4):
        for j in range(-2, 3):
            assert twist(standard_block(i, 0), j) == standard_block(i, j)


def test_sym_power_of_tate_block():
    S = sym_power(standard_block(2, 0), 2)
    assert isomorphic(S, standard_block(3, 0)) is not None
    S3 = sym_power(standard_block(2, 0), 3)
    assert isomorphic(S3, standard_block(4, 0)) is not None


def test_constructors_reject_mixed_primes():
    with pytest.raises(ParameterError):
        direct_sum(standard_block(1, 0, 3), standard_block(1, 0, 5))


def test_tensor_and_sum_additivity():
    A, B = standard_block(2, 1), standard_block(3, -1)
    S, T = direct_sum(A, B), tensor(A, B)
    assert S.t_H() == A.t_H() + B.t_H() and S.t_N() == A.t_N() + B.t_N()
    assert T.t_H() == B.dim * A.t_H() + A.dim * B.t_H()
    assert T.t_N() == B.dim * A.t_N() + A.dim * B.t_N()


# -- isomorphism and decomposition -----------------------------------------

def test_isomorphic_examples():
    B = standard_block(3, 1)
    U = isomorphic(B, B)
    assert U is not None and la.det(U) != 0
    assert isomorphic(standard_block(1, 0), standard_block(1, 1)) is None


def test_isomorphic_conjugates():
    rng = random.Random(3)
    for _ in range(5):
        blocks, D = random_block_sum(rng, max_dim=5)
        U = isomorphic(blocks_module(blocks), D)
        assert U is not None
        assert la.matmul(U, blocks_module(blocks).phi) == la.matmul(D.phi, U)


def test_decompose_examples():
    D = direct_sum(standard_block(2, 0), standard_block(1, -1))
    assert decompose_standard(D).blocks == (BlockSpec(1, -1), BlockSpec(2, 0))
    assert decompose_standard(unit_object(p)).blocks == (BlockSpec(1, 0),)
    generic = d2_with((0, E), (1, [(1, 1)]))
    res = decompose_standard(generic)
    assert not res.ok and res.failure


def test_decompose_non_power_eigenvalue():
    D = FilPhiNModule(p, 1, [[2]], [[0]], Flag.trivial(1, 0))
    assert not decompose_standard(D).ok


def test_jordan_strings():
    D = direct_sum(standard_block(3, 0), standard_block(2, 1))
    assert jordan_strings(D.nmat) == {3: 1, 2: 1}


# -- properties over random modules ------------------------------------------

seeds = st.integers(0, 10 ** 6)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(seeds)
def test_hat_properties(seed):
    D = random_module(random.Random(seed))
    h = hat_filtration(D)
    H = D.with_fil(h)
    assert griffiths_check(H)
    assert hat_filtration(H) == h
    assert h.contained_in(D.fil)
    assert is_naive(D) == griffiths_check(D)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(seeds)
def test_relation_preserved_by_constructions(seed):
    rng = random.Random(seed)
    A = random_module(rng, max_dim=2)
    B = random_module(rng, max_dim=2)
    for D in (tensor(A, B), direct_sum(A, B), twist(A, rng.randint(-2, 2)), sym_power(A, 2)):
        assert la.matmul(D.nmat, D.phi) == la.scale(p, la.matmul(D.phi, D.nmat))


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(seeds, st.integers(-3, 3))
def test_twist_shifts_invariants(seed, j):
    D = random_module(random.Random(seed))
    T = twist(D, j)
    assert T.t_H() == D.t_H() - j * D.dim and T.t_N() == D.t_N() - j * D.dim


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(seeds)
def test_admissibility_witnesses_are_genuine(seed):
    D = random_module(random.Random(seed))
    v = is_admissible(D)
    if v.status == NOT_ADMISSIBLE and D.t_H() == D.t_N():
        assert D.is_stable(v.witness)
        assert D.sub_t_H(v.witness) > D.sub_t_N(v.witness)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(seeds)
def test_decompose_round_trip(seed):
    blocks, D = random_block_sum(random.Random(seed), max_dim=6)
    assert decompose_standard(D).blocks == blocks


def test_conjugation_preserves_isomorphism_class():
    D = standard_block(3, -1)
    C = la.as_matrix([[1, 1, 0], [0, 1, 2], [0, 0, 1]])
    assert isomorphic(D, conjugate(D, C)) is not None
