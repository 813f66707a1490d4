import pytest
from hypothesis import given, settings, strategies as st

from wachlab import linalg as la
from wachlab.errors import NotUnipotent, NotUnipotentModX, ParameterError
from wachlab.filtered import direct_sum, isomorphic, jordan_strings, standard_block, twist, unit_object
from wachlab.padic import RingParams, SeriesMatrix, TruncSeries, q_series
from wachlab.wach import (WachModule, build_log_ambient, build_standard_wach, check_relations,
                          direct_sum_wach, exp_check, log_unipotent, monodromy, naive_envelope, positivity,
                          q_filtration, reduce_mod_X, tau_power, trivial_wach, verify_wach)

R = RingParams(3, 8, 16)
W21 = build_standard_wach(2, 1, R)


def corrupted():
    T = SeriesMatrix.from_entries(R, [[1, [0, 1]], [[0, 1], 1]])
    return WachModule(R, 2, W21.P, T, W21.G, W21.chi0)


def test_standard_matrices_21():
    q = q_series(R)
    assert W21.P == SeriesMatrix.diag(R, [q, q * q])
    assert W21.T == SeriesMatrix.from_entries(R, [[1, [0, 1]], [0, 1]])
    # T P = P phi(T) = [[q, q^2 X], [0, q^2]]
    expected = SeriesMatrix.from_entries(R, [[q, q * q * TruncSeries.x(R)], [0, q * q]])
    assert W21.T @ W21.P == expected == W21.P @ W21.T.subst_phi()


def test_trivial_module():
    W = trivial_wach(R)
    I = SeriesMatrix.identity(R, 1)
    assert W.P == I and W.T == I and W.G == I
    assert check_relations(W).passed


def test_relations_pass_for_blocks():
    for i in range(1, 4):
        for j in range(3):
            rep = check_relations(build_standard_wach(i, j, R))
            assert rep.relations_passed, (i, j)


def test_corrupted_tau_fails_gamma_tau():
    rep = check_relations(corrupted())
    r = rep.residual("gamma-tau")
    assert not r.passed and r.x_val == 2


def test_gamma_trivial_mod_x_for_all_blocks():
    for i in range(1, 5):
        for j in range(4):
            G = build_standard_wach(i, j, R).G
            assert G.mod_x() == la.identity(i) or [[int(x) for x in r] for r in G.mod_x()] == \
                [[int(a == b) for b in range(i)] for a in range(i)]


def test_positivity():
    assert positivity(W21).s == 3 and positivity(W21).passed
    assert positivity(trivial_wach(R)).s == 0
    # s beyond both the p-adic and the X-adic precision
    assert positivity(build_standard_wach(3, 2, R)).status == "undecided"
    # the X-adic fallback decides cases with det P(0) = 0 mod p^Np
    wide = RingParams(3, 8, 32)
    assert positivity(build_standard_wach(2, 4, wide)).s == 9


def test_monodromy_examples():
    m = monodromy(W21)
    assert m.mod_x() == [[0, 1], [0, 0]] and m.nilpotent and m.index == 2 and m.precision == 8
    assert m.nmat == SeriesMatrix.from_entries(R, [[0, 1], [0, 0]])
    m1 = monodromy(trivial_wach(R))
    assert m1.nmat.is_zero()
    W = direct_sum_wach(W21, build_standard_wach(3, 0, R))
    N0 = la.as_matrix(monodromy(W).mod_x())
    assert jordan_strings(N0) == {2: 1, 3: 1}


def test_monodromy_requires_unipotent_mod_x():
    T = SeriesMatrix.from_entries(R, [[2, 0], [0, 1]])
    W = WachModule(R, 2, W21.P, T, W21.G, W21.chi0)
    with pytest.raises(NotUnipotentModX):
        monodromy(W)


def test_precision_loss_is_tracked():
    m = monodromy(build_standard_wach(4, 0, R))
    assert m.precision == 7  # division by 3 in the third log term
    assert m.mod_x() == [[0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 3], [0, 0, 0, 0]]


def test_exp_check():
    assert exp_check(W21).passed
    assert exp_check(trivial_wach(R)).passed
    assert not exp_check(corrupted()).passed
    for i in range(1, 5):
        assert exp_check(build_standard_wach(i, 1, R)).passed


def test_q_filtration_examples():
    assert q_filtration(W21, 0).basis == la.full_space(2)
    assert q_filtration(W21, 2).basis == la.span([(0, 1)])
    assert q_filtration(W21, 3).basis == ()


def test_q_filtration_decreasing():
    W = build_standard_wach(3, 1, R)
    prev = la.full_space(3)
    for i in range(6):
        cur = q_filtration(W, i).basis
        assert la.is_subspace(cur, prev)
        prev = cur
    assert prev == ()


def test_reduce_examples():
    D = reduce_mod_X(W21)
    assert D.phi == la.diag([3, 9]) and D.nmat == la.as_matrix([[0, 1], [0, 0]])
    assert D.fil.levels == (1, 2)
    assert reduce_mod_X(trivial_wach(R)) == unit_object(3)
    assert isomorphic(reduce_mod_X(build_standard_wach(3, 0, R)), standard_block(3, 0)) is not None


def test_nphi_relation_mod_x():
    for i, j in ((2, 1), (3, 0), (4, 2)):
        W = build_standard_wach(i, j, R)
        N0 = la.as_matrix(monodromy(W).mod_x())
        P0 = la.as_matrix(W.P.mod_x())
        lhs = la.matmul(N0, P0)
        rhs = la.scale(3, la.matmul(P0, N0))
        mod = 3 ** monodromy(W).precision
        assert all((a - b) % mod == 0 for ra, rb in zip(lhs, rhs) for a, b in zip(ra, rb))


def test_direct_sum_wach():
    W = direct_sum_wach(W21, trivial_wach(R))
    assert W.rank == 3 and check_relations(W).relations_passed
    D = reduce_mod_X(W)
    expected = direct_sum(twist(standard_block(2, 0), -1), unit_object(3))
    assert isomorphic(D, expected) is not None
    with pytest.raises(ParameterError):
        direct_sum_wach(W21, trivial_wach(RingParams(3, 4, 16)))


def test_verify_examples():
    assert verify_wach(W21, twist(standard_block(2, 0), -1)).passed
    assert verify_wach(trivial_wach(R), unit_object(3)).passed
    v = verify_wach(W21, standard_block(2, 0))
    assert not v.passed
    pos = dict((n, (s, d)) for n, s, d in v.items)["positivity"]
    assert pos[0] == "fail" and "s=3" in pos[1] and "t_N=1" in pos[1]


def test_chi0_representative_does_not_matter():
    shifted = 4 + 3 ** R.guard * 2
    assert build_standard_wach(3, 1, R, chi0=shifted).G == build_standard_wach(3, 1, R).G


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.integers(1, 50).filter(lambda a: a % 3))
def test_tau_power_rescales_monodromy(i, j, a):
    W = build_standard_wach(i, j, R)
    Wa = WachModule(R, i, W.P, tau_power(W.T, a), W.G, W.chi0)
    N = la.as_matrix(monodromy(W).mod_x())
    Na = la.as_matrix(monodromy(Wa).mod_x())
    mod = 3 ** min(monodromy(W).precision, monodromy(Wa).precision)
    assert all((x * a - y) % mod == 0 for rx, ry in zip(N, Na) for x, y in zip(rx, ry))
    assert jordan_strings(Na) == jordan_strings(N)


def test_envelope_on_log_ambient():
    A = build_log_ambient(2, 1, R)
    env = naive_envelope(A.T, A.M, 1, A.G, A.chi0)
    assert env.rank == 2 and env.tau_stable and env.gamma_trivial
    cols = sorted(tuple(str(b.entry(r, 0)) for r in range(2)) for b in env.basis)
    X = str(TruncSeries.x(R))
    X2 = str(TruncSeries.monomial(R, 2))
    Z = str(TruncSeries.zero(R))
    assert cols == sorted([(X, Z), (Z, X2)])
    assert env.r is not None


def test_envelope_trivial_cases():
    I = SeriesMatrix.identity(R, 2)
    env = naive_envelope(I, I, 2)
    assert env.rank == 2 and env.tau_stable
    A = build_log_ambient(2, 1, R)
    env0 = naive_envelope(A.T, A.M, 0)
    assert env0.rank == 1


def test_envelope_rejects_non_unipotent():
    with pytest.raises(NotUnipotent):
        naive_envelope(SeriesMatrix.from_entries(R, [[2]]), SeriesMatrix.identity(R, 1), 1)


def test_log_unipotent_constant_matrix():
    T = SeriesMatrix.from_constants(R, [[1, 1], [0, 1]])
    assert log_unipotent(T) == SeriesMatrix.from_constants(R, [[0, 1], [0, 0]])
