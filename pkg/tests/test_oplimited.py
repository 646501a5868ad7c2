from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from summing_lab.core import Budget, TailModel, VecSeq, as_exponent, lp_norm, strong_norm
from summing_lab.operators import OperatorMat, make_Ex, op_norm
from summing_lab.oplimited import (
    Certificate,
    certificate_combine,
    certificate_pushforward,
    chain_check,
    default_probes,
    image_sequence,
    known_pi_p,
    limited_certificate,
    lt_p_lower,
    opsum_check,
    opsum_norm,
    seq_limited_check,
)
from summing_lab.summing import pi_2_hilbert_exact


def _op(M, a, b):
    return OperatorMat(np.asarray(M, float), as_exponent(a), as_exponent(b))


def _weak_star(F, q, p):
    """||(E_f)_*: l_q -> l_p|| for functionals stored as rows of F."""
    return op_norm(_op(F, q, p))


# --- opsum_check ----------------------------------------------------------------------


def test_diagonal_example():
    k = np.arange(1, 5)
    x = VecSeq(np.diag(1.0 / k), 2)
    f = VecSeq(np.diag(1.0 / k), 2)
    rep = opsum_check(x, f, 2)
    assert np.allclose(rep.double_array, np.diag(k**-2.0))
    direct = sum(n**-4.0 for n in range(1, 5)) ** 0.5
    assert rep.aggregate == pytest.approx(direct, rel=1e-14)
    assert rep.aggregate == pytest.approx(1.0386, abs=1e-4)
    assert rep.verdict == "summable-at-truncation"


@pytest.mark.parametrize("r", [Fraction(3, 2), 2, 3])
def test_kronecker_array_diverges(r):
    N = 16
    rep = opsum_check(VecSeq.basis(N, 2), VecSeq.basis(N, 2), r)
    assert rep.aggregate == pytest.approx(N ** (1 / float(r)), rel=1e-14)
    assert rep.verdict == "diverging-trend"
    assert rep.slope == pytest.approx(1 / float(r), abs=1e-12)


def test_zero_sequence_is_summable():
    rep = opsum_check(VecSeq(np.zeros((3, 2)), 2), VecSeq(np.eye(2), 2), 2)
    assert rep.aggregate == 0 and rep.verdict == "summable-at-truncation"


def test_aggregate_recomputes_from_array():
    rng = np.random.default_rng(0)
    rep = opsum_check(VecSeq(rng.standard_normal((5, 3)), 3), VecSeq(rng.standard_normal((4, 3)), Fraction(3, 2)), 3)
    rows = [sum(abs(v) ** 3 for v in row) ** (1 / 3) for row in rep.double_array]
    assert np.allclose(rep.row_p_norms, rows)
    assert rep.aggregate == pytest.approx(sum(r**3 for r in rows) ** (1 / 3))


def test_opsum_check_rejects_mismatch():
    with pytest.raises(ValueError):
        opsum_check(VecSeq(np.eye(2), 2), VecSeq(np.eye(3), 2), 2)
    with pytest.raises(ValueError):
        opsum_check(VecSeq(np.eye(2), 3), VecSeq(np.eye(2), 3), 2)


# --- certificates -------------------------------------------------------------------------


def test_certificate_row_norm_example():
    # f_1(e_1) = 1 and f_1(e_2) = 0, so the only row has l_2 norm 1
    c = limited_certificate(VecSeq.basis(2, 2), VecSeq(np.array([[1.0, 0.0]]), 2), 2)
    assert np.array_equal(c.alphas, [1.0]) and c.tail_bound == 0.0


def test_zero_functionals_give_zero_certificate():
    c = limited_certificate(VecSeq.basis(3, 2), VecSeq(np.zeros((2, 3)), 2), 2)
    assert not c.alphas.any() and c.norm == 0


def test_certificate_none_for_kronecker_functionals():
    N = 64
    assert limited_certificate(VecSeq.basis(N, 2), VecSeq.basis(N, 2), Fraction(3, 2)) is None


def test_certificate_tail_bound():
    x = VecSeq(np.eye(3), 2)
    f_ok = VecSeq(np.eye(3), 2, TailModel.power_log(1, 1, 0))
    c = limited_certificate(x, f_ok, 2)
    assert c is not None and 0 < c.tail_bound < np.inf
    f_div = VecSeq(np.eye(3), 2, TailModel.power_log(1, Fraction(1, 2), 0))
    assert limited_certificate(x, f_div, 2) is None


def test_certificate_rejects_negative_entries():
    with pytest.raises(ValueError):
        Certificate(np.array([-1.0]), 0.0, 2)


def _random_pair(rng, p):
    n, m, d = rng.integers(1, 7, size=3)
    x = VecSeq(rng.standard_normal((n, d)) * rng.exponential(1.0, (n, 1)), 2)
    f = VecSeq(rng.standard_normal((m, d)) * rng.exponential(1.0, (m, 1)), 2)
    return x, f


@pytest.mark.parametrize("p", [1, 2])
def test_pairing_inequality(p):
    rng = np.random.default_rng(21 + p)
    for _ in range(300):
        x, f = _random_pair(rng, p)
        ws = _weak_star(f.head, 2, p)
        assert ws.is_exact
        lhs = float(np.sum(np.abs(f.head @ x.head.T) ** p))
        rhs = (ws.value * strong_norm(x, p).value) ** p
        assert lhs <= rhs * (1 + 1e-9) + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1, Fraction(3, 2), 2, 3]))
def test_certificate_dominates_image_of_ball(seed, p):
    rng = np.random.default_rng(seed)
    p = as_exponent(p)
    x = VecSeq(rng.standard_normal((4, 3)), 3)
    f = VecSeq(rng.standard_normal((5, 3)), Fraction(3, 2))
    c = limited_certificate(x, f, p)
    assert c is not None
    for _ in range(40):
        beta = rng.standard_normal(4)
        beta /= float(lp_norm(beta, p.dual))
        z = beta @ x.head
        assert np.all(np.abs(f.head @ z) <= c.alphas * (1 + 1e-9) + 1e-12)


@settings(max_examples=50)
@given(
    st.lists(st.floats(0, 10), min_size=1, max_size=5),
    st.lists(st.floats(0, 10), min_size=1, max_size=5),
    st.floats(0, 3),
    st.floats(0, 3),
    st.sampled_from([1, 2, 3, "inf"]),
)
def test_union_is_between_inputs_and_sum(a, b, ta, tb, p):
    A, B = Certificate(np.array(a), ta, p), Certificate(np.array(b), tb, p)
    U, S = certificate_combine(A, B, "union"), certificate_combine(A, B, "sum")
    assert certificate_combine(A, U, "subset-check") and certificate_combine(B, U, "subset-check")
    assert certificate_combine(U, S, "subset-check")
    assert np.isfinite(U.norm) and np.isfinite(S.norm)


def test_combine_examples():
    a, b = Certificate(np.array([1, 0.5]), 0, 2), Certificate(np.array([0.5, 1]), 0, 2)
    assert np.array_equal(certificate_combine(a, b, "union").alphas, [1, 1])
    s = certificate_combine(Certificate(np.array([1, 0]), 0, 2), Certificate(np.array([0, 1]), 0, 2), "sum")
    assert np.array_equal(s.alphas, [1, 1])
    assert certificate_combine(Certificate(np.array([1, 1]), 0, 2), Certificate(np.array([1, 0.5]), 0, 2), "subset-check") is False
    padded = certificate_combine(Certificate(np.array([1.0]), 0, 2), Certificate(np.array([0, 2.0]), 0, 2), "union")
    assert np.array_equal(padded.alphas, [1, 2])


def test_combine_errors():
    with pytest.raises(ValueError):
        certificate_combine(Certificate(np.ones(1), 0, 2), Certificate(np.ones(1), 0, 3), "union")
    with pytest.raises(ValueError):
        certificate_combine(Certificate(np.ones(1), 0, 2), Certificate(np.ones(1), 0, 2), "intersect")


def test_pushforward_examples():
    rng = np.random.default_rng(6)
    x = VecSeq(rng.standard_normal((3, 2)), 2)
    g = VecSeq(rng.standard_normal((4, 2)), 2)
    direct = limited_certificate(x, g, 2)
    same = certificate_pushforward(x, g, _op(np.eye(2), 2, 2), 2)
    assert np.allclose(same.alphas, direct.alphas)
    zero = certificate_pushforward(x, g, _op(np.zeros((2, 2)), 2, 2), 2)
    assert not zero.alphas.any()
    D = _op(np.diag([2.0, 1.0]), 2, 2)
    scaled = certificate_pushforward(x, g, D, 2)
    recomputed = lp_norm(g.head @ (x.head @ D.entries.T).T, 2, axis=1)
    assert np.allclose(scaled.alphas, recomputed)
    with pytest.raises(ValueError):
        certificate_pushforward(x, VecSeq(np.eye(3), 2), D, 2)


# --- certificate / summability equivalence ------------------------------------------------


def _equivalence_corpus():
    rng = np.random.default_rng(77)
    out = []
    for _ in range(20):
        x, f = _random_pair(rng, 2)
        out.append((x, f))
    for N in (16, 64, 256):
        out.append((VecSeq.basis(N, 2), VecSeq.basis(N, 2)))
        k = np.arange(1, N + 1, dtype=float)
        out.append((VecSeq(np.diag(1 / k), 2), VecSeq(np.diag(1 / k), 2)))
        out.append((VecSeq(np.diag(k**-0.1), 2), VecSeq(np.eye(N), 2)))
    return out


@pytest.mark.parametrize("p", [Fraction(3, 2), 2, 3])
def test_certificate_exists_iff_summable(p):
    seen = set()
    for x, f in _equivalence_corpus():
        rep = opsum_check(x, f, p)
        cert = limited_certificate(x, f, p)
        assert (cert is not None) == (rep.verdict == "summable-at-truncation")
        seen.add(rep.verdict)
    assert seen == {"summable-at-truncation", "diverging-trend"}


# --- seq-limited check and opsum_norm --------------------------------------------------------


def test_seq_limited_zero_operator():
    rep = seq_limited_check(_op(np.zeros((3, 3)), 2, 2), VecSeq.basis(3, 2), 2)
    assert rep.aggregate == 0 and rep.verdict == "summable-at-truncation"


def test_seq_limited_identity_on_kronecker_diverges():
    N = 64
    rep = seq_limited_check(_op(np.eye(N), 2, 2), VecSeq.basis(N, 2), 2, probes=[VecSeq.basis(N, 2)])
    assert rep.verdict == "diverging-trend"


def test_seq_limited_hilbert_bound():
    rng = np.random.default_rng(31)
    T = _op(rng.standard_normal((3, 3)), 2, 2)
    pi2 = pi_2_hilbert_exact(T).value
    probes = default_probes(3, as_exponent(2), as_exponent(2))
    for f in probes:
        assert _weak_star(f.head, 2, 2).value <= 1 + 1e-9
    for _ in range(20):
        x = VecSeq(rng.standard_normal((5, 3)), 2)
        weak = op_norm(make_Ex(x, 2)).value
        rep = seq_limited_check(T, x, 2, probes=probes, with_norm=True)
        assert rep.aggregate <= pi2 * weak * (1 + 1e-9)
        assert rep.opsum_norm is not None


@pytest.mark.parametrize("q", [1, 2, 3])
def test_opsum_norm_single_vector(q):
    v = np.array([[1.0, -2.0, 0.5]])
    x = VecSeq(v, q)
    est = opsum_norm(x, 2, budget=Budget(8, 100))
    nv = float(lp_norm(v[0], q))
    assert est.value <= nv * (1 + 1e-9) + 1e-12
    assert est.value >= nv - 1e-4


def test_opsum_norm_basis_in_l1():
    for N in (1, 3, 6):
        est = opsum_norm(VecSeq.basis(N, 1), 1)
        assert est.is_exact and est.value == N


def test_opsum_norm_zero_and_scaling():
    assert opsum_norm(VecSeq(np.zeros((2, 2)), 2), 2).value == 0
    x = VecSeq(np.random.default_rng(5).standard_normal((3, 3)), 3)
    base = opsum_norm(x, 2, seed=2).value
    for lam in (0.5, -3.0, 10.0):
        assert opsum_norm(x.scaled(lam), 2, seed=2).value == pytest.approx(abs(lam) * base, rel=1e-3)


def test_known_pi_p_closed_forms():
    M = np.array([[1.0, -2], [0.5, 3]])
    assert known_pi_p(_op(M, 2, 2), 2) == pytest.approx(np.linalg.norm(M))
    assert known_pi_p(_op(M, "inf", 1), 1) == 6.5
    assert known_pi_p(_op(M, 3, 1), 1) is None


def test_image_sequence():
    x = VecSeq(np.array([[1.0, 2.0]]), 2)
    assert np.array_equal(image_sequence(_op([[0, 1], [1, 0]], 2, 3), x).head, [[2.0, 1.0]])


# --- lt_p ----------------------------------------------------------------------------------------


def test_lt_zero():
    assert lt_p_lower(_op(np.zeros((2, 2)), 2, 2), 2).value == 0.0


@pytest.mark.parametrize("a, b", [(2, 2), (3, Fraction(3, 2)), (2, "inf")])
def test_lt_rank_one_reaches_norm(a, b):
    rng = np.random.default_rng(12)
    a_, b_ = as_exponent(a), as_exponent(b)
    v, f = rng.standard_normal(3), rng.standard_normal(3)
    f /= float(lp_norm(f, a_.dual))
    T = _op(np.outer(v, f), a, b)
    assert lt_p_lower(T, 2).value >= float(lp_norm(v, b_)) - 1e-3


def test_lt_hilbert_below_frobenius():
    rng = np.random.default_rng(13)
    for _ in range(5):
        T = _op(rng.standard_normal((3, 3)), 2, 2)
        est = lt_p_lower(T, 2)
        assert op_norm(T).value - 1e-3 <= est.value <= pi_2_hilbert_exact(T).value + 1e-3
        S = est.witness
        assert op_norm(_op(S, 2, 2)).value <= 1 + 1e-9


def test_lt_deterministic_and_monotone_in_budget(monkeypatch):
    T = _op(np.random.default_rng(14).standard_normal((3, 3)), 3, 2)
    a = lt_p_lower(T, Fraction(3, 2), Budget(2, 2), Budget(4, 20), seed=1)
    b = lt_p_lower(T, Fraction(3, 2), Budget(2, 2), Budget(4, 20), seed=1)
    assert a.value == b.value
    more = lt_p_lower(T, Fraction(3, 2), Budget(4, 2), Budget(4, 20), seed=1)
    assert more.value >= a.value
    monkeypatch.setenv("SUMMING_LAB_THREADS", "4")
    c = lt_p_lower(T, Fraction(3, 2), Budget(4, 2), Budget(4, 20), seed=1)
    assert c.value == more.value


# --- norm chain ------------------------------------------------------------------------------------


def test_chain_single_vector():
    x = VecSeq(np.array([[3.0, 4.0]]), 2)
    rep = chain_check(x, 2)
    assert rep.ok
    for est in (rep.weak, rep.lt, rep.strong):
        assert est.value == pytest.approx(5.0, abs=1e-3)


@pytest.mark.parametrize("N", [1, 3, 6])
def test_chain_basis(N):
    rep = chain_check(VecSeq.basis(N, 2), 2)
    assert rep.ok
    assert rep.weak.is_exact and rep.weak.value == pytest.approx(1.0)
    assert rep.strong.value == pytest.approx(np.sqrt(N))
    assert 1 - 1e-3 <= rep.lt.value <= np.sqrt(N) + 1e-3


def test_chain_zero():
    rep = chain_check(VecSeq(np.zeros((2, 2)), 2), 2)
    assert rep.ok and rep.weak.value == rep.lt.value == rep.strong.value == 0


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_chain_random(seed, p):
    rng = np.random.default_rng(seed)
    n, d = rng.integers(1, 5, size=2)
    rep = chain_check(VecSeq(rng.standard_normal((n, d)), 2), p)
    assert rep.ok, rep.violations
