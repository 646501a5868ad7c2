from fractions import Fraction

import numpy as np
import pytest

from summing_lab.core import VecSeq, as_exponent, lp_norm
from summing_lab.operators import OperatorMat, make_Ex, op_norm
from summing_lab.oracle import CapExceeded, GridSpec, brute_pi_p, grid_op_norm, signvec_pi1


def _op(M, a, b):
    return OperatorMat(np.asarray(M, float), as_exponent(a), as_exponent(b))


def test_grid_identity():
    est = grid_op_norm(_op(np.eye(2), 2, 2))
    assert est.value == pytest.approx(1.0, abs=1e-3)
    assert est.value <= 1.0 + 1e-12 <= est.upper + 1e-12


def test_grid_max_column():
    assert grid_op_norm(_op([[1, 2], [3, 4]], 1, 1)).value == pytest.approx(6.0, abs=1e-3)


def test_grid_vs_search_random_3x3():
    T = _op(np.random.default_rng(0).standard_normal((3, 3)), Fraction(3, 2), 3)
    g = grid_op_norm(T).value
    s = op_norm(T).value
    assert s * 0.99 <= g <= s + 1e-6


def test_grid_bracket_contains_exact_value():
    rng = np.random.default_rng(1)
    for a, b in [(1, 3), (2, 2), ("inf", 1), (3, "inf")]:
        T = _op(rng.standard_normal((2, 3)), a, b)
        est, exact = grid_op_norm(T), op_norm(T)
        assert exact.is_exact
        # the power-iteration path is exact up to its declared relative tolerance
        slack = 1 + exact.tolerance
        assert est.value <= exact.value * slack and exact.value <= est.upper * slack


def test_grid_monotone_in_resolution():
    rng = np.random.default_rng(2)
    for _ in range(5):
        T = _op(rng.standard_normal((3, 3)), Fraction(3, 2), 4)
        vals = [grid_op_norm(T, GridSpec(resolution=R, refinement_rounds=5)).value for R in (8, 16, 32)]
        assert vals[0] <= vals[1] <= vals[2]


def test_grid_cap_and_dimension():
    with pytest.raises(CapExceeded):
        grid_op_norm(_op(np.eye(3), 2, 2), GridSpec(resolution=512, cap=1000))
    with pytest.raises(ValueError):
        grid_op_norm(_op(np.eye(4), 2, 2))


def test_signvec_lemma_instance():
    E = make_Ex(VecSeq(np.array([[1, 0.5], [0.25, 0]]), 1), 1)
    assert signvec_pi1(E, 2).value == pytest.approx(1.75, rel=0.05)
    assert signvec_pi1(E, 2).value <= 1.75 + 1e-12


def test_signvec_zero_and_single_column():
    assert signvec_pi1(_op(np.zeros((2, 3)), "inf", 1), 2).value == 0.0
    v = np.array([[1.0], [-2.0], [0.5]])
    assert signvec_pi1(_op(v, "inf", 1), 1).value == pytest.approx(float(lp_norm(v[:, 0], 1)))


def test_signvec_preconditions():
    with pytest.raises(ValueError):
        signvec_pi1(_op(np.eye(2), 2, 1), 1)
    with pytest.raises(ValueError):
        signvec_pi1(_op(np.ones((1, 17)), "inf", 1), 1)
    with pytest.raises(CapExceeded):
        signvec_pi1(_op(np.ones((1, 12)), "inf", 1), 3, cap=1000)


def test_brute_examples():
    assert brute_pi_p(_op(np.eye(2), 2, 2), 2, m=2).value == pytest.approx(np.sqrt(2), rel=0.01)
    v = np.array([2.0, 0.0])
    f = np.array([0.6, 0.8])
    assert brute_pi_p(_op(np.outer(v, f), 2, 2), 2, m=1).value == pytest.approx(2.0, rel=0.01)
    assert brute_pi_p(_op(np.zeros((2, 2)), 2, 2), 2, m=2).value == 0.0


def test_brute_preconditions():
    with pytest.raises(ValueError):
        brute_pi_p(_op(np.eye(3), 2, 2), 2)
    with pytest.raises(ValueError):
        brute_pi_p(_op(np.eye(2), 2, 2), 2, m=3)
    with pytest.raises(CapExceeded):
        brute_pi_p(_op(np.eye(2), 2, 2), 2, g=GridSpec(resolution=64, cap=100))


def test_brute_without_exact_weak_norm_stays_below_search_envelope():
    # weak-2 norm in l_3 has no closed form; the oracle divides by a certified upper value
    T = _op(np.random.default_rng(5).standard_normal((2, 2)), 3, 3)
    est = brute_pi_p(T, 2, m=2, g=GridSpec(resolution=16, refinement_rounds=8))
    assert est.value >= op_norm(T).value * (1 - 1e-3)
