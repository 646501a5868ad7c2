"""Absolutely p-summing norms: witness-tuple lower bounds and the exactly computable special cases."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Budget, Exponent, NormEstimate, VecSeq, as_exponent, lp_norm
from .operators import OperatorMat, adjoint, exact_norm, op_norm, upper_norm

SIGMA_MIN, SIGMA_MAX = 1e-6, 2.0


@dataclass(frozen=True, eq=False)
class WitnessTuple:
    """m domain vectors stored as the columns of ``vectors`` (d_in, m), with their weak-p norm."""

    vectors: np.ndarray
    normalization: NormEstimate

    @property
    def m(self) -> int:
        return self.vectors.shape[1]


def tuple_weak_norm(X, a, p):
    """Weak-p norm of the columns of X in l_a, i.e. ||X: l_{p'}^m -> l_a^d||, for stacks (..., d, m).

    Returns (values, exact) where ``exact`` is False when only the factorisation
    upper bound was available. Dividing by either keeps a tuple feasible.
    """
    a, p = as_exponent(a), as_exponent(p)
    ex = exact_norm(X, p.dual, a)
    if ex is not None:
        return ex[0], True
    return upper_norm(X, p.dual, a)[0], False


def tuple_value(T: OperatorMat, X, p) -> np.ndarray:
    """(sum_i ||T x_i||^p)^(1/p) / weak-p norm of (x_i), for stacks of tuples (..., d_in, m)."""
    X = np.asarray(X, dtype=float)
    num = lp_norm(lp_norm(T.entries @ X, T.codomain, axis=-2), p, axis=-1)
    weak, _ = tuple_weak_norm(X, T.domain, p)
    weak = np.asarray(weak)
    return np.where(weak > 0, num / np.where(weak > 0, weak, 1.0), 0.0)


def _basis_tuple(T: OperatorMat, k: int) -> np.ndarray:
    # the k basis vectors with the largest images (all of them when k >= d_in)
    d = T.d_in
    order = np.argsort(-lp_norm(T.entries, T.codomain, axis=0), kind="stable")
    X = np.zeros((d, k))
    for i, j in enumerate(order[:k]):
        X[j, i] = 1.0
    return X


def _level_search(T: OperatorMat, p: Exponent, k: int, budget: Budget, seed: int, warm: list[np.ndarray]):
    """Hill-climb over k-tuples from ``budget.starts`` starts in lockstep; returns (values, tuples)."""
    d = T.d_in
    S = budget.starts
    X = np.empty((S, d, k))
    noise = np.empty((S, budget.iters, d))
    for i in range(S):
        rng = np.random.default_rng([seed, k, i])
        X[i] = warm[i] if i < len(warm) else rng.standard_normal((d, k))
        noise[i] = rng.standard_normal((budget.iters, d))
    val = tuple_value(T, X, p)
    sigma = np.full(S, 0.5)
    for it in range(budget.iters):
        j = it % k
        rms = np.sqrt((X**2).mean(axis=(1, 2)))
        rms = np.where(rms > 0, rms, 1.0)
        trial = X.copy()
        trial[:, :, j] += (sigma * rms)[:, None] * noise[:, it, :]
        tv = tuple_value(T, trial, p)
        ok = tv > val
        X[ok] = trial[ok]
        val = np.where(ok, tv, val)
        sigma = np.clip(np.where(ok, sigma * 1.5, sigma * 0.85), SIGMA_MIN, SIGMA_MAX)
    return val, X


def pi_p_lower(T: OperatorMat, p, m: int | None = None, budget: Budget | None = None, seed: int = 0) -> NormEstimate:
    """Lower estimate of pi_p(T) from witness tuples of up to ``m`` vectors.

    Tuple sizes k = 1..m are searched in turn. Starts include the basis tuple,
    the operator-norm maximiser and the best tuple of size k-1 padded with a
    zero vector; the rest are random with noise drawn from a per-(seed, k,
    start) stream. Every tuple is divided by its exact (or upper-bracket) weak-p
    norm, so reported values never exceed the true pi_p. The result is
    nondecreasing in ``m``, in the number of starts and in iterations.
    """
    p = as_exponent(p)
    if p.is_inf:
        raise ValueError("pi_p is only estimated for finite p")
    d = T.d_in
    m = min(d, 6) if m is None else m
    if m < 1:
        raise ValueError("m must be >= 1")
    budget = budget or Budget()
    if d == 0 or not T.entries.any():
        return NormEstimate(0.0, "lower", "witness-search", seed=seed, budget=budget,
                            witness=WitnessTuple(np.zeros((d, 1)), NormEstimate(0.0, "exact", "zero")))
    on = op_norm(T, budget, seed)
    alpha = np.asarray(on.witness, dtype=float)
    best_val, best_X = -1.0, None
    prev_best = None
    for k in range(1, m + 1):
        warm = [_basis_tuple(T, k)]
        op_seed = np.zeros((d, k))
        op_seed[:, 0] = alpha
        warm.append(op_seed)
        if prev_best is not None:
            warm.append(np.hstack([prev_best, np.zeros((d, 1))]))
        vals, Xs = _level_search(T, p, k, budget, seed, warm)
        i = int(np.argmax(vals))
        prev_best = Xs[i]
        if vals[i] > best_val:
            best_val, best_X = float(vals[i]), Xs[i]
    weak, exact = tuple_weak_norm(best_X, T.domain, p)
    weak = float(weak)
    W = best_X / weak
    norm_est = NormEstimate(1.0, "exact" if exact else "upper", "weak-norm")
    return NormEstimate(best_val, "lower", "witness-search", seed=seed, tolerance=1e-4, budget=budget,
                        witness=WitnessTuple(W, norm_est))


def pi_2_hilbert_exact(T: OperatorMat) -> NormEstimate:
    """pi_2 of an operator between Euclidean spaces: the Hilbert-Schmidt (Frobenius) norm."""
    two = Exponent(2)
    if T.domain != two or T.codomain != two:
        raise ValueError("pi_2 equals the Frobenius norm only between l_2 spaces")
    return NormEstimate(float(np.linalg.norm(T.entries)), "exact", "hilbert-schmidt")


def pi_p_dual(T: OperatorMat, p, m: int | None = None, budget: Budget | None = None, seed: int = 0) -> NormEstimate:
    """Norm in the dual ideal: pi_p of the adjoint."""
    est = pi_p_lower(adjoint(T), p, m, budget, seed)
    return NormEstimate(est.value, est.kind, "adjoint-" + est.method, seed=est.seed, tolerance=est.tolerance,
                        budget=est.budget, upper=est.upper, witness=est.witness)


def pi_1_Ealpha_exact(alpha: VecSeq) -> NormEstimate:
    """pi_1 of E_alpha: c_0 -> l_1 for a finite sequence in l_1, which equals sum_n ||alpha_n||_1."""
    if alpha.q.value != 1:
        raise ValueError(f"ambient space must be l_1, got l_{alpha.q}")
    if not alpha.is_finite:
        raise ValueError("alpha must be a finite sequence")
    return NormEstimate(float(np.abs(alpha.head).sum()), "exact", "l1-strong-norm")
