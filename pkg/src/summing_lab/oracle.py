"""Brute-force reference values for validating the search-based estimators at tiny scale.

These are lower-bound engines: dense grids on the unit sphere followed by
deterministic local pattern refinement. They are slow and dimension-capped on
purpose and share no code path with the sphere ascent or witness search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NormEstimate, as_exponent, lp_norm
from .operators import OperatorMat, exact_norm, sign_vectors


class CapExceeded(RuntimeError):
    """The requested oracle run would exceed its evaluation cap."""


@dataclass(frozen=True)
class GridSpec:
    resolution: int = 64
    refinement_rounds: int = 30
    local: int = 9
    cap: int = 10**7


def _sphere_points(angles: np.ndarray, a) -> np.ndarray:
    """Map angle tuples (k, dim-1) to the unit sphere of l_a in R^dim."""
    if angles.shape[1] == 1:
        th = angles[:, 0]
        u = np.stack([np.cos(th), np.sin(th)], axis=1)
    else:
        th, ph = angles[:, 0], angles[:, 1]
        u = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)
    return u / lp_norm(u, a, axis=1)[:, None]


def _grid_angles(dim: int, R: int) -> np.ndarray:
    # the sphere modulo +-: theta in [0, pi) for dim 2; (theta, phi) in [0, pi] x [0, pi) for dim 3
    if dim == 2:
        return (np.arange(R) * np.pi / R)[:, None]
    th = np.arange(R + 1) * np.pi / R
    ph = np.arange(R) * np.pi / R
    T, P = np.meshgrid(th, ph, indexing="ij")
    return np.stack([T.ravel(), P.ravel()], axis=1)


def _dyadic(R: int) -> list[int]:
    out = [R]
    while out[-1] % 2 == 0 and out[-1] // 2 >= 4:
        out.append(out[-1] // 2)
    return out


def _refine(f, center: np.ndarray, h: float, rounds: int, local: int):
    """Shrinking local pattern search around ``center``; returns (best value, best point, evals)."""
    best_x = center.copy()
    best = float(f(best_x[None, :])[0])
    evals = 1
    k = center.shape[0]
    offs = np.linspace(-1.0, 1.0, local)
    mesh = np.stack(np.meshgrid(*([offs] * k), indexing="ij"), axis=-1).reshape(-1, k)
    for _ in range(rounds):
        cand = best_x + h * mesh
        vals = f(cand)
        evals += len(cand)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_x = float(vals[i]), cand[i]
        h *= 0.5
    return best, best_x, evals


def grid_op_norm(T: OperatorMat, g: GridSpec | None = None) -> NormEstimate:
    """Dense-grid lower value of ||T: l_a -> l_b|| for d_in <= 3, with a mesh-based upper value."""
    g = g or GridSpec()
    M, a, b = T.entries, T.domain, T.codomain
    d = T.d_in
    if d > 3:
        raise ValueError("grid oracle supports d_in <= 3")
    if d == 1:
        v = float(lp_norm(M[:, 0], b))
        return NormEstimate(v, "lower", "grid", upper=v, witness=np.ones(1))
    R = g.resolution
    angles = _grid_angles(d, R)
    n_refine = len(_dyadic(R)) * g.refinement_rounds * g.local ** (d - 1)
    if len(angles) + n_refine > g.cap:
        raise CapExceeded(f"{len(angles) + n_refine} evaluations exceed cap {g.cap}")

    def f(ang):
        return lp_norm(_sphere_points(ang, a) @ M.T, b, axis=1)

    vals = f(angles)
    best = float(vals.max())
    best_ang = angles[int(np.argmax(vals))]
    for Rs in _dyadic(R):
        step = R // Rs
        if d == 2:
            sub = np.arange(0, R, step)
        else:
            idx = np.arange(len(angles)).reshape(R + 1, R)
            sub = idx[::step, ::step].ravel()
        start = angles[sub[int(np.argmax(vals[sub]))]]
        v, x, _ = _refine(f, start, np.pi / Rs, g.refinement_rounds, g.local)
        if v > best:
            best, best_ang = v, x
    # covering radius of the coarse grid in the l_a metric
    pts = _sphere_points(angles, a)
    if d == 2:
        nxt = np.roll(pts, -1, axis=0)
        nxt[-1] = -pts[0]
        h = float(lp_norm(pts - nxt, a, axis=1).max())
    else:
        P = pts.reshape(R + 1, R, 3)
        h = float(max(lp_norm(P[1:] - P[:-1], a, axis=2).max(), lp_norm(P[:, 1:] - P[:, :-1], a, axis=2).max()))
    upper = best / (1 - h) if h < 1 else np.inf
    return NormEstimate(best, "lower", "grid", tolerance=h, upper=float(upper),
                        witness=_sphere_points(best_ang[None, :], a)[0])


def signvec_pi1(T: OperatorMat, m: int, cap: int = 10**7) -> NormEstimate:
    """Exhaustive pi_1 over m-tuples for an operator on l_inf^N.

    The unit ball of weak-1-summable m-tuples in l_inf^N is a product of l_1
    balls (one per coordinate), so its extreme points are tuples of sign
    vectors with disjoint supports: each coordinate is assigned to exactly one
    tuple member with a sign, and the weak-1 norm of every such tuple is 1.
    The maximum over assignments splits over blocks, so it is a partition
    problem over subsets of coordinates solved by subset dynamic programming.
    """
    if not T.domain.is_inf:
        raise ValueError("sign-vector exhaustion needs an l_inf (c_0) domain")
    M, b = T.entries, T.codomain
    N = T.d_in
    if N > 16:
        raise ValueError("sign-vector exhaustion supports d_in <= 16")
    if m < 1:
        raise ValueError("m must be >= 1")
    m = min(m, N) if N else 1
    if N == 0 or not M.any():
        return NormEstimate(0.0, "lower", "signvec-exhaustive", witness=np.zeros((N, m)))
    if m == 1:
        evals = 2 ** (N - 1)
    else:
        evals = (3**N + 1) // 2
    if evals > cap:
        raise CapExceeded(f"{evals} sign-vector evaluations exceed cap {cap}")

    full = (1 << N) - 1
    # value and maximising signs for each column subset
    val = np.zeros(1 << N)
    arg: dict[int, np.ndarray] = {}
    subsets = [full] if m == 1 else range(1, full + 1)
    for S in subsets:
        cols = [j for j in range(N) if S >> j & 1]
        sv = sign_vectors(len(cols))
        vals = lp_norm(M[:, cols] @ sv.T, b, axis=0)
        k = int(np.argmax(vals))
        val[S] = vals[k]
        arg[S] = sv[k]

    # best[k][S]: best split of S into at most k blocks
    best = {1: val.copy()}
    choice: dict[tuple[int, int], int] = {}
    for k in range(2, m + 1):
        prev = best[k - 1]
        cur = prev.copy()
        for S in range(1, full + 1):
            low = S & -S
            A = S
            while A:
                if A & low and A != S:
                    cand = val[A] + prev[S ^ A]
                    if cand > cur[S]:
                        cur[S] = cand
                        choice[(k, S)] = A
                A = (A - 1) & S
        best[k] = cur

    blocks = []
    S, k = full, m
    while S:
        while k > 1 and (k, S) not in choice:
            k -= 1
        A = choice[(k, S)] if k > 1 else S
        blocks.append(A)
        S ^= A
        k -= 1
    B = np.zeros((N, m))
    for i, A in enumerate(blocks):
        cols = [j for j in range(N) if A >> j & 1]
        B[cols, i] = arg[A]
    weak = float(exact_norm(B, "inf", "inf")[0])
    value = float(lp_norm(lp_norm(M @ B, b, axis=0), 1))
    return NormEstimate(value / weak, "lower", "signvec-exhaustive", witness=B / weak)


def _weak_grid(X: np.ndarray, a, p, R: int) -> np.ndarray:
    """Grid value of the weak-p norm of tuples X (k, 2, m) in l_a^2: max over unit g in l_a' of ||X^T g||_p."""
    G = _sphere_points((np.arange(R) * np.pi / R)[:, None], as_exponent(a).dual)
    out = np.empty(X.shape[0])
    for s in range(0, X.shape[0], 4096):
        Y = np.einsum("rd,kdm->krm", G, X[s:s + 4096])
        out[s:s + 4096] = lp_norm(Y, p, axis=2).max(axis=1)
    return out


def brute_pi_p(T: OperatorMat, p, m: int = 2, g: GridSpec | None = None) -> NormEstimate:
    """Grid search of pi_p over m-tuples (m <= 2) in a domain of dimension <= 2."""
    g = g or GridSpec()
    p = as_exponent(p)
    M, a, b = T.entries, T.domain, T.codomain
    if T.d_in > 2 or m > 2 or m < 1:
        raise ValueError("brute_pi_p supports d_in <= 2 and m <= 2")
    if m == 1 or T.d_in == 1:
        # single vectors (or a 1-dimensional domain) reduce to the operator norm
        est = grid_op_norm(T, g)
        return NormEstimate(est.value, "lower", "brute-grid", upper=est.upper, witness=est.witness)
    R = g.resolution
    th = np.arange(R) * np.pi / R
    ph = np.linspace(0, np.pi / 2, R // 2 + 1)
    A1, A2, P = np.meshgrid(th, th, ph, indexing="ij")
    params = np.stack([A1.ravel(), A2.ravel(), P.ravel()], axis=1)
    dispatch = exact_norm(np.zeros((1, 2, 2)) + np.eye(2), p.dual, a) is not None
    inner = 0 if dispatch else R
    if len(params) * max(inner, 1) > g.cap:
        raise CapExceeded(f"{len(params) * max(inner, 1)} evaluations exceed cap {g.cap}")

    def tuples(prm):
        u1 = _sphere_points(prm[:, :1], a)
        u2 = _sphere_points(prm[:, 1:2], a)
        return np.stack([np.cos(prm[:, 2])[:, None] * u1, np.sin(prm[:, 2])[:, None] * u2], axis=2)

    def ratio(prm, R_in):
        X = tuples(prm)
        num = lp_norm(lp_norm(np.einsum("rd,kdm->krm", M, X), b, axis=1), p, axis=1)
        ex = exact_norm(X, p.dual, a)
        w = ex[0] if ex is not None else _weak_grid(X, a, p, R_in)
        return np.where(w > 0, num / np.where(w > 0, w, 1.0), 0.0)

    vals = ratio(params, inner)
    order = np.argsort(vals)[::-1][:4]
    best, best_prm = -1.0, params[order[0]]
    for i in order:
        v, x, _ = _refine(lambda z: ratio(z, 4 * R), params[i], np.pi / R, g.refinement_rounds, 5)
        if v > best:
            best, best_prm = v, x
    X = tuples(best_prm[None, :])
    if exact_norm(X, p.dual, a) is None:
        # divide by a certified upper value of the weak norm so the result stays a lower bound
        w = grid_op_norm(OperatorMat(X[0].T, a.dual, p), GridSpec(resolution=64 * R, cap=g.cap)).upper
        num = lp_norm(lp_norm(M @ X[0], b, axis=0), p)
        best = float(num / w) if w > 0 else 0.0
    return NormEstimate(max(best, 0.0), "lower", "brute-grid", witness=X[0])
