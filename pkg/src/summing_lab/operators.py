"""Dense operators between finite-dimensional l_p spaces and their induced norms.

``op_norm`` dispatches to a closed form or a finite exhaustion whenever one is
known, and otherwise brackets the a -> b norm between a multi-start sphere
ascent (lower) and a factorisation through l_1/l_2/l_inf (upper).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .core import (
    Budget,
    Exponent,
    NormEstimate,
    Vec,
    VecSeq,
    as_exponent,
    lp_norm,
    norming_vector,
)

logger = logging.getLogger(__name__)

SIGN_CAP = 16
POWER_TOL = 1e-10
SEARCH_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class OperatorMat:
    """Matrix of a map l_a^{d_in} -> l_b^{d_out}; ``entries`` has shape (d_out, d_in)."""

    entries: np.ndarray
    domain: Exponent
    codomain: Exponent

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2:
            raise ValueError(f"entries must be 2-D, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "domain", as_exponent(self.domain))
        object.__setattr__(self, "codomain", as_exponent(self.codomain))

    @property
    def d_in(self) -> int:
        return self.entries.shape[1]

    @property
    def d_out(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other: "OperatorMat") -> "OperatorMat":
        return compose(self, other)

    def scaled(self, lam: float) -> "OperatorMat":
        return OperatorMat(lam * self.entries, self.domain, self.codomain)

    def to_dict(self) -> dict:
        return {
            "kind": "operator",
            "rows": self.d_out,
            "cols": self.d_in,
            "domain": str(self.domain),
            "codomain": str(self.codomain),
            "entries": self.entries.tolist(),
        }


def compose(S: OperatorMat, T: OperatorMat) -> OperatorMat:
    """S o T."""
    if S.d_in != T.d_out or S.domain != T.codomain:
        raise ValueError("codomain of T does not match domain of S")
    return OperatorMat(S.entries @ T.entries, T.domain, S.codomain)


def make_Ex(x: VecSeq, p) -> OperatorMat:
    """E_x: l_{p'}^N -> X, alpha -> sum alpha_k x_k (l_{p'} is l_inf, i.e. c_0, for p = 1)."""
    p = as_exponent(p)
    if p.is_inf:
        raise ValueError("E_x needs finite p")
    if not x.is_finite:
        raise ValueError("E_x needs a finite sequence; truncate or materialize the tail first")
    return OperatorMat(x.head.T, p.dual, x.q)


def make_Ef_star(f: VecSeq, p) -> OperatorMat:
    """(E_f)_*: X -> l_p^N, x -> <f_n(x)>, for functionals f_n stored in the dual ambient."""
    p = as_exponent(p)
    if not f.is_finite:
        raise ValueError("(E_f)_* needs a finite family")
    return OperatorMat(f.head, f.q.dual, p)


def adjoint(T: OperatorMat) -> OperatorMat:
    return OperatorMat(T.entries.T, T.codomain.dual, T.domain.dual)


def apply(T: OperatorMat, v: Vec) -> Vec:
    if v.dim != T.d_in:
        raise ValueError(f"vector of dimension {v.dim} is not in the {T.d_in}-dimensional domain")
    if v.q != T.domain:
        raise ValueError("vector ambient exponent differs from the operator's domain")
    return Vec(T.entries @ v.coords, T.codomain)


# ----------------------------------------------------------------------------
# closed forms


def identity_norm(n: int, s, t) -> float:
    """||I: l_s^n -> l_t^n|| = n^max(0, 1/t - 1/s)."""
    s, t = as_exponent(s), as_exponent(t)
    e = t.inv - s.inv
    return float(n) ** float(e) if e > 0 and n > 0 else 1.0


def diagonal_norm(d, a, b) -> float:
    """Norm of diag(d): l_a -> l_b (Hölder: max|d| if a <= b, else ||d||_u, 1/u = 1/b - 1/a)."""
    a, b = as_exponent(a), as_exponent(b)
    d = np.asarray(d, dtype=float)
    if d.size == 0:
        return 0.0
    if a <= b:
        return float(np.abs(d).max())
    u = 1 / (b.inv - a.inv)
    return float(lp_norm(d, Exponent(u)))


@lru_cache(maxsize=None)
def sign_vectors(k: int) -> np.ndarray:
    """All vectors in {-1, 1}^k with first entry +1, shape (2^(k-1), k)."""
    if k == 0:
        return np.zeros((1, 0))
    rest = np.array(list(product((1.0, -1.0), repeat=k - 1)), dtype=float).reshape(2 ** (k - 1), k - 1)
    out = np.hstack([np.ones((rest.shape[0], 1)), rest])
    out.setflags(write=False)
    return out


def _monomial(M: np.ndarray):
    """(rows, cols, values) when every row and column has at most one nonzero."""
    nz = M != 0
    if (nz.sum(axis=0) > 1).any() or (nz.sum(axis=1) > 1).any():
        return None
    rows, cols = np.nonzero(nz)
    return rows, cols, M[rows, cols]


def power_iteration(M: np.ndarray, tol: float = POWER_TOL, max_iter: int = 100_000):
    """Largest singular value of M by power iteration on M^T M.

    Stops when the Rayleigh quotient changes by less than ``tol`` relative.
    Returns (sigma, unit right singular vector).
    """
    A = M.T @ M
    v = np.random.default_rng(0).standard_normal(A.shape[0])
    v /= np.linalg.norm(v)
    lam_old = 0.0
    for it in range(max_iter):
        w = A @ v
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        v = w / nw
        if abs(lam - lam_old) <= tol * abs(lam):
            break
        lam_old = lam
    else:
        logger.warning("power iteration hit max_iter=%d", max_iter)
    return float(np.linalg.norm(M @ v)), v


def exact_norm(M, a, b):
    """Exact ||M: l_a -> l_b|| for stacks of matrices (..., r, c), or None without a closed form.

    Returns ``(values, method)``. The 2 -> 2 path here uses LAPACK singular
    values; :func:`op_norm` runs power iteration instead.
    """
    M = np.asarray(M, dtype=float)
    a, b = as_exponent(a), as_exponent(b)
    r, c = M.shape[-2:]
    if r == 0 or c == 0:
        return np.zeros(M.shape[:-2]), "empty"
    if c == 1:
        return lp_norm(M[..., :, 0], b), "single-column"
    if r == 1:
        return lp_norm(M[..., 0, :], a.dual), "single-row"
    if a.value == 1:
        return lp_norm(M, b, axis=-2).max(axis=-1), "max-column"
    if b.is_inf:
        return lp_norm(M, a.dual, axis=-1).max(axis=-1), "max-row"
    if a.value == 2 and b.value == 2:
        return np.linalg.svd(M, compute_uv=False)[..., 0], "svd"
    if M.ndim == 2:
        mono = _monomial(M)
        if mono is not None:
            return diagonal_norm(mono[2], a, b), "monomial"
    if a.is_inf and c <= SIGN_CAP:
        Y = M @ sign_vectors(c).T
        return lp_norm(Y, b, axis=-2).max(axis=-1), "sign-vectors"
    if b.value == 1 and r <= SIGN_CAP:
        Z = np.swapaxes(M, -1, -2) @ sign_vectors(r).T
        return lp_norm(Z, a.dual, axis=-2).max(axis=-1), "adjoint-sign-vectors"
    return None


def upper_norm(M, a, b):
    """Upper bound min over r, s of ||I: l_a -> l_r|| ||M: l_r -> l_s|| ||I: l_s -> l_b||.

    Only routes whose middle factor has an exact dispatch are used. Returns
    ``(values, route)`` where route names the best route for 2-D input.
    """
    M = np.asarray(M, dtype=float)
    a, b = as_exponent(a), as_exponent(b)
    r, c = M.shape[-2:]
    mids_in = {a, Exponent(1), Exponent(2), as_exponent("inf")}
    mids_out = {b, Exponent(1), Exponent(2), as_exponent("inf")}
    best = None
    label = None
    for ri in sorted(mids_in):
        for so in sorted(mids_out):
            if ri == a and so == b:
                continue
            ex = exact_norm(M, ri, so)
            if ex is None:
                continue
            val = identity_norm(c, a, ri) * np.asarray(ex[0]) * identity_norm(r, so, b)
            if best is None:
                best, label = val, f"{a}->{ri}->{so}->{b}"
            else:
                if np.ndim(val) == 0 and val < best:
                    label = f"{a}->{ri}->{so}->{b}"
                best = np.minimum(best, val)
    return best, label


def norm_bound(M, a, b):
    """(value, is_exact): exact norm when dispatchable, else the factorisation upper bound."""
    ex = exact_norm(M, a, b)
    if ex is not None:
        return ex[0], True
    return upper_norm(M, a, b)[0], False


def _exact_with_argmax(M: np.ndarray, a: Exponent, b: Exponent):
    """(value, method, maximiser on the unit sphere of l_a) or None."""
    r, c = M.shape
    if c == 0 or r == 0 or not M.any():
        alpha = np.zeros(c)
        if c:
            alpha[0] = 1.0
        return 0.0, "zero", alpha
    if c == 1:
        return float(lp_norm(M[:, 0], b)), "single-column", np.ones(1)
    if r == 1:
        return float(lp_norm(M[0], a.dual)), "single-row", norming_vector(M[0], a.dual)
    if a.value == 1:
        norms = lp_norm(M, b, axis=0)
        j = int(np.argmax(norms))
        alpha = np.zeros(c)
        alpha[j] = 1.0
        return float(norms[j]), "max-column", alpha
    if b.is_inf:
        norms = lp_norm(M, a.dual, axis=1)
        i = int(np.argmax(norms))
        return float(norms[i]), "max-row", norming_vector(M[i], a.dual)
    if a.value == 2 and b.value == 2:
        sigma, v = power_iteration(M)
        return sigma, "power-iteration", v
    mono = _monomial(M)
    if mono is not None:
        rows, cols, vals = mono
        alpha = np.zeros(c)
        if a <= b:
            alpha[cols[np.argmax(np.abs(vals))]] = 1.0
        elif a.is_inf:
            alpha[cols] = 1.0
        else:
            u = 1 / (b.inv - a.inv)
            w = np.abs(vals) ** float(u / a.value)
            alpha[cols] = w / lp_norm(w, a)
        return diagonal_norm(vals, a, b), "monomial", alpha
    if a.is_inf and c <= SIGN_CAP:
        S = sign_vectors(c)
        vals = lp_norm(M @ S.T, b, axis=0)
        k = int(np.argmax(vals))
        return float(vals[k]), "sign-vectors", S[k].copy()
    if b.value == 1 and r <= SIGN_CAP:
        S = sign_vectors(r)
        Z = M.T @ S.T
        vals = lp_norm(Z, a.dual, axis=0)
        k = int(np.argmax(vals))
        return float(vals[k]), "adjoint-sign-vectors", norming_vector(Z[:, k], a.dual)
    return None


# ----------------------------------------------------------------------------
# sphere search


def _dual_map_rows(Y: np.ndarray, r: Exponent) -> np.ndarray:
    """Row-wise gradient of ||y||_r (the normalised duality map)."""
    if r.is_inf:
        out = np.zeros_like(Y)
        idx = np.argmax(np.abs(Y), axis=1)
        rows = np.arange(Y.shape[0])
        out[rows, idx] = np.sign(Y[rows, idx])
        return out
    if r.value == 1:
        return np.sign(Y)
    n = lp_norm(Y, r, axis=1)[:, None]
    n = np.where(n > 0, n, 1.0)
    return np.sign(Y) * (np.abs(Y) / n) ** (float(r) - 1)


def _normalize_rows(X: np.ndarray, a: Exponent) -> np.ndarray:
    n = lp_norm(X, a, axis=1)[:, None]
    return X / np.where(n > 0, n, 1.0)


def sphere_ascent(M: np.ndarray, a, b, X0: np.ndarray, iters: int, armijo: float = 1e-4):
    """Projected-gradient ascent of ||M x||_b on the unit sphere of l_a, all starts in lockstep.

    Each row of ``X0`` is one start. Steps follow the gradient projected onto
    the tangent space of the sphere, with Armijo backtracking, and are
    renormalised after every step. Returns (values, points) per start.
    """
    a, b = as_exponent(a), as_exponent(b)
    X = _normalize_rows(np.array(X0, dtype=float), a)
    S = X.shape[0]

    def F(Z):
        return lp_norm(Z @ M.T, b, axis=1)

    f = F(X)
    t = np.full(S, 1.0 / (np.linalg.norm(M) + 1e-300))
    done = np.zeros(S, dtype=bool)
    for _ in range(iters):
        G = _dual_map_rows(X @ M.T, b) @ M
        n = _dual_map_rows(X, a)
        nn = (n * n).sum(axis=1, keepdims=True)
        V = G - ((G * n).sum(axis=1, keepdims=True) / np.where(nn > 0, nn, 1.0)) * n
        vv = (V * V).sum(axis=1)
        done |= vv <= (1e-14 * np.maximum(f, 1e-300)) ** 2
        if done.all():
            break
        t = np.where(done, t, 2 * t)
        settled = done.copy()
        f_prev = f.copy()
        for _ in range(60):
            trial = _normalize_rows(X + t[:, None] * V, a)
            ft = F(trial)
            ok = ~settled & (ft >= f + armijo * t * vv)
            X[ok] = trial[ok]
            f[ok] = ft[ok]
            settled |= ok
            if settled.all():
                break
            t = np.where(settled, t, 0.5 * t)
        # backtracking exhausted or no measurable progress: stationary
        done |= ~settled | (f - f_prev <= 1e-15 * f_prev)
    return f, X


def _search_starts(M: np.ndarray, a: Exponent, b: Exponent, starts: int, seed: int) -> np.ndarray:
    """Deterministic seeds (basis vectors, route maximisers) then per-start random draws."""
    r, c = M.shape
    seeds = []
    for route in ((Exponent(1), b), (a, as_exponent("inf")), (Exponent(2), Exponent(2))):
        ex = _exact_with_argmax(M, *route) if route != (a, b) else None
        if ex is not None:
            seeds.append(ex[2])
    rows = []
    for i in range(starts):
        if i < len(seeds):
            rows.append(seeds[i])
        else:
            rows.append(np.random.default_rng([seed, i]).standard_normal(c))
    return np.vstack(rows)


def op_norm(T: OperatorMat, budget: Budget | None = None, seed: int = 0) -> NormEstimate:
    """||T: l_a -> l_b||, exact when a closed form applies, else a search bracket.

    The search result has kind="lower" (best sphere-ascent value) with the
    factorisation bound in ``upper``; ``witness`` holds the maximising vector.
    """
    M = T.entries
    a, b = T.domain, T.codomain
    ex = _exact_with_argmax(M, a, b)
    if ex is not None:
        val, method, alpha = ex
        tol = POWER_TOL if method == "power-iteration" else 1e-12
        return NormEstimate(val, "exact", method, tolerance=tol, witness=alpha)
    budget = budget or Budget()
    X0 = _search_starts(M, a, b, budget.starts, seed)
    vals, X = sphere_ascent(M, a, b, X0, budget.iters)
    k = int(np.argmax(vals))
    up, _ = upper_norm(M, a, b)
    lower = float(vals[k])
    return NormEstimate(
        lower,
        "lower",
        "sphere-ascent",
        seed=seed,
        tolerance=SEARCH_TOL,
        budget=budget,
        upper=max(float(up), lower),
        witness=X[k],
    )


def op_norm_upper(T: OperatorMat) -> NormEstimate:
    ex = exact_norm(T.entries, T.domain, T.codomain)
    if ex is not None:
        return NormEstimate(float(ex[0]), "exact", ex[1])
    val, route = upper_norm(T.entries, T.domain, T.codomain)
    return NormEstimate(float(val), "upper", f"factor:{route}")


def weak_norm(x: VecSeq, p, budget: Budget | None = None, seed: int = 0) -> NormEstimate:
    """||x||_p^w = ||E_x: l_{p'} -> X||."""
    return op_norm(make_Ex(x, p), budget, seed)


def weak_star_norm(f: VecSeq, p, budget: Budget | None = None, seed: int = 0) -> NormEstimate:
    """||f||_p^{w*} = ||(E_f)_*: X -> l_p||."""
    return op_norm(make_Ef_star(f, p), budget, seed)
