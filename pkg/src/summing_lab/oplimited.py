"""Operator p-summability, p-limited certificates, and the sequentially p-limited norm lt_p."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from .core import (
    DIVERGES,
    Budget,
    Exponent,
    NormEstimate,
    VecSeq,
    as_exponent,
    lp_norm,
    norming_vector,
    strong_norm,
    tail_sum_bounds,
)
from .operators import OperatorMat, compose, identity_norm, make_Ex, norm_bound, op_norm
from .summing import pi_p_dual, pi_p_lower
from .trend import TrendSeries, doubling_truncations


@dataclass(frozen=True, eq=False)
class Certificate:
    """Dominating sequence alpha with |f_n(z)| <= alpha_n on the certified set, plus a bound for the tail rows."""

    alphas: np.ndarray
    tail_bound: float
    p: Exponent

    def __post_init__(self):
        object.__setattr__(self, "alphas", np.asarray(self.alphas, dtype=float))
        object.__setattr__(self, "p", as_exponent(self.p))
        if (self.alphas < 0).any() or self.tail_bound < 0:
            raise ValueError("certificate entries must be nonnegative")

    @property
    def norm(self) -> float:
        """l_p norm of the whole certificate: the head entries combined with the tail bound."""
        return float(lp_norm(np.append(self.alphas, self.tail_bound), self.p))

    def to_dict(self) -> dict:
        return {"alphas": [float(a) for a in self.alphas], "tail_bound": float(self.tail_bound),
                "p": str(self.p), "norm": self.norm}


@dataclass(eq=False)
class SummabilityReport:
    double_array: np.ndarray
    row_p_norms: np.ndarray
    aggregate: float
    p: Exponent
    trend: TrendSeries
    opsum_norm: NormEstimate | None = field(default=None)

    @property
    def verdict(self) -> str:
        if self.aggregate == 0 or self.trend.verdict == "bounded":
            return "summable-at-truncation"
        return "diverging-trend"

    @property
    def slope(self) -> float:
        return self.trend.fitted_slope

    def to_dict(self) -> dict:
        out = {
            "aggregate": float(self.aggregate),
            "row_p_norms": [float(v) for v in self.row_p_norms],
            "verdict": self.verdict,
            "trend": self.trend.to_dict(),
            "shape": list(self.double_array.shape),
        }
        if self.opsum_norm is not None:
            out["opsum_norm"] = self.opsum_norm.to_dict()
        return out


def _finite_pair(x: VecSeq, f: VecSeq, n_total: int):
    if not x.is_finite:
        x = x.materialize(max(n_total, x.n))
    if not f.is_finite:
        f = f.materialize(max(n_total, f.n))
    d = max(x.dim, f.dim)
    X = np.zeros((x.n, d))
    X[:, : x.dim] = x.head
    F = np.zeros((f.n, d))
    F[:, : f.dim] = f.head
    return X, F


def _check_pairing(x: VecSeq, f: VecSeq):
    if f.q != x.q.dual:
        raise ValueError(f"functionals live in l_{f.q} but the dual of l_{x.q} is l_{x.q.dual}")
    if x.is_finite and f.is_finite and x.dim != f.dim:
        raise ValueError(f"dimension mismatch: vectors in R^{x.dim}, functionals in R^{f.dim}")


def opsum_check(x: VecSeq, f: VecSeq, p, n_total: int = 1024) -> SummabilityReport:
    """Pair every functional f_n with every vector x_k and measure the l_p(l_p) size of the array.

    Sequences with tails are materialised to ``n_total`` terms. The verdict
    comes from the growth of the aggregate over square doubling truncations.
    """
    p = as_exponent(p)
    _check_pairing(x, f)
    X, F = _finite_pair(x, f, n_total)
    D = F @ X.T
    rows = lp_norm(D, p, axis=1)
    agg = float(lp_norm(rows, p))
    n = max(D.shape)
    ns = doubling_truncations(n) if n else [1]
    aggs = [float(lp_norm(lp_norm(D[:k, :k], p, axis=1), p)) for k in ns]
    return SummabilityReport(D, rows, agg, p, TrendSeries(ns, aggs, label="aggregate"))


def _weak_upper(x: VecSeq, p: Exponent) -> float:
    if x.n == 0:
        return 0.0
    return float(norm_bound(make_Ex(x, p).entries, p.dual, x.q)[0])


def limited_certificate(x: VecSeq, f: VecSeq, p) -> Certificate | None:
    """Certificate alpha_n = (sum_k |f_n(x_k)|^p)^(1/p) for the set E_x(unit ball of l_{p'}).

    By Hoelder, |f_n(sum_k beta_k x_k)| <= ||beta||_{p'} alpha_n. Functionals in
    the tail model of ``f`` are covered by ``tail_bound``, the l_p norm of their
    norms times an upper value of ||x||_p^w. Returns None when there is no
    certificate: the rows show a diverging trend or the tail is not p-summable.
    """
    p = as_exponent(p)
    if not x.is_finite:
        raise ValueError("the generating sequence x must be finite")
    head = VecSeq(f.head, f.q)
    rep = opsum_check(x, head, p)
    if rep.verdict == "diverging-trend":
        return None
    tail = 0.0
    if not f.is_finite:
        tb = tail_sum_bounds(f.tail, p, f.n)
        if tb == DIVERGES:
            return None
        tail = _weak_upper(x, p) * tb[1] ** (1.0 / float(p))
    return Certificate(rep.row_p_norms, tail, p)


def certificate_combine(a: Certificate, b: Certificate, mode: str):
    """Certificates for A u B ("union"), A + B ("sum"), or whether ``a`` is dominated by ``b`` ("subset-check")."""
    if a.p != b.p:
        raise ValueError(f"certificates use different exponents {a.p} and {b.p}")
    n = max(len(a.alphas), len(b.alphas))
    x = np.pad(a.alphas, (0, n - len(a.alphas)))
    y = np.pad(b.alphas, (0, n - len(b.alphas)))
    if mode == "union":
        return Certificate(np.maximum(x, y), max(a.tail_bound, b.tail_bound) if a.p.is_inf
                           else float(lp_norm(np.array([a.tail_bound, b.tail_bound]), a.p)), a.p)
    if mode == "sum":
        return Certificate(x + y, a.tail_bound + b.tail_bound, a.p)
    if mode == "subset-check":
        return bool(np.all(x <= y) and a.tail_bound <= b.tail_bound)
    raise ValueError(f"unknown mode {mode!r}")


def image_sequence(T: OperatorMat, x: VecSeq) -> VecSeq:
    """The sequence (T x_n)."""
    if x.q != T.domain or x.dim != T.d_in:
        raise ValueError("x does not live in the domain of T")
    return VecSeq(x.head @ T.entries.T, T.codomain)


def certificate_pushforward(x: VecSeq, g: VecSeq, T: OperatorMat, p) -> Certificate | None:
    """Certificate for T(E_x(ball)) against the functionals g, computed via the pulled-back g_n o T."""
    if x.q != T.domain or x.dim != T.d_in:
        raise ValueError("x does not live in the domain of T")
    if g.q != T.codomain.dual or g.dim != T.d_out:
        raise ValueError("g does not live in the dual of the codomain of T")
    if not g.is_finite:
        raise ValueError("pullback needs a finite functional family")
    pulled = VecSeq(g.head @ T.entries, T.domain.dual)
    return limited_certificate(x, pulled, p)


def default_probes(dim: int, q: Exponent, p: Exponent, families: int = 4, seed: int = 0) -> list[VecSeq]:
    """Functional families in l_{q'} with weak*-p norm at most 1.

    The first is the dual basis scaled by the inclusion constant; the rest are
    random square families from per-family seed streams, each divided by the
    exact or upper value of ||(E_f)_*: l_q -> l_p||.
    """
    out = []
    scale = identity_norm(dim, q, p)
    out.append(VecSeq(np.eye(dim) / scale if scale > 0 else np.eye(dim), q.dual))
    for i in range(families):
        F = np.random.default_rng([seed, i]).standard_normal((dim, dim))
        nb = float(norm_bound(F, q, p)[0])
        out.append(VecSeq(F / nb, q.dual))
    return out


def seq_limited_check(T: OperatorMat, x: VecSeq, p, probes: list[VecSeq] | None = None, seed: int = 0,
                      with_norm: bool = False, budget: Budget | None = None) -> SummabilityReport:
    """Test whether (T x_n) behaves as an operator p-summable sequence against a probe family.

    Returns the worst report over the probes: any diverging trend first, then
    the largest aggregate. With ``with_norm`` the report also carries
    opsum_norm of (T x_n).
    """
    p = as_exponent(p)
    Tx = image_sequence(T, x)
    probes = probes if probes is not None else default_probes(T.d_out, T.codomain, p, seed=seed)
    reports = [opsum_check(Tx, f, p) for f in probes]
    worst = max(reports, key=lambda r: (r.verdict == "diverging-trend", r.aggregate))
    if with_norm:
        worst.opsum_norm = opsum_norm(Tx, p, budget, seed)
    return worst


def known_pi_p(T: OperatorMat, p) -> float | None:
    """pi_p(T) where it has a closed form, else None.

    Between l_2 spaces pi_2 is the Frobenius norm. From l_inf to l_1 pi_1 is the
    sum of absolute entries (every such matrix is E_alpha for an l_1-valued
    alpha, and pi_1(E_alpha) is the strong l_1 norm of alpha).
    """
    p = as_exponent(p)
    a, b = T.domain, T.codomain
    if p.value == 2 and a.value == 2 and b.value == 2:
        return float(np.linalg.norm(T.entries))
    if p.value == 1 and a.is_inf and b.value == 1:
        return float(np.abs(T.entries).sum())
    return None


def opsum_norm(x: VecSeq, p, budget: Budget | None = None, seed: int = 0) -> NormEstimate:
    """Operator p-summable size of x: the dual-ideal norm pi_p(E_x^*)."""
    p = as_exponent(p)
    if not x.is_finite:
        raise ValueError("x must be finite")
    E = make_Ex(x, p)
    adj = OperatorMat(E.entries.T, E.codomain.dual, E.domain.dual)
    exact = known_pi_p(adj, p)
    if exact is not None:
        return NormEstimate(exact, "exact", "closed-form-pi_p")
    return pi_p_dual(E, p, budget=budget, seed=seed)


def _pi_p_inner(ST: OperatorMat, p: Exponent, budget: Budget, seed: int) -> float:
    known = known_pi_p(ST, p)
    if known is not None:
        return known
    return pi_p_lower(ST, p, budget=budget, seed=seed).value


def _normalized(S: np.ndarray, b: Exponent, p: Exponent) -> np.ndarray:
    nb = float(norm_bound(S, b, p)[0])
    return S / nb if nb > 0 else S


def lt_p_lower(T: OperatorMat, p, budget: Budget | None = None, inner_budget: Budget | None = None,
               seed: int = 0, d_target: int | None = None) -> NormEstimate:
    """Lower estimate of lt_p(T) = sup { pi_p(S T) : ||S: Y -> l_p|| <= 1 }.

    Outer hill-climb over S (normalised by its exact or upper-bracket norm), with
    pi_p(S T) from a closed form when one exists and the witness search
    otherwise. Starts: the rank-one S = e_1 (x) phi with phi norming T alpha for
    the operator-norm maximiser alpha (this alone reaches ||T||), the
    normalised identity, then random matrices from per-start seed streams.
    """
    p = as_exponent(p)
    if p.is_inf:
        raise ValueError("lt_p is only estimated for finite p")
    budget = budget or Budget(3, 4)
    inner_budget = inner_budget or Budget(8, 40)
    M, b = T.entries, T.codomain
    dt = d_target or T.d_out
    if not M.any():
        return NormEstimate(0.0, "lower", "outer-search", seed=seed, budget=budget)
    on = op_norm(T, inner_budget, seed)
    phi = norming_vector(M @ np.asarray(on.witness, dtype=float), b)
    rank_one = np.zeros((dt, T.d_out))
    rank_one[0] = phi
    ident = np.zeros((dt, T.d_out))
    k = min(dt, T.d_out)
    ident[:k, :k] = np.eye(k)
    warm = [rank_one, ident]

    def run(i):
        rng = np.random.default_rng([seed, 1_000_003, i])
        S = warm[i] if i < len(warm) else rng.standard_normal((dt, T.d_out))
        noise = rng.standard_normal((budget.iters, dt, T.d_out))
        S = _normalized(S, b, p)

        def value(S):
            return _pi_p_inner(compose(OperatorMat(S, b, p), T), p, inner_budget, seed)

        best = value(S)
        sigma = 0.3
        for it in range(budget.iters):
            rms = float(np.sqrt((S**2).mean())) or 1.0
            trial = _normalized(S + sigma * rms * noise[it], b, p)
            v = value(trial)
            if v > best:
                best, S = v, trial
                sigma = min(2.0, sigma * 1.5)
            else:
                sigma = max(1e-6, sigma * 0.85)
        return best, S

    results = parallel_map(run, range(budget.starts))
    i = int(np.argmax([r[0] for r in results]))
    return NormEstimate(float(results[i][0]), "lower", "outer-search", seed=seed, tolerance=1e-4,
                        budget=budget, witness=results[i][1])


@dataclass(eq=False)
class ChainReport:
    weak: NormEstimate
    lt: NormEstimate
    strong: NormEstimate
    tol: float
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"weak": self.weak.to_dict(), "lt": self.lt.to_dict(), "strong": self.strong.to_dict(),
                "tol": self.tol, "violations": list(self.violations)}


def chain_check(x: VecSeq, p, tol: float = 1e-3, budget: Budget | None = None,
                inner_budget: Budget | None = None, seed: int = 0) -> ChainReport:
    """Compute weak norm, lt_p(E_x) lower estimate and strong norm of x and record any broken inequality.

    Checked: weak <= strong, lt <= strong + tol and, when the weak norm is
    exact, lt >= weak - tol.
    """
    p = as_exponent(p)
    strong = strong_norm(x, p)
    if x.n == 0 or not x.head.any():
        zero = NormEstimate(0.0, "exact", "zero")
        return ChainReport(zero, NormEstimate(0.0, "lower", "zero"), zero, tol, [])
    E = make_Ex(x, p)
    weak = op_norm(E, inner_budget, seed)
    lt = lt_p_lower(E, p, budget, inner_budget, seed)
    violations = []
    s = strong.value
    if weak.value > s * (1 + 1e-12) + 1e-15:
        violations.append(f"weak {weak.value!r} > strong {s!r}")
    if lt.value > s + tol:
        violations.append(f"lt {lt.value!r} > strong {s!r} + {tol}")
    if weak.is_exact and lt.value < weak.value - tol:
        violations.append(f"lt {lt.value!r} < weak {weak.value!r} - {tol}")
    return ChainReport(weak, lt, strong, tol, violations)
