"""Explicit sequences showing where pairings of weakly summable families fail to be summable.

Every construction uses diagonal (scaled-basis) sequences with power-log
coefficients n**-gamma (1 + ln n)**-kappa. Membership in l_t is certified by
the integral test in :func:`core.tail_sum_bounds`; divergence is certified by
the same analytic rule and corroborated by direct partial sums and a fitted
growth exponent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import DIVERGES, INF, Exponent, TailModel, as_exponent, lp_norm, tail_sum_bounds
from .operators import diagonal_norm, identity_norm
from .trend import TrendSeries, doubling_truncations


ROUNDING = 1e-12


class HypothesisViolation(ValueError):
    """Parameters outside the range where the construction applies."""


@dataclass(frozen=True)
class MembershipCertificate:
    """Integral-test verdict on sum_n coef(n)**exponent for a power-log model."""

    name: str
    model: TailModel
    exponent: Exponent
    bounds: tuple[float, float] | None

    @property
    def converges(self) -> bool:
        return self.bounds is not None

    def to_dict(self) -> dict:
        out = {"name": self.name, "model": self.model.to_dict(), "exponent": str(self.exponent),
               "converges": self.converges}
        if self.bounds is not None:
            out["sum_bounds"] = [float(self.bounds[0]), float(self.bounds[1])]
        return out


def certify(name: str, model: TailModel, exponent) -> MembershipCertificate:
    """Bracket sum_{n>=1} coef(n)**exponent (first term plus certified tail), or record divergence."""
    e = as_exponent(exponent)
    tb = tail_sum_bounds(model, e, 1)
    if tb == DIVERGES:
        return MembershipCertificate(name, model, e, None)
    first = float(model.coef(1.0)) ** float(e)
    return MembershipCertificate(name, model, e, (first + tb[0], first + tb[1]))


@dataclass
class CaseResult:
    name: str
    params: dict
    trend: TrendSeries
    certificates: list[MembershipCertificate] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return self.trend.verdict

    def to_dict(self) -> dict:
        return {"name": self.name, "params": self.params, "trend": self.trend.to_dict(),
                "verdict": self.verdict, "certificates": [c.to_dict() for c in self.certificates],
                "extra": self.extra}


def _recip(x: Fraction):
    return INF if x == 0 else 1 / x


def _partial_sums(term, ns, chunk: int = 1 << 20) -> np.ndarray:
    """Partial sums sum_{n <= N} term(n) for each N in sorted ``ns``, computed in chunks."""
    ns = np.asarray(ns, dtype=np.int64)
    out = np.zeros(len(ns))
    total, lo, j = 0.0, 1, 0
    nmax = int(ns.max()) if len(ns) else 0
    while lo <= nmax:
        hi = min(lo + chunk - 1, nmax)
        c = np.cumsum(term(np.arange(lo, hi + 1, dtype=float))) + total
        while j < len(ns) and ns[j] <= hi:
            out[j] = c[ns[j] - lo]
            j += 1
        total = float(c[-1])
        lo = hi + 1
    return out


def kronecker_series(r, n_max: int) -> TrendSeries:
    """l_r(l_r) size of the N x N array <e_n, e_k> = delta_nk at doubling truncations.

    Only the diagonal pairing is nonzero, so each row contributes its single
    entry; aggregate(N) = N**(1/r).
    """
    r = as_exponent(r)
    ns = doubling_truncations(n_max)
    vals = []
    for N in ns:
        rows = lp_norm(np.ones((N, 1)), r, axis=1)  # row n of the array: the one entry <e_n, e_n> = 1
        vals.append(float(lp_norm(rows, r)))
    return TrendSeries(ns, vals, label=f"kronecker aggregate, r={r}")


def basis_weak_norm(N: int, r, p) -> float:
    """Weak-r norm of (e_1, ..., e_N) in l_p^N, i.e. ||I: l_{r'}^N -> l_p^N||."""
    r, p = as_exponent(r), as_exponent(p)
    return identity_norm(N, r.dual, p)


def case1_kronecker(p, r, n_max: int = 2**14) -> CaseResult:
    """Unit vectors against coordinate functionals: both families weakly r-bounded, pairings not r-summable.

    Needs r >= max(p, p'); then the weak-r norms of the basis of l_p and of
    l_{p'} equal 1 at every truncation while the pairing array grows like N**(1/r).
    """
    p, r = as_exponent(p), as_exponent(r)
    if r < max(p, p.dual):
        raise HypothesisViolation(f"needs r >= max(p, p') = {max(p, p.dual)}, got r = {r}")
    if n_max < 4:
        raise HypothesisViolation("n_max must be >= 4")
    trend = kronecker_series(r, n_max)
    weak_x = [basis_weak_norm(N, r, p) for N in trend.truncations]
    weak_f = [basis_weak_norm(N, r, p.dual) for N in trend.truncations]
    return CaseResult("case1", {"p": str(p), "r": str(r), "nmax": n_max}, trend,
                      extra={"weak_r_basis": weak_x, "weak_r_dual_basis": weak_f,
                             "bounded": all(w == 1.0 for w in weak_x + weak_f)})


@dataclass
class HolderReport:
    t: Exponent
    truncations: list[int]
    weak_norms: list[float]
    t_norm_bracket: tuple[float, float]
    violations: int

    def to_dict(self) -> dict:
        return {"t": str(self.t), "truncations": self.truncations, "weak_norms": self.weak_norms,
                "t_norm_bracket": list(self.t_norm_bracket), "violations": self.violations}


def holder_embedding_check(alpha, s, p, ns=(10, 100, 1000, 10_000)) -> HolderReport:
    """Check ||<alpha_n e_n>_{n<=N}||_s^w in l_p <= ||alpha||_t with 1/t = 1/s - 1/p'.

    ``alpha`` is a power-log TailModel (coefficients from n = 1) or a finite
    array. The weak-s norm of a diagonal family is the l_{s'} -> l_p norm of a
    diagonal matrix, which has a closed form. The right side is the lower end
    of its certified bracket, so a reported pass is unconditional.
    """
    s, p = as_exponent(s), as_exponent(p)
    inv_t = s.inv - p.dual.inv
    if s.value < 1 or inv_t < 0:
        raise HypothesisViolation(f"needs 1 <= s <= p' = {p.dual}")
    t = as_exponent("inf") if inv_t == 0 else as_exponent(1 / inv_t)
    ns = sorted(int(n) for n in ns)
    if isinstance(alpha, TailModel):
        coefs = alpha.coef(np.arange(1, ns[-1] + 1, dtype=float))
        if t.is_inf:
            # coefficients decrease in n, so the sup is the first one
            lo = hi = 0.0 if alpha.is_none else float(alpha.coef(1.0))
        else:
            head = float(np.sum(coefs ** float(t)))
            tb = tail_sum_bounds(alpha, t, ns[-1])
            if tb == DIVERGES:
                raise HypothesisViolation(f"alpha is not in l_{t}")
            lo = (head + tb[0]) ** (1 / float(t))
            hi = (head + tb[1]) ** (1 / float(t))
    else:
        coefs = np.asarray(alpha, dtype=float)
        lo = hi = float(lp_norm(coefs, t))
    weak = [float(diagonal_norm(coefs[:N], s.dual, p)) for N in ns]
    # both sides can agree to the last bit once the t-tail is negligible; allow float rounding only
    violations = sum(w > lo * (1 + ROUNDING) for w in weak)
    return HolderReport(t, ns, weak, (lo, hi), violations)


def _power_log(inv_t: Fraction) -> TailModel:
    return TailModel.power_log(1.0, inv_t, 2 * inv_t)


def case2_construct(p, r, n_max: int = 10**6) -> CaseResult:
    """Weakly r-summable scaled bases in l_p and l_{p'} whose pairings are not r-summable, for 1 < r < min(p, p').

    With 1/t1 = 1/r - 1/p' and 1/t2 = 1/r - 1/p, alpha in l_{t1} and beta in
    l_{t2} are power-log sequences whose product has r-th power exponent
    2 - r < 1, so sum (alpha_n beta_n)^r diverges; partial sums grow like
    N**(r - 1) up to log factors.
    """
    p, r = as_exponent(p), as_exponent(r)
    if not (1 < r.value and r < p and r < p.dual):
        raise HypothesisViolation(f"needs 1 < r < min(p, p') = {min(p, p.dual)}, got r = {r}")
    inv_t1 = r.inv - p.dual.inv
    inv_t2 = r.inv - p.inv
    alpha, beta = _power_log(inv_t1), _power_log(inv_t2)
    t1, t2 = as_exponent(_recip(inv_t1)), as_exponent(_recip(inv_t2))
    product = TailModel.power_log(1.0, inv_t1 + inv_t2, 2 * (inv_t1 + inv_t2))
    rf = float(r)
    ns = doubling_truncations(n_max)
    sums = _partial_sums(lambda n: (alpha.coef(n) * beta.coef(n)) ** rf, ns)
    trend = TrendSeries(ns, list(sums), label="sum (alpha_n beta_n)^r")
    certs = [certify("alpha in l_t1", alpha, t1), certify("beta in l_t2", beta, t2),
             certify("alpha*beta in l_r", product, r)]
    return CaseResult("case2", {"p": str(p), "r": str(r), "nmax": n_max}, trend, certs,
                      extra={"t1": str(t1), "t2": str(t2), "expected_slope": float(r.value - 1)})


def case3_construct(p, r, n_max: int = 10**6) -> CaseResult:
    """A scaled basis <alpha_n e_n> of l_p that is weakly r-summable while alpha is not in l_r, for r between p and p'.

    If p' < r < p the roles of p and p' are swapped first. With
    1/t = 1/r - 1/p', alpha_n = n**(-1/t) (1 + ln n)**(-2/t) lies in l_t but
    sum alpha_n^r diverges, with partial sums growing like N**(1 - r/t).
    """
    p, r = as_exponent(p), as_exponent(r)
    swapped = False
    if p.dual < r < p:
        p, swapped = p.dual, True
    if not (p < r < p.dual):
        raise HypothesisViolation(f"needs r strictly between p and p', got p = {p}, r = {r}")
    inv_t = r.inv - p.dual.inv
    t = as_exponent(_recip(inv_t))
    alpha = _power_log(inv_t)
    rf = float(r)
    ns = doubling_truncations(n_max)
    # the pairing array of <alpha_n e_n> with the coordinate functionals is diag(alpha); row n has l_r norm alpha_n
    sums = _partial_sums(lambda n: alpha.coef(n) ** rf, ns)
    trend = TrendSeries(ns, list(sums), label="sum alpha_n^r")
    certs = [certify("alpha in l_t", alpha, t), certify("alpha in l_r", alpha, r)]
    return CaseResult("case3", {"p": str(p), "r": str(r), "nmax": n_max, "swapped": swapped}, trend, certs,
                      extra={"t": str(t), "expected_slope": float(1 - r.value * inv_t)})


def cor312_construct(p, r, s, n_max: int = 10**6, beta_zero: bool = False) -> CaseResult:
    """A weakly s-summable scaled basis <a_n e_n> of l_p and one beta in l_{p'} with sum |<beta, a_n e_n>|^r infinite.

    Needs 1 < r < s < inf and r < p' (for r >= p' every bounded scaled basis is
    weakly r-summable). With margin g = 1/r - max(1/p', 1/s) > 0 the choices
    a_n = n**-(max(0, 1/s - 1/p') + g/4) and beta_n = n**-(1/p' + g/4) put a in
    l_{t_s}, beta in l_{p'} and give sum (beta_n a_n)^r the exponent 1 - r g/2 < 1.
    """
    p, r, s = as_exponent(p), as_exponent(r), as_exponent(s)
    if not (1 < r.value and r < s and not s.is_inf):
        raise HypothesisViolation(f"needs 1 < r < s < inf, got r = {r}, s = {s}")
    if not r < p.dual:
        raise HypothesisViolation(f"needs r < p' = {p.dual}: otherwise weakly s-summable scaled bases are weakly r-summable")
    g = r.inv - max(p.dual.inv, s.inv)
    inv_ts = max(Fraction(0), s.inv - p.dual.inv)
    a_model = TailModel.power_log(1.0, inv_ts + g / 4, 0) if inv_ts + g / 4 > 0 else TailModel.none()
    b_model = TailModel.power_log(0.0 if beta_zero else 1.0, p.dual.inv + g / 4, 0)
    rf = float(r)
    ns = doubling_truncations(n_max)
    sums = _partial_sums(lambda n: (b_model.coef(n) * a_model.coef(n)) ** rf, ns)
    trend = TrendSeries(ns, list(sums), label="sum |<beta, alpha_n>|^r")
    pairing = TailModel.power_log(b_model.c, inv_ts + p.dual.inv + g / 2, 0)
    certs = [certify("beta in l_p'", b_model, p.dual), certify("pairings in l_r", pairing, r)]
    if inv_ts > 0:
        certs.insert(0, certify("a in l_ts", a_model, as_exponent(1 / inv_ts)))
    return CaseResult("cor312", {"p": str(p), "r": str(r), "s": str(s), "nmax": n_max, "beta_zero": beta_zero},
                      trend, certs, extra={"margin": str(g), "expected_slope": 0.0 if beta_zero else float(r.value * g / 2)})
