"""Exponents, finite vectors, truncated sequences and the elementary summability norms.

Everything here is a pure function of its inputs. Sequences are stored as a
dense ``(N, d)`` head plus an optional power-log tail describing the
coefficients ``c * n**-gamma * (1 + ln n)**-kappa`` that multiply the standard
basis vectors ``e_n`` beyond the truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import total_ordering
from numbers import Real
from typing import Sequence

import mpmath
import numpy as np

DIVERGES = "diverges"

INF = math.inf

_KINDS = ("exact", "lower", "upper")


@total_ordering
@dataclass(frozen=True)
class Exponent:
    """An exponent p in [1, inf], kept as a Fraction when finite."""

    value: Fraction | float

    def __post_init__(self):
        v = self.value
        if isinstance(v, int) and not isinstance(v, bool):
            v = Fraction(v)
            object.__setattr__(self, "value", v)
        if isinstance(v, float):
            if v != INF:
                raise TypeError("finite exponents are stored as Fraction")
        elif not isinstance(v, Fraction):
            raise TypeError(f"bad exponent value {v!r}")
        if v < 1:
            raise ValueError(f"exponent must be >= 1, got {v}")

    @property
    def is_inf(self) -> bool:
        return self.value == INF

    @property
    def inv(self) -> Fraction:
        """1/p, with 1/inf = 0."""
        return Fraction(0) if self.is_inf else 1 / self.value

    @property
    def dual(self) -> "Exponent":
        return dual_exponent(self)

    def __float__(self) -> float:
        return float(self.value)

    def __lt__(self, other):
        other = as_exponent(other)
        return self.value < other.value

    def __eq__(self, other):
        try:
            other = as_exponent(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __str__(self):
        return "inf" if self.is_inf else str(self.value)

    def __repr__(self):
        return f"Exponent({self})"


def as_exponent(p) -> Exponent:
    """Coerce ints, Fractions, floats and strings like '3/2', '1.5', 'inf' to an Exponent."""
    if isinstance(p, Exponent):
        return p
    if isinstance(p, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "∞", "+inf"):
            return Exponent(INF)
        try:
            val = Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse exponent {p!r}") from exc
        return Exponent(val)
    if isinstance(p, Fraction):
        return Exponent(p)
    if isinstance(p, int):
        return Exponent(Fraction(p))
    if isinstance(p, Real):
        x = float(p)
        if math.isnan(x):
            raise ValueError("exponent is NaN")
        if x == INF:
            return Exponent(INF)
        if x == -INF:
            raise ValueError("exponent must be >= 1")
        # shortest repr keeps 1.2 -> 6/5 instead of the binary expansion
        return Exponent(Fraction(repr(x)))
    raise TypeError(f"not an exponent: {p!r}")


def dual_exponent(p) -> Exponent:
    """Harmonic conjugate: 1/p + 1/p' = 1, with 1 <-> inf."""
    p = as_exponent(p)
    if p.is_inf:
        return Exponent(Fraction(1))
    if p.value == 1:
        return Exponent(INF)
    return Exponent(p.value / (p.value - 1))


def lp_norm(a, q, axis=-1) -> np.ndarray | float:
    """l_q norm of ``a`` along ``axis`` (vectorised, overflow-safe)."""
    q = as_exponent(q)
    a = np.abs(np.asarray(a, dtype=float))
    if q.is_inf:
        return a.max(axis=axis, initial=0.0)
    if q.value == 1:
        return a.sum(axis=axis)
    qf = float(q)
    m = a.max(axis=axis, keepdims=True, initial=0.0)
    safe = np.where(m > 0, m, 1.0)
    r = a / safe
    if q.value == 2:
        s = np.sqrt((r * r).sum(axis=axis, keepdims=True))
    else:
        s = (r**qf).sum(axis=axis, keepdims=True) ** (1.0 / qf)
    return np.squeeze(s * m, axis=axis)


def norming_vector(v, r) -> np.ndarray:
    """Unit vector in l_{r'} attaining <alpha, v> = ||v||_r (the duality map)."""
    r = as_exponent(r)
    v = np.asarray(v, dtype=float)
    nv = lp_norm(v, r)
    if nv == 0:
        out = np.zeros_like(v)
        if out.size:
            out[0] = 1.0
        return out
    if r.is_inf:
        out = np.zeros_like(v)
        i = int(np.argmax(np.abs(v)))
        out[i] = np.sign(v[i])
        return out
    if r.value == 1:
        return np.sign(v)
    rf = float(r)
    return np.sign(v) * (np.abs(v) / nv) ** (rf - 1)


@dataclass(frozen=True)
class Budget:
    """Search budget: independent starts x iterations per start."""

    starts: int = 32
    iters: int = 500

    def __post_init__(self):
        if self.starts < 1 or self.iters < 0:
            raise ValueError(f"invalid budget {self.starts}x{self.iters}")

    @classmethod
    def parse(cls, text: str) -> "Budget":
        try:
            s, i = text.lower().split("x")
            return cls(int(s), int(i))
        except ValueError as exc:
            raise ValueError(f"budget must look like '32x500', got {text!r}") from exc

    def to_dict(self):
        return {"starts": self.starts, "iters": self.iters}


@dataclass(frozen=True, eq=False)
class NormEstimate:
    value: float
    kind: str
    method: str
    seed: int | None = None
    tolerance: float = 1e-12
    budget: Budget | None = None
    upper: float | None = None
    witness: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        if not self.value >= 0:
            raise ValueError(f"norm estimate must be >= 0, got {self.value}")

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    @property
    def bracket(self) -> tuple[float, float]:
        """(lower, upper) interval known to contain the true value."""
        if self.kind == "exact":
            return self.value, self.value
        if self.kind == "upper":
            return 0.0, self.value
        return self.value, INF if self.upper is None else self.upper

    def scaled(self, factor: float) -> "NormEstimate":
        up = None if self.upper is None else self.upper * abs(factor)
        return replace(self, value=self.value * abs(factor), upper=up)

    def to_dict(self) -> dict:
        out = {
            "value": float(self.value),
            "kind": self.kind,
            "method": self.method,
            "tolerance": self.tolerance,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        if self.budget is not None:
            out["budget"] = self.budget.to_dict()
        if self.upper is not None:
            out["upper"] = float(self.upper)
        return out


@dataclass(frozen=True, eq=False)
class Vec:
    coords: np.ndarray
    q: Exponent

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float).reshape(-1))
        object.__setattr__(self, "q", as_exponent(self.q))

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


def vec_norm(v: Vec) -> float:
    return float(lp_norm(v.coords, v.q))


@dataclass(frozen=True)
class TailModel:
    """Coefficients c * n**-gamma * (1 + ln n)**-kappa on e_n past the truncation."""

    kind: str = "none"
    c: float = 0.0
    gamma: Fraction | float = 1
    kappa: Fraction | float = 0

    def __post_init__(self):
        if self.kind not in ("none", "power-log"):
            raise ValueError(f"unknown tail kind {self.kind!r}")
        if self.kind == "power-log":
            if self.c < 0 or self.gamma <= 0 or self.kappa < 0:
                raise ValueError("power-log tail needs c >= 0, gamma > 0, kappa >= 0")

    @classmethod
    def none(cls) -> "TailModel":
        return cls()

    @classmethod
    def power_log(cls, c=1.0, gamma=1, kappa=0) -> "TailModel":
        return cls("power-log", float(c), gamma, kappa)

    @property
    def is_none(self) -> bool:
        return self.kind == "none" or self.c == 0

    def coef(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if self.kind == "none":
            return np.zeros_like(n)
        return self.c * n ** -float(self.gamma) * (1.0 + np.log(n)) ** -float(self.kappa)

    def powered(self, p) -> "TailModel":
        """The model of coef(n)**p (again power-log)."""
        p = as_exponent(p)
        if self.kind == "none":
            return self
        return TailModel.power_log(self.c ** float(p), _mul(p.value, self.gamma), _mul(p.value, self.kappa))

    def to_dict(self) -> dict:
        if self.kind == "none":
            return {"kind": "none"}
        return {"kind": self.kind, "c": self.c, "gamma": _num_out(self.gamma), "kappa": _num_out(self.kappa)}


def _mul(a, b):
    if isinstance(a, Fraction) and isinstance(b, (Fraction, int)):
        return a * b
    return float(a) * float(b)


def _num_out(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return float(x)


def power_log_integral(a, b, lower: float) -> float:
    """Integral of x**-a (1 + ln x)**-b over [lower, inf); requires convergence and lower >= 1."""
    if lower < 1:
        raise ValueError("integral comparison needs lower limit >= 1")
    u0 = 1.0 + math.log(lower)
    if a == 1:
        bf = float(b)
        return u0 ** (1.0 - bf) / (bf - 1.0)
    s = float(a) - 1.0
    bf = float(b)
    with mpmath.workdps(30):
        val = mpmath.e ** s * mpmath.mpf(s) ** (bf - 1) * mpmath.gammainc(1 - bf, s * u0)
        return float(val)


def tail_sum_bounds(t: TailModel, p, N: int, explicit: int = 1000):
    """Integral-comparison bracket on sum_{n>N} coef(n)**p, or DIVERGES.

    The first ``explicit`` terms past N are summed directly; the rest is
    bracketed by monotonicity: n**-a (1 + ln n)**-b is decreasing on [1, inf)
    whenever a > 0 and b >= 0, so int_{M+1}^inf <= sum_{n>M} <= int_M^inf.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    p = as_exponent(p)
    if p.is_inf:
        raise ValueError("tail sums are for finite p")
    if t.is_none:
        return (0.0, 0.0)
    a = _mul(p.value, t.gamma)
    b = _mul(p.value, t.kappa)
    if a < 1 or (a == 1 and b <= 1):
        return DIVERGES
    if not (a > 0 and b >= 0):
        raise ValueError("tail terms are not monotone")
    scale = t.c ** float(p)
    M = N + explicit
    head = 0.0
    if explicit > 0:
        ns = np.arange(N + 1, M + 1, dtype=float)
        head = float(np.sum(t.coef(ns) ** float(p)))
    lo = head + scale * power_log_integral(a, b, M + 1)
    hi = head + scale * power_log_integral(a, b, M)
    # integrals are evaluated to ~30 digits; widen for float summation error
    return (lo * (1 - 1e-12), hi * (1 + 1e-12))


def power_log_partial_sums(t: TailModel, p, ns: Sequence[int], start: int = 1, chunk: int = 1 << 20) -> np.ndarray:
    """Direct partial sums sum_{start <= n <= N} coef(n)**p at each N in ``ns`` (sorted)."""
    p = float(as_exponent(p))
    ns = np.asarray(ns, dtype=np.int64)
    out = np.zeros(len(ns))
    if t.is_none or len(ns) == 0:
        return out
    total = 0.0
    lo = start
    j = 0
    nmax = int(ns.max())
    while lo <= nmax and j < len(ns):
        hi = min(lo + chunk - 1, nmax)
        idx = np.arange(lo, hi + 1, dtype=float)
        c = np.cumsum(t.coef(idx) ** p) + total
        while j < len(ns) and ns[j] <= hi:
            out[j] = c[ns[j] - lo] if ns[j] >= lo else total
            j += 1
        total = c[-1]
        lo = hi + 1
    return out


@dataclass(frozen=True, eq=False)
class VecSeq:
    """Truncated sequence <x_n>: an (N, d) head in l_q^d plus an analytic tail."""

    head: np.ndarray
    q: Exponent
    tail: TailModel = field(default_factory=TailModel)

    def __post_init__(self):
        h = np.asarray(self.head, dtype=float)
        if h.ndim == 1:
            h = h.reshape(1, -1) if h.size else h.reshape(0, 0)
        if h.ndim != 2:
            raise ValueError("head must be a 2-D array of row vectors")
        object.__setattr__(self, "head", h)
        object.__setattr__(self, "q", as_exponent(self.q))

    @classmethod
    def from_vectors(cls, vectors: Sequence[Vec | Sequence[float]], q=None, tail=None) -> "VecSeq":
        rows = []
        for v in vectors:
            if isinstance(v, Vec):
                if q is not None and v.q != as_exponent(q):
                    raise ValueError("vectors do not share one ambient space")
                q = v.q if q is None else q
                rows.append(v.coords)
            else:
                rows.append(np.asarray(v, dtype=float))
        if q is None:
            raise ValueError("ambient exponent required")
        dims = {len(r) for r in rows}
        if len(dims) > 1:
            raise ValueError("vectors do not share one ambient space")
        head = np.vstack(rows) if rows else np.zeros((0, 0))
        return cls(head, as_exponent(q), tail or TailModel())

    @classmethod
    def basis(cls, d: int, q, scale=None) -> "VecSeq":
        """(scale_1 e_1, ..., scale_d e_d) in l_q^d."""
        s = np.ones(d) if scale is None else np.asarray(scale, dtype=float)
        return cls(np.diag(s), as_exponent(q))

    @property
    def n(self) -> int:
        return self.head.shape[0]

    @property
    def dim(self) -> int:
        return self.head.shape[1]

    @property
    def is_finite(self) -> bool:
        return self.tail.is_none

    def vectors(self) -> list[Vec]:
        return [Vec(r, self.q) for r in self.head]

    def truncate(self, m: int) -> "VecSeq":
        return VecSeq(self.head[:m], self.q, TailModel())

    def scaled(self, lam: float) -> "VecSeq":
        t = self.tail
        if not t.is_none:
            t = replace(t, c=t.c * abs(lam))
        return VecSeq(self.head * lam, self.q, t)

    def materialize(self, n_total: int) -> "VecSeq":
        """Tail-free sequence of length n_total; tail terms coef(n) e_n fill n > N."""
        N, d = self.head.shape
        if n_total <= N:
            return self.truncate(n_total)
        dim = max(d, n_total)
        h = np.zeros((n_total, dim))
        h[:N, :d] = self.head
        ns = np.arange(N + 1, n_total + 1)
        h[ns - 1, ns - 1] = self.tail.coef(ns)
        return VecSeq(h, self.q)

    def to_dict(self) -> dict:
        return {
            "kind": "sequence",
            "ambient": {"dim": self.dim, "exponent": str(self.q)},
            "head": self.head.tolist(),
            "tail": self.tail.to_dict(),
        }


def strong_norm(x: VecSeq, p):
    """(sum_n ||x_n||^p)^(1/p): exact for finite x, a certified bracket with a tail, or DIVERGES."""
    p = as_exponent(p)
    if p.is_inf:
        raise ValueError("strong norm needs finite p")
    pf = float(p)
    norms = lp_norm(x.head, x.q, axis=1) if x.n else np.zeros(0)
    if x.is_finite:
        return NormEstimate(float(lp_norm(norms, p)) if x.n else 0.0, "exact", "closed-form")
    # head part in scaled form to avoid overflow in the p-th powers
    head_pow = float(np.sum(norms ** pf))
    start = x.n
    if start == 0:
        head_pow += float(x.tail.coef(1.0)) ** pf
        start = 1
    bounds = tail_sum_bounds(x.tail, p, start)
    if bounds == DIVERGES:
        return DIVERGES
    lo = (head_pow + bounds[0]) ** (1 / pf)
    hi = (head_pow + bounds[1]) ** (1 / pf)
    return NormEstimate(lo, "lower", "head+integral-tail", upper=hi)
