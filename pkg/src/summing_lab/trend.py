"""Growth-rate fits turning "is this series summable?" into a measured log-log slope."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

DIVERGENCE_SLOPE = 0.05
# a growth claim needs at least this many truncations spanning three full doublings
MIN_POINTS = 4


def doubling_truncations(n_max: int, n_min: int = 1) -> list[int]:
    """n_min, 2 n_min, 4 n_min, ... up to n_max, always ending at n_max."""
    if n_max < n_min:
        raise ValueError("n_max must be >= n_min")
    out = []
    n = n_min
    while n < n_max:
        out.append(n)
        n *= 2
    out.append(n_max)
    return out


def loglog_slope(ns, values) -> float:
    """Least-squares slope of log(value) against log(N) over the tail half of the points.

    Zero values carry no growth information and are skipped; fewer than two
    usable points give slope 0.
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    start = len(ns) // 2
    ns, values = ns[start:], values[start:]
    keep = (values > 0) & (ns > 0)
    if keep.sum() < 2:
        return 0.0
    x, y = np.log(ns[keep]), np.log(values[keep])
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class TrendSeries:
    truncations: list[int]
    values: list[float]
    fitted_slope: float = field(init=False)
    verdict: str = field(init=False)
    label: str = ""

    def __post_init__(self):
        if len(self.truncations) != len(self.values):
            raise ValueError("truncations and values must have equal length")
        self.fitted_slope = loglog_slope(self.truncations, self.values)
        ns = self.truncations
        enough = len(ns) >= MIN_POINTS and ns[-1] >= 2 ** (MIN_POINTS - 1) * ns[0]
        self.verdict = "diverging" if enough and self.fitted_slope > DIVERGENCE_SLOPE else "bounded"

    @property
    def is_nondecreasing(self) -> bool:
        v = np.asarray(self.values)
        return bool(np.all(np.diff(v) >= -1e-12 * np.maximum(1.0, np.abs(v[1:]))))

    def rows(self):
        for n, v in zip(self.truncations, self.values):
            yield n, v, math.log(n), (math.log(v) if v > 0 else float("-inf"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "value", "log N", "log value"])
        for n, v, ln, lv in self.rows():
            w.writerow([n, repr(float(v)), repr(ln), repr(lv)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "truncations": [int(n) for n in self.truncations],
            "values": [float(v) for v in self.values],
            "fitted_slope": self.fitted_slope,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)
