"""Covering sums, mass-distribution bounds and dimension estimates.

Sizes follow the half-side convention: a cube Q(c, r) counts as r**d.
True Hausdorff content uses the diameter 2*sqrt(n)*r, which only changes the
sums by the constant factor (2*sqrt(n))**d.

The covering of E by the 2^(nk) generation-k core cubes has the exact sum

    2^(nk) * (2^(-k(beta+1)) / k^[harmonic])^d
        = 2^(nk - k(beta+1)d) * k^(-d [harmonic]),

which is stored as the pair of rational exponents of 2 and of k.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cantor import CantorParams, Variant
from .surd import as_fraction

__all__ = [
    "CoveringReport",
    "covering_content",
    "MassBound",
    "mass_lower_bound",
    "DimensionEstimate",
    "dimension_estimate",
    "trend",
    "coverings_csv",
]


@dataclass(frozen=True)
class CoveringReport:
    variant: Variant
    d: Fraction
    depth: int
    count: int
    two_exponent: Fraction
    k_exponent: Fraction
    size_convention: str = "half-side"

    @property
    def log_sum(self) -> float:
        return float(self.two_exponent) * math.log(2) + float(self.k_exponent) * math.log(self.depth)

    @property
    def sum(self) -> float:
        return math.exp(self.log_sum)

    @property
    def half_side(self) -> float:
        # (sum / count)^(1/d) without forming the sum
        if self.d == 0:
            return float("nan")
        return math.exp((self.log_sum - math.log(self.count)) / float(self.d))

    def equals_power_of_depth(self, e) -> bool:
        """Exact test  sum == depth**e."""
        e = as_fraction(e)
        if self.depth == 1:
            return self.two_exponent == 0
        if self.two_exponent == 0 and self.k_exponent == e:
            return True
        # depth may itself be a power of two
        m = self.depth.bit_length() - 1
        if 1 << m == self.depth:
            return self.two_exponent + m * self.k_exponent == m * e
        return False


def covering_content(params: CantorParams, d, k: int) -> CoveringReport:
    d = as_fraction(d)
    if d < 0:
        raise ValueError("d must be nonnegative")
    if k < 1:
        raise ValueError("k must be >= 1")
    n, beta = params.n, params.beta
    two = n * k - k * (beta + 1) * d
    kexp = -d if params.variant is Variant.HARMONIC else Fraction(0)
    return CoveringReport(params.variant, d, k, 2 ** (n * k), two, kexp)


@dataclass(frozen=True)
class MassBound:
    """Mass-distribution bound with the natural measure (mass 2^(-nk) on every
    generation-k core cube). ``ratios[k-1]`` is half_side_k**d / 2^(-nk);
    ``bound`` is their infimum over the inspected generations."""

    d: Fraction
    bound: float
    ratios: tuple
    attained_at: int


def mass_lower_bound(params: CantorParams, d, depth: int) -> MassBound:
    d = as_fraction(d)
    if d <= 0:
        raise ValueError("mass-distribution bound needs d > 0")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    ratios = []
    for k in range(1, depth + 1):
        # one cube's size^d is sum/count and its mass is 1/count, so the ratio is the sum
        ratios.append(covering_content(params, d, k).sum)
    i = int(np.argmin(ratios))
    return MassBound(d, ratios[i], tuple(ratios), i + 1)


@dataclass
class DimensionEstimate:
    status: str  # "ok" or "indeterminate"
    estimate: float
    bracket: tuple
    trend_slopes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "estimate": self.estimate,
            "bracket": list(self.bracket),
            "trend_slopes": {repr(float(k)): v for k, v in self.trend_slopes.items()},
        }


def trend(params: CantorParams, d, depth: int) -> float:
    """Geometric growth rate of the covering sums in k.

    log S_k is regressed on (1, k, log k); the coefficient of k is the
    geometric rate, the log k column absorbs polynomial factors such as
    the k^(-d) of the harmonic construction.
    """
    ks = np.arange(1, depth + 1, dtype=float)
    logs = np.array([covering_content(params, d, int(k)).log_sum for k in ks])
    A = np.column_stack([np.ones_like(ks), ks, np.log(ks)])
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    return float(coef[1])


def dimension_estimate(params: CantorParams, depth: int = 12, tol: float = 0.02, noise: float = 1e-9) -> DimensionEstimate:
    """Bisection on d in (0, n) for the critical exponent of the covering sums.

    d is "above" the dimension if the sums decay geometrically in k and
    "below" if they grow geometrically.
    """
    n = params.n
    lo, hi = 0.0, float(n)
    if depth < 3:
        return DimensionEstimate("indeterminate", n / 2, (lo, hi), {})
    slopes = {}
    if tol >= hi - lo:
        return DimensionEstimate("ok", (lo + hi) / 2, (lo, hi), slopes)
    # the endpoint sums must differ by at least a factor of 10 at full depth
    spread = covering_content(params, Fraction(lo).limit_denominator(), depth).log_sum - \
        covering_content(params, Fraction(hi).limit_denominator(), depth).log_sum
    if spread < math.log(10):
        return DimensionEstimate("indeterminate", (lo + hi) / 2, (lo, hi), slopes)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        d = Fraction(mid).limit_denominator(1 << 30)
        s = trend(params, d, depth)
        slopes[d] = s
        if abs(s) <= noise:
            return DimensionEstimate("ok", mid, (mid, mid), slopes)
        if s > 0:
            lo = mid
        else:
            hi = mid
    return DimensionEstimate("ok", (lo + hi) / 2, (lo, hi), slopes)


def coverings_csv(params: CantorParams, ds, ks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variant", "d", "k", "count", "half_side", "sum"])
    for d in ds:
        for k in ks:
            r = covering_content(params, d, k)
            w.writerow([params.variant.value, repr(float(r.d)), k, r.count, repr(r.half_side), repr(r.sum)])
    return buf.getvalue()
