"""Young functions given by piecewise densities, admissibility integrals,
Orlicz modulars and the decaying-sequence pipeline.

A density segment on [t_lo, t_hi) has the form

    phi(t) = c * (t + shift)^alpha * log(t + shift)^gamma

and a Young function is Phi(t) = int_0^t phi. Segments with gamma > 0 must
start at t_lo + shift >= 1 so that the logarithm is nonnegative.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import cantor
from .cantor import CantorParams, Variant, word_budget
from .rearrange import StepProfile, lorentz_norm
from .testfn import (
    TestFunctionSpec,
    gradient_profile,
    pieces_lorentz_norm,
    value_pieces,
    value_profile_envelope,
)

__all__ = [
    "Segment",
    "YoungFunction",
    "admissibility_integral",
    "modular",
    "calibrate_family",
    "merge_disjoint",
    "sum_envelope",
    "PipelineRow",
    "PipelineState",
    "PipelineError",
    "run_pipeline",
    "pipeline_csv",
]

DPS = 30
INF = math.inf


@dataclass(frozen=True)
class Segment:
    t_lo: float
    t_hi: float  # may be math.inf
    c: float
    alpha: float
    gamma: float = 0.0
    shift: float = 0.0

    def density(self, t):
        x = t + self.shift
        out = self.c * mpmath.power(x, self.alpha)
        if self.gamma:
            out *= mpmath.power(mpmath.log(x), self.gamma)
        return out

    def to_json(self) -> dict:
        d = {"t_lo": self.t_lo, "t_hi": "inf" if self.t_hi == INF else self.t_hi, "c": self.c, "alpha": self.alpha}
        if self.gamma:
            d["gamma"] = self.gamma
        if self.shift:
            d["shift"] = self.shift
        return d

    @classmethod
    def from_json(cls, d) -> "Segment":
        hi = d["t_hi"]
        hi = INF if hi in ("inf", "Infinity", None) else float(hi)
        return cls(float(d["t_lo"]), hi, float(d["c"]), float(d["alpha"]), float(d.get("gamma", 0)), float(d.get("shift", 0)))


def _antiderivative_log(lam, g, u):
    """int e^(lam*u) u^g du for integer g >= 0, lam > 0."""
    g = int(g)
    total = mpmath.mpf(0)
    fact = mpmath.mpf(1)
    for i in range(g + 1):
        if i:
            fact *= g - i + 1
        total += (-1) ** i * fact * mpmath.power(u, g - i) / mpmath.power(lam, i + 1)
    return mpmath.exp(lam * u) * total


def _segment_phi(seg: Segment, a, b):
    """int_a^b phi for a <= b inside the segment."""
    if b <= a:
        return mpmath.mpf(0)
    s, al = seg.shift, mpmath.mpf(seg.alpha)
    if not seg.gamma:
        if al == -1:
            return seg.c * (mpmath.log(b + s) - mpmath.log(a + s))
        return seg.c * (mpmath.power(b + s, al + 1) - mpmath.power(a + s, al + 1)) / (al + 1)
    lam = al + 1
    ua, ub = mpmath.log(a + s), mpmath.log(b + s)
    g = seg.gamma
    if g == int(g) and lam > 0:
        return seg.c * (_antiderivative_log(lam, g, ub) - _antiderivative_log(lam, g, ua))
    f = lambda u: mpmath.exp(lam * u) * mpmath.power(u, g)  # noqa: E731
    pts = [ua, ub]
    if lam > 0:
        # the mass sits within a few 1/lam of the right end
        pts = sorted({ua, ub, *(x for x in (ub - 40 / lam, ub - 5 / lam) if ua < x < ub)})
    return seg.c * mpmath.quad(f, pts)


class YoungFunction:
    """Phi(t) = int_0^t phi for a piecewise density phi."""

    def __init__(self, segments, require_limits: bool = True):
        self.segments = tuple(segments)
        self.require_limits = require_limits
        self._validate()
        with mpmath.workdps(DPS):
            acc = [mpmath.mpf(0)]
            for seg in self.segments[:-1]:
                acc.append(acc[-1] + _segment_phi(seg, seg.t_lo, seg.t_hi))
        self._base = acc

    def _validate(self):
        segs = self.segments
        if not segs:
            raise ValueError("a density needs at least one segment")
        if segs[0].t_lo != 0:
            raise ValueError("first segment must start at t = 0")
        if segs[-1].t_hi != INF:
            raise ValueError("last segment must extend to infinity")
        for i, s in enumerate(segs):
            where = f"segment {i}"
            if not s.t_lo < s.t_hi:
                raise ValueError(f"{where}: empty interval")
            if i and s.t_lo != segs[i - 1].t_hi:
                raise ValueError(f"{where}: segments must be contiguous")
            if s.c <= 0:
                raise ValueError(f"{where}: c must be positive")
            if s.alpha < 0 or s.gamma < 0:
                raise ValueError(f"{where}: alpha and gamma must be nonnegative (density nondecreasing)")
            if s.shift < 0 or (s.t_lo == 0 and s.shift == 0 and s.gamma):
                raise ValueError(f"{where}: log factor undefined at 0")
            if s.gamma and s.t_lo + s.shift < 1:
                raise ValueError(f"{where}: log factor must start at t + shift >= 1")
        with mpmath.workdps(DPS):
            for i in range(1, len(segs)):
                left = segs[i - 1].density(segs[i].t_lo)
                right = segs[i].density(segs[i].t_lo)
                if right < left * (1 - mpmath.mpf(10) ** -12):
                    raise ValueError(f"segment {i}: density decreases at t = {segs[i].t_lo}")
        if self.require_limits:
            s0 = segs[0]
            if not (s0.shift == 0 and s0.alpha > 0):
                raise ValueError("density must tend to 0 as t -> 0+")
            if not (segs[-1].alpha > 0 or segs[-1].gamma > 0):
                raise ValueError("density must tend to infinity as t -> infinity")

    def density(self, t):
        for seg in self.segments:
            if t < seg.t_hi:
                return seg.density(max(t, seg.t_lo))
        raise AssertionError

    def Phi(self, t):
        """Phi(t) as an mpmath number."""
        if t <= 0:
            return mpmath.mpf(0)
        with mpmath.workdps(DPS):
            for i, seg in enumerate(self.segments):
                if t < seg.t_hi:
                    return self._base[i] + _segment_phi(seg, seg.t_lo, mpmath.mpf(t))
        raise AssertionError

    def to_json(self) -> list:
        return [s.to_json() for s in self.segments]

    @classmethod
    def from_json(cls, data, require_limits: bool = True) -> "YoungFunction":
        return cls([Segment.from_json(d) for d in data], require_limits)


def _power_integral(a, b, e):
    """int_a^b x^e dx, with infinities for divergence."""
    if e == -1:
        if a == 0 or b == INF:
            return mpmath.inf
        return mpmath.log(b) - mpmath.log(a)
    if a == 0 and e < -1:
        return mpmath.inf
    if b == INF:
        if e >= -1:
            return mpmath.inf
        return -mpmath.power(a, e + 1) / (e + 1)
    return (mpmath.power(b, e + 1) - mpmath.power(a, e + 1)) / (e + 1)


def _admissibility_segment(seg: Segment, r):
    lo = mpmath.mpf(seg.t_lo) + seg.shift
    hi = mpmath.inf if seg.t_hi == INF else mpmath.mpf(seg.t_hi) + seg.shift
    scale = mpmath.power(seg.c, -r)
    if not seg.gamma:
        return scale * _power_integral(lo, hi, -seg.alpha * r)
    # substitute u = log x: int e^(-lam u) u^(-g) du
    lam = seg.alpha * r - 1
    g = seg.gamma * r
    ua = mpmath.log(lo)
    ub = mpmath.inf if hi == mpmath.inf else mpmath.log(hi)
    if ua == 0 and g >= 1:
        return mpmath.inf
    if lam == 0:
        return scale * _power_integral(ua, ub, -g)
    if lam > 0:
        return scale * mpmath.power(lam, g - 1) * mpmath.gammainc(1 - g, lam * ua, lam * ub)
    if ub == mpmath.inf:
        return mpmath.inf
    return scale * mpmath.quad(lambda u: mpmath.exp(-lam * u) * mpmath.power(u, -g), [ua, ub])


def admissibility_integral(phi: YoungFunction, p) -> float:
    """int_0^inf phi(t)^(-1/(p-1)) dt; divergent integrals give math.inf."""
    p = float(p)
    if p <= 1:
        raise ValueError("p must exceed 1")
    with mpmath.workdps(DPS):
        r = 1 / (mpmath.mpf(p) - 1)
        total = mpmath.fsum(_admissibility_segment(s, r) for s in phi.segments)
        return INF if total == mpmath.inf else float(total)


def modular(phi: YoungFunction, profile: StepProfile, cache: dict | None = None) -> float:
    """int Phi(|f|) for a step profile. ``cache`` memoises Phi by value."""
    cache = {} if cache is None else cache

    def Phi(v):
        if v not in cache:
            cache[v] = phi.Phi(mpmath.mpf(v))
        return cache[v]

    with mpmath.workdps(DPS):
        total = mpmath.fsum(Phi(v) * m for v, m in profile)
        try:
            return float(total)
        except OverflowError:
            return INF


def calibrate_family(p, eps) -> YoungFunction:
    """Admissible density with integral exactly 1.

    phi = c t^((p-1)/(1+eps))                   on [0, 1)
          c t^(p-1)                             on [1, e)
          c t^(p-1) log(t)^((p-1)(1+eps))       on [e, inf)

    With c = 1 the admissibility integral is (1+eps)/eps + 1 + 1/eps, and
    multiplying phi by c divides it by c^(1/(p-1)), which fixes c.
    """
    p, eps = float(p), float(eps)
    if p <= 1:
        raise ValueError("p must exceed 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    base = (2 + 2 * eps) / eps
    c = base ** (p - 1)
    e = math.e
    return YoungFunction(
        [
            Segment(0.0, 1.0, c, (p - 1) / (1 + eps)),
            Segment(1.0, e, c, p - 1),
            Segment(e, INF, c, p - 1, (p - 1) * (1 + eps)),
        ]
    )


def merge_disjoint(profiles) -> StepProfile:
    """Rearrangement of a sum of functions with pairwise disjoint supports."""
    acc: dict = {}
    for prof in profiles:
        for v, m in prof:
            acc[v] = acc.get(v, 0) + m
    return StepProfile(tuple(sorted(acc.items(), key=lambda vm: vm[0], reverse=True)))


def sum_envelope(a: StepProfile, b: StepProfile) -> StepProfile:
    """Step profile dominating (u + v)* for u* = a, v* = b.

    Uses (u + v)*(2s) <= u*(s) + v*(s): on every interval between the
    merged mass breakpoints the values add and the masses double.
    """
    ca, cb = a.cumulative(), b.cumulative()
    va, vb = a.values, b.values
    cuts = sorted(set(ca) | set(cb))
    steps = []
    i = k = 0
    prev = 0
    for cut in cuts:
        while i < len(ca) and ca[i] < cut:
            i += 1
        while k < len(cb) and cb[k] < cut:
            k += 1
        v = (va[i] if i < len(va) else 0) + (vb[k] if k < len(vb) else 0)
        if v > 0:
            if steps and not v < steps[-1][0]:
                steps[-1] = (steps[-1][0], steps[-1][1] + 2 * (cut - prev))
            else:
                steps.append((v, 2 * (cut - prev)))
        prev = cut
    return StepProfile(tuple(steps))


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class PipelineRow:
    k: int
    j_k: int
    J_k: int
    norm_p: float
    modular_Dg: float
    modular_g: float
    remainder_bound: float


@dataclass
class PipelineState:
    params: CantorParams
    p: float
    K: int
    selected: list  # (j_k, J_k, norm_f, norm_Df)
    rows: list
    F_profile: StepProfile
    modular_F: float
    g_profiles: list = field(default_factory=list)  # (Dg_k profile, g_k envelope)

    @property
    def flagged(self) -> bool:
        """The supplied Phi is not adapted to F (modular above 1)."""
        return self.modular_F > 1

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "p": self.p,
            "K": self.K,
            "selected": [
                {"j": j, "J": J, "norm_f": nf, "norm_Df": nd} for j, J, nf, nd in self.selected
            ],
            "modular_F": self.modular_F,
            "flagged": self.flagged,
        }


def _select(params, p, K, max_j):
    selected = []
    specs = []
    j = 2
    for k in range(1, K + 1):
        target = 2.0 ** -k
        while True:
            if j > max_j:
                raise PipelineError(f"norm target 2^-{k} unreachable for j <= {max_j} (k = {k})")
            spec = TestFunctionSpec(params, j)
            nf = pieces_lorentz_norm(value_pieces(spec), params.n, p, 1.0)
            nd = float(lorentz_norm(gradient_profile(spec), p, 1.0))
            if nf ** p + nd ** p <= target:
                break
            j += 1
        selected.append((spec.j, spec.J, nf, nd))
        specs.append(spec)
        j = spec.J + 1
    return selected, specs


def _g_envelope(envs, supports, k):
    """Step envelope of g_k = sum_{i >= k} f_i for nested f_i (0-based k).

    f_i equals 1 on a neighbourhood of supp f_(i+1), so on supp f_i minus
    supp f_(i+1) the sum is (i - k) + f_i.
    """
    steps = []
    last = len(envs) - 1
    for i in range(last, k - 1, -1):
        shift = i - k
        env = list(envs[i])
        if i < last:
            v, m = env[0]
            env[0] = (v, m - supports[i + 1])
        for v, m in env:
            if m <= 0:
                continue
            val = v + shift
            if steps and not val < steps[-1][0]:
                steps[-1] = (steps[-1][0], steps[-1][1] + m)
            else:
                steps.append((val, m))
    return StepProfile(tuple(steps))


def run_pipeline(params: CantorParams, K: int, phi: YoungFunction, p=None, max_j: int = 5000, refine: int = 8) -> PipelineState:
    if params.variant is not Variant.HARMONIC:
        raise ValueError("the pipeline needs the harmonic construction")
    if K < 1:
        raise ValueError("K must be >= 1")
    budget = word_budget()
    if K > budget:
        raise cantor.BudgetExceeded(f"K = {K} exceeds the budget {budget}")
    p = float(params.p if p is None else p)
    with mpmath.workdps(DPS):
        selected, specs = _select(params, p, K, max_j)
        grads = [gradient_profile(s) for s in specs]
        envs = [value_profile_envelope(s, refine) for s in specs]
        supports = [e.total_mass() for e in envs]
        rows, g_profiles = [], []
        cache: dict = {}
        remainder = 2.0 ** -K
        for k in range(K):
            dg = merge_disjoint(grads[k:])
            g = _g_envelope(envs, supports, k)
            g_profiles.append((dg, g))
            j, J, nf, nd = selected[k]
            rows.append(PipelineRow(k + 1, j, J, nf ** p + nd ** p, modular(phi, dg, cache), modular(phi, g, cache), remainder))
        F = sum_envelope(g_profiles[0][1], g_profiles[0][0])
        mF = modular(phi, F)
    return PipelineState(params, p, K, selected, rows, F, mF, g_profiles)


def pipeline_csv(state: PipelineState) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "j_k", "J_k", "norm_p", "modular_Dg", "modular_g", "remainder_bound"])
    for r in state.rows:
        w.writerow([r.k, r.j_k, r.J_k, repr(r.norm_p), repr(r.modular_Dg), repr(r.modular_g), repr(r.remainder_bound)])
    return buf.getvalue()
