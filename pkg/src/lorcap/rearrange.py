"""Distribution functions, decreasing rearrangements and Lorentz functionals.

A :class:`StepProfile` is the decreasing rearrangement of a simple function:
finitely many (value, mass) pairs with strictly decreasing values. All
Lorentz functionals are evaluated by integrating ``t**(q/p - 1)`` in closed
form over the mass interval each step occupies, so no quadrature enters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .surd import Surd, as_fraction

__all__ = [
    "REL_TOL",
    "ABS_TOL",
    "StepProfile",
    "LorentzExponents",
    "GridFunction",
    "distribution",
    "grid_to_profile",
    "lorentz_norm",
    "weak_norm_mu",
    "layercake_p1",
    "lorentz_p1_symbolic",
    "layercake_symbolic",
    "sorted_weights",
    "lorentz_norm_cells",
    "lorentz_subgradient_cells",
    "close",
]

# Comparison policy shared by every module and test.
REL_TOL = 1e-10
ABS_TOL = 1e-12


def close(a, b, rel=REL_TOL, abs_=ABS_TOL) -> bool:
    return math.isclose(float(a), float(b), rel_tol=rel, abs_tol=abs_)


def _parse_q(q):
    if isinstance(q, str):
        if q.strip().lower() in ("inf", "infinity", "oo"):
            return math.inf
        return float(q)
    return math.inf if q == math.inf else q


@dataclass(frozen=True)
class LorentzExponents:
    p: float
    q: float = 1.0

    def __post_init__(self):
        q = _parse_q(self.q)
        object.__setattr__(self, "q", q)
        if not float(self.p) > 1:
            raise ValueError(f"Lorentz exponent p must exceed 1, got {self.p}")
        if not (q == math.inf or float(q) >= 1):
            raise ValueError(f"Lorentz exponent q must be >= 1 or inf, got {q}")

    @property
    def finite_q(self) -> bool:
        return self.q != math.inf


@dataclass(frozen=True)
class StepProfile:
    """Decreasing rearrangement of a simple function.

    ``steps`` holds (value, mass) with values strictly decreasing and masses
    positive. Zero-valued steps are dropped on construction since they do not
    change any functional; the empty profile is the zero function.
    """

    steps: tuple = ()

    def __post_init__(self):
        cleaned = []
        for v, m in self.steps:
            if v < 0:
                raise ValueError(f"step value must be nonnegative, got {v}")
            if not m > 0:
                raise ValueError(f"step mass must be positive, got {m}")
            if isinstance(m, float) and not math.isfinite(m):
                raise ValueError("infinite mass is not supported")
            if v == 0:
                continue
            cleaned.append((v, m))
        for (v0, _), (v1, _) in zip(cleaned, cleaned[1:]):
            if not v0 > v1:
                raise ValueError("step values must be strictly decreasing")
        object.__setattr__(self, "steps", tuple(cleaned))

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "StepProfile":
        """Build from unsorted (value, mass) pairs, merging equal values."""
        acc: dict = {}
        for v, m in pairs:
            v = abs(v)
            acc[v] = acc.get(v, 0) + m
        return cls(tuple(sorted(((v, m) for v, m in acc.items() if m > 0), key=lambda s: s[0], reverse=True)))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def values(self):
        return [v for v, _ in self.steps]

    @property
    def masses(self):
        return [m for _, m in self.steps]

    def total_mass(self):
        return sum(self.masses) if self.steps else 0

    def cumulative(self):
        out, acc = [], 0
        for m in self.masses:
            acc = acc + m
            out.append(acc)
        return out

    def scaled(self, c) -> "StepProfile":
        c = abs(c)
        if c == 0:
            return StepProfile()
        return StepProfile(tuple((c * v, m) for v, m in self.steps))

    def dilated(self, lam) -> "StepProfile":
        return StepProfile(tuple((v, lam * m) for v, m in self.steps))

    def rearrangement(self, t):
        """f*(t) for t >= 0 (right-continuous)."""
        acc = 0
        for v, m in self.steps:
            acc = acc + m
            if t < acc:
                return v
        return 0

    def to_json(self) -> list:
        return [{"value": float(v), "mass": float(m)} for v, m in self.steps]

    @classmethod
    def from_json(cls, data) -> "StepProfile":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple((s["value"], s["mass"]) for s in data))


@dataclass
class GridFunction:
    """Samples of a scalar function on a uniform grid of cubic cells.

    ``origin`` is the lower corner of the grid, cell ``i`` has center
    ``origin + (i + 1/2) * spacing`` along each axis.
    """

    dim: int
    shape: tuple
    spacing: float
    origin: tuple
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.shape = tuple(int(s) for s in self.shape)
        self.origin = tuple(float(o) for o in self.origin)
        if len(self.shape) != self.dim or len(self.origin) != self.dim:
            raise ValueError("shape and origin must have dim entries")
        if not self.spacing > 0:
            raise ValueError("grid spacing must be positive")
        self.samples = np.asarray(self.samples, dtype=float).reshape(self.shape)

    @property
    def cell_measure(self) -> float:
        return float(self.spacing) ** self.dim

    def centers(self):
        axes = [self.origin[i] + (np.arange(self.shape[i]) + 0.5) * self.spacing for i in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij")

    def with_samples(self, samples) -> "GridFunction":
        return GridFunction(self.dim, self.shape, self.spacing, self.origin, np.asarray(samples, dtype=float))

    def conforms(self, other: "GridFunction") -> bool:
        return (
            self.dim == other.dim
            and self.shape == other.shape
            and math.isclose(self.spacing, other.spacing)
            and np.allclose(self.origin, other.origin)
        )

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "shape": list(self.shape),
            "spacing": self.spacing,
            "origin": list(self.origin),
            "samples": self.samples.ravel(order="C").tolist(),
        }

    @classmethod
    def from_json(cls, data) -> "GridFunction":
        if isinstance(data, str):
            data = json.loads(data)
        samples = np.asarray(data["samples"], dtype=float)
        shape = tuple(data["shape"])
        if samples.size != int(np.prod(shape)):
            raise ValueError("samples count does not match shape")
        return cls(data["dim"], shape, data["spacing"], tuple(data["origin"]), samples.reshape(shape))


def distribution(profile: StepProfile, t) -> float:
    """mu_f(t): total mass of the steps with value strictly above t."""
    if t < 0:
        raise ValueError("distribution is defined for t >= 0")
    return sum((m for v, m in profile.steps if v > t), 0)


def grid_to_profile(g: GridFunction) -> StepProfile:
    """Decreasing rearrangement of |g| with cell mass h**n."""
    vals, counts = np.unique(np.abs(g.samples.ravel()), return_counts=True)
    cell = g.cell_measure
    steps = [(float(v), float(c) * cell) for v, c in zip(vals[::-1], counts[::-1]) if v > 0]
    return StepProfile(tuple(steps))


# -- numerics ----------------------------------------------------------------

def _work(profile: StepProfile):
    """Values and masses in a common working type (float, or mpf when the
    profile carries extended-range numbers)."""
    nums = [x for step in profile.steps for x in step]
    if any(isinstance(x, (Surd, mpmath.mpf)) for x in nums):
        conv = lambda x: x.to_mpf() if isinstance(x, Surd) else mpmath.mpf(x)  # noqa: E731
        return True, [conv(v) for v in profile.values], [conv(m) for m in profile.masses]
    return False, [float(v) for v in profile.values], [float(m) for m in profile.masses]


def _pow_diff(lo, dm, a, use_mp):
    """(lo + dm)**a - lo**a without cancellation when dm << lo."""
    if use_mp:
        if lo == 0:
            return mpmath.power(dm, a)
        return mpmath.power(lo, a) * mpmath.expm1(a * mpmath.log1p(dm / lo))
    if lo == 0:
        return dm ** a
    return lo ** a * math.expm1(a * math.log1p(dm / lo))


def _sum(xs, use_mp):
    return mpmath.fsum(xs) if use_mp else math.fsum(xs)


def lorentz_norm(profile: StepProfile, p, q=1.0):
    """Lorentz (p, q) functional of the function whose rearrangement is
    ``profile``.

    For finite q each step of value v occupying the mass interval
    [M0, M0 + m) contributes ``v**q * (p/q) * ((M0 + m)**(q/p) - M0**(q/p))``;
    for q = inf the supremum of ``s**(1/p) f*(s)`` is attained as s tends to
    a right end of a step.
    """
    exp = LorentzExponents(p, q)
    if not profile.steps:
        return 0.0
    use_mp, vals, masses = _work(profile)
    p = mpmath.mpf(float(exp.p)) if use_mp else float(exp.p)
    if not exp.finite_q:
        acc, best = 0, 0
        for v, m in zip(vals, masses):
            acc = acc + m
            best = max(best, v * acc ** (1 / p))
        return best
    q = float(exp.q)
    if use_mp:
        q = mpmath.mpf(q)
    a = q / p
    terms, acc = [], 0
    for v, m in zip(vals, masses):
        terms.append(v ** q * _pow_diff(acc, m, a, use_mp))
        acc = acc + m
    total = (p / q) * _sum(terms, use_mp)
    return total ** (1 / q)


def weak_norm_mu(profile: StepProfile, p):
    """sup_t t * mu_f(t)**(1/p), the distribution-function form of the q = inf
    functional. As t increases to a step value v the level set {|f| > t}
    contains every step of value >= v."""
    if not profile.steps:
        return 0.0
    use_mp, vals, masses = _work(profile)
    p = mpmath.mpf(float(p)) if use_mp else float(p)
    best = 0
    for v in vals:
        mu_left = _sum([m for w, m in zip(vals, masses) if w >= v], use_mp)
        best = max(best, v * mu_left ** (1 / p))
    return best


def layercake_p1(profile: StepProfile, p):
    """Exact value of the layer integral  int_0^inf mu_f(s)**(1/p) ds.

    mu_f is constant on each gap (v_{i+1}, v_i] between consecutive values,
    equal to the cumulative mass of the steps above the gap.
    """
    if not float(p) > 1:
        raise ValueError("p must exceed 1")
    if not profile.steps:
        return 0.0
    use_mp, vals, masses = _work(profile)
    p = mpmath.mpf(float(p)) if use_mp else float(p)
    below = vals[1:] + [0]
    terms, acc = [], 0
    for v, nxt, m in zip(vals, below, masses):
        acc = acc + m
        terms.append(acc ** (1 / p) * (v - nxt))
    return _sum(terms, use_mp)


def lorentz_p1_symbolic(profile: StepProfile, p) -> dict:
    """The (p, 1) functional as an exact linear form  sum_M c_M * M**(1/p)
    over cumulative masses M, read off the piecewise integrals. Requires
    rational values, masses and p."""
    p = as_fraction(p)
    form: dict = {}
    acc = Fraction(0)
    for v, m in profile.steps:
        v, m = as_fraction(v), as_fraction(m)
        lo, hi = acc, acc + m
        # v * int_lo^hi t^(1/p - 1) dt = p v (hi^(1/p) - lo^(1/p))
        form[hi] = form.get(hi, 0) + p * v
        if lo:
            form[lo] = form.get(lo, 0) - p * v
        acc = hi
    return {k: c for k, c in form.items() if c}


def layercake_symbolic(profile: StepProfile) -> dict:
    """The layer integral as an exact linear form over cumulative masses."""
    form: dict = {}
    vals = [as_fraction(v) for v in profile.values]
    acc = Fraction(0)
    for i, m in enumerate(profile.masses):
        acc += as_fraction(m)
        gap = vals[i] - (vals[i + 1] if i + 1 < len(vals) else 0)
        if gap:
            form[acc] = form.get(acc, 0) + gap
    return form


# -- equal-mass cells (grid functions) ----------------------------------------

def sorted_weights(count: int, cell_measure: float, p, q=1.0) -> np.ndarray:
    """Weights w_i with  ||a||_{p,q}^q = sum_i w_i a_(i)^q  for nonnegative
    cell values sorted decreasingly, each cell of equal mass."""
    exp = LorentzExponents(p, q)
    if not exp.finite_q:
        raise ValueError("sorted weights are defined for finite q")
    p, q = float(exp.p), float(exp.q)
    a = q / p
    i = np.arange(count + 1, dtype=float)
    pw = (i * cell_measure) ** a
    return (p / q) * np.diff(pw)


def lorentz_norm_cells(values: np.ndarray, cell_measure: float, p, q=1.0, weights=None) -> float:
    """Lorentz norm of |values| where every entry carries ``cell_measure``."""
    exp = LorentzExponents(p, q)
    a = np.sort(np.abs(np.ravel(values)))[::-1]
    if a.size == 0 or a[0] == 0:
        return 0.0
    if not exp.finite_q:
        ranks = np.arange(1, a.size + 1) * cell_measure
        return float(np.max(a * ranks ** (1 / float(exp.p))))
    if weights is None:
        weights = sorted_weights(a.size, cell_measure, exp.p, exp.q)
    q = float(exp.q)
    return float(np.dot(weights, a ** q) ** (1 / q))


def lorentz_subgradient_cells(values: np.ndarray, cell_measure: float, p, q=1.0, weights=None):
    """(norm, subgradient) of the Lorentz norm of a nonnegative cell vector.

    The sorted-weight form is convex for q <= p since the weights are then
    nonincreasing; ties are broken by cell index so the result is
    deterministic.
    """
    exp = LorentzExponents(p, q)
    flat = np.abs(np.ravel(values))
    order = np.argsort(-flat, kind="stable")
    a = flat[order]
    grad = np.zeros_like(flat)
    if a.size == 0 or a[0] == 0:
        return 0.0, grad.reshape(np.shape(values))
    if not exp.finite_q:
        ranks = np.arange(1, a.size + 1) * cell_measure
        scores = a * ranks ** (1 / float(exp.p))
        i = int(np.argmax(scores))
        grad[order[i]] = ranks[i] ** (1 / float(exp.p))
        return float(scores[i]), grad.reshape(np.shape(values))
    if weights is None:
        weights = sorted_weights(a.size, cell_measure, exp.p, exp.q)
    q = float(exp.q)
    s = float(np.dot(weights, a ** q))
    norm = s ** (1 / q)
    if q == 1.0:
        grad[order] = weights
    else:
        grad[order] = weights * a ** (q - 1) * norm ** (1 - q)
    return norm, grad.reshape(np.shape(values))
