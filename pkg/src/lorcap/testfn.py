"""Test-function sequences f_j for the Cantor constructions.

f_j is l-infinity radial on every frame: on a generation-k frame
(j <= k <= J) it rises linearly from the plateau P_k at the outer boundary
to P_(k+1) at the inner boundary, where

    P_k = C_j^-1 * sum_{i=j}^{k-1} 1/i,    P_j = 0,  P_(J+1) = 1,

J = J(j) is the least index with C_j = sum_{k=j}^J 1/k >= 1. It vanishes
outside the generation-(j-1) core cubes and equals 1 on the generation-J
core cubes. Since |grad |x|_inf| = 1 almost everywhere, |Df_j| is constant
(the ramp slope) on each frame generation, so its rearrangement is an exact
step profile.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import mpmath
import numpy as np

from . import cantor
from .cantor import CantorParams, Variant
from .rearrange import LorentzExponents, StepProfile, lorentz_norm
from .surd import Surd, as_fraction, pow2

__all__ = [
    "ramp_bounds",
    "TestFunctionSpec",
    "evaluate_fj",
    "sample_fj",
    "sample_gradient",
    "gradient_profile",
    "unscaled_gradient_profile",
    "Piece",
    "value_pieces",
    "pieces_lorentz_norm",
    "value_profile_envelope",
    "NormRow",
    "norm_table",
    "table_csv",
    "reference_tail",
]

MP_DPS = 40


def ramp_bounds(j: int):
    """(J, C_j): least J with sum_{k=j}^J 1/k >= 1, and that sum (exact)."""
    if j < 1:
        raise ValueError("j must be >= 1")
    total = Fraction(0)
    k = j
    while True:
        total += Fraction(1, k)
        if total >= 1:
            return k, total
        k += 1


@dataclass(frozen=True)
class TestFunctionSpec:
    params: CantorParams
    j: int
    J: int = field(init=False)
    Cj: Fraction = field(init=False)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        J, Cj = ramp_bounds(self.j)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "Cj", Cj)

    @property
    def geometry(self):
        return self.params.geometry

    def plateau(self, k: int) -> Fraction:
        """Value on the outer boundary of the generation-k frames."""
        if k <= self.j:
            return Fraction(0)
        if k > self.J:
            return Fraction(1)
        return self._partial_sums[k - self.j] / self.Cj

    @cached_property
    def _partial_sums(self):
        # _partial_sums[i] = sum_{m=j}^{j+i-1} 1/m
        out = [Fraction(0)]
        for m in range(self.j, self.J + 1):
            out.append(out[-1] + Fraction(1, m))
        return out

    def slope(self, k: int) -> Surd:
        """|Df_j| on the generation-k frames."""
        if not self.j <= k <= self.J:
            return Surd(0)
        geo = self.geometry
        rise = Fraction(1, k) / self.Cj
        return Surd(rise) / (geo.outer(k) - geo.inner(k))

    def unscaled_slope(self, k: int) -> Surd:
        """The gradient bound as displayed for each construction, without
        the 1/C_j normalisation of the ramp."""
        beta = self.params.beta
        top = pow2(beta - k * (beta + 1))
        bottom = pow2(-k * (beta + 1))
        if self.params.variant is Variant.UNIFORM:
            return Surd(Fraction(1, k)) / (top - bottom)
        return Surd(Fraction(k - 1, k)) / (k * top - (k - 1) * bottom)

    @cached_property
    def _floats(self):
        geo = self.geometry
        ks = range(1, self.J + 1)
        return {
            "offset": [0.0] + [float(geo.offset(k)) for k in ks],
            "outer": [1.0] + [float(geo.outer(k)) for k in ks],
            "inner": [1.0] + [float(geo.inner(k)) for k in ks],
            "plateau": [float(self.plateau(k)) for k in range(0, self.J + 2)],
            "slope": [0.0] + [float(self.slope(k)) for k in ks],
        }


def evaluate_fj(spec: TestFunctionSpec, x, exact: bool = False):
    """f_j(x) by exact descent through the construction.

    Boundary points need no special treatment: f_j is continuous and the
    ramp formula agrees with the neighbouring plateau on every boundary.
    """
    geo = spec.geometry
    xs = [xi if isinstance(xi, Surd) else Surd.coerce(as_fraction(xi)) for xi in x]
    if len(xs) != geo.n:
        raise ValueError(f"point must have {geo.n} coordinates")
    if any(abs(xi) > 1 for xi in xs):
        raise cantor.DomainError("point lies outside Q(0,1)")
    c = [Surd(0)] * geo.n
    value = None
    for k in range(1, spec.J + 1):
        off = geo.offset(k)
        c = [ci + off * (1 if (xi - ci).sign() >= 0 else -1) for xi, ci in zip(xs, c)]
        rho = max(abs(xi - ci) for xi, ci in zip(xs, c))
        outer, inner = geo.outer(k), geo.inner(k)
        if rho >= outer:
            value = Surd(spec.plateau(k))
            break
        if rho > inner:
            value = spec.plateau(k) + spec.slope(k) * (outer - rho)
            break
    if value is None:
        value = Surd(1)
    return value if exact else float(value)


def sample_fj(spec: TestFunctionSpec, X: np.ndarray) -> np.ndarray:
    """Vectorized floating-point f_j at the rows of X (shape (m, n))."""
    F = spec._floats
    cls = cantor.classify_points(spec.geometry, X, spec.J)
    kind, gen, rho = cls["kind"], cls["gen"], cls["rho"]
    out = np.ones(kind.shape)
    plateau = np.asarray(F["plateau"])
    outer = np.asarray(F["outer"])
    slope = np.asarray(F["slope"])
    gap = kind == cantor.GAP
    out[gap] = plateau[gen[gap]]
    fr = kind == cantor.FRAME
    g = gen[fr]
    out[fr] = plateau[g] + slope[g] * (outer[g] - rho[fr])
    return np.clip(out, 0.0, 1.0)


def sample_gradient(spec: TestFunctionSpec, X: np.ndarray) -> np.ndarray:
    """|Df_j| at the rows of X (a.e. defined: the frame slope or 0)."""
    F = spec._floats
    cls = cantor.classify_points(spec.geometry, X, spec.J)
    out = np.zeros(cls["kind"].shape)
    fr = cls["kind"] == cantor.FRAME
    out[fr] = np.asarray(F["slope"])[cls["gen"][fr]]
    return out


def _to_mp(x):
    return x.to_mpf() if isinstance(x, Surd) else mpmath.mpf(x)


def _profile_from(spec, value_of, exact):
    steps = []
    with mpmath.workdps(MP_DPS):
        for k in range(spec.J, spec.j - 1, -1):
            v = value_of(k)
            m = cantor.generation_measure(spec.params, k)
            steps.append((v, m) if exact else (_to_mp(v), _to_mp(m)))
    return StepProfile(tuple(steps))


def gradient_profile(spec: TestFunctionSpec, exact: bool = False) -> StepProfile:
    """Rearrangement of |Df_j|: one step per generation k in [j, J].

    Slopes grow with k, so the steps come in order k = J, J-1, ..., j. With
    ``exact`` the entries are :class:`Surd` numbers, otherwise mpmath floats
    (the masses underflow IEEE doubles for large k).
    """
    return _profile_from(spec, spec.slope, exact)


def unscaled_gradient_profile(spec: TestFunctionSpec) -> StepProfile:
    return _profile_from(spec, spec.unscaled_slope, False)


@dataclass(frozen=True)
class Piece:
    """f*(s) = a - b * s**(1/n) for s in [s0, s1)."""

    s0: object
    s1: object
    a: object
    b: object = 0


def value_pieces(spec: TestFunctionSpec) -> list:
    """Exact decreasing rearrangement of f_j as radial pieces.

    For t between P_k and P_(k+1) the superlevel set {f_j > t} is the union
    of the 2^(nk) cubes Q(c_w, rho) with rho solving the ramp equation, so
    f*(s) = P_k + slope_k * (outer_k - s**(1/n) / 2^(k+1)).
    """
    geo, n = spec.geometry, spec.params.n
    pieces = []
    with mpmath.workdps(MP_DPS):
        mp = _to_mp
        core = cantor.core_measure(spec.params, spec.J)
        pieces.append(Piece(mpmath.mpf(0), mp(core), mpmath.mpf(1), mpmath.mpf(0)))
        for k in range(spec.J, spec.j - 1, -1):
            s_in = cantor.core_measure(spec.params, k)
            s_out = Surd(2 ** (n * k)) * (2 * geo.outer(k)) ** n
            slope = spec.slope(k)
            a = spec.plateau(k) + slope * geo.outer(k)
            b = slope * Fraction(1, 2 ** (k + 1))
            pieces.append(Piece(mp(s_in), mp(s_out), mp(a), mp(b)))
            pk = spec.plateau(k)
            if pk > 0 and not cantor.gap_measure(spec.params, k).is_zero():
                pieces.append(Piece(mp(s_out), mp(cantor.core_measure(spec.params, k - 1)), mp(Surd(pk)), mpmath.mpf(0)))
    return pieces


def _piece_integral(pc: Piece, n: int, p, q):
    """int_{s0}^{s1} s^(q/p - 1) (a - b s^(1/n))^q ds."""
    e0 = q / p
    if pc.b == 0:
        return pc.a ** q * (pc.s1 ** e0 - pc.s0 ** e0) / e0
    if q == int(q):
        qi = int(q)
        total = mpmath.mpf(0)
        for i in range(qi + 1):
            e = e0 + mpmath.mpf(i) / n
            total += mpmath.binomial(qi, i) * pc.a ** (qi - i) * (-pc.b) ** i * (pc.s1 ** e - pc.s0 ** e) / e
        return total
    f = lambda s: s ** (e0 - 1) * max(pc.a - pc.b * s ** (mpmath.mpf(1) / n), 0) ** q  # noqa: E731
    return mpmath.quad(f, [pc.s0, pc.s1])


def _piece_sup(pc: Piece, n: int, p):
    """sup of s^(1/p) (a - b s^(1/n)) over (s0, s1]."""
    g = lambda s: s ** (1 / p) * (pc.a - pc.b * s ** (mpmath.mpf(1) / n))  # noqa: E731
    best = g(pc.s1)
    if pc.b > 0:
        s_crit = (pc.a * n / (pc.b * (n + p))) ** n
        if pc.s0 < s_crit < pc.s1:
            best = max(best, g(s_crit))
    return best


def pieces_lorentz_norm(pieces, n: int, p, q=1.0) -> float:
    exp = LorentzExponents(p, q)
    with mpmath.workdps(MP_DPS):
        p = mpmath.mpf(float(exp.p))
        if not exp.finite_q:
            return float(max(_piece_sup(pc, n, p) for pc in pieces))
        q = mpmath.mpf(float(exp.q))
        total = mpmath.fsum(_piece_integral(pc, n, p, q) for pc in pieces)
        return float(total ** (1 / q))


def value_profile_envelope(spec: TestFunctionSpec, refine: int = 8) -> StepProfile:
    """Step profile dominating f_j*: every radial piece is cut into
    ``refine`` equal mass slices, each carrying its largest value."""
    n = spec.params.n
    steps = []
    with mpmath.workdps(MP_DPS):
        for pc in value_pieces(spec):
            if pc.b == 0:
                steps.append((pc.a, pc.s1 - pc.s0))
                continue
            edges = [pc.s0 + (pc.s1 - pc.s0) * i / refine for i in range(refine + 1)]
            for lo, hi in zip(edges, edges[1:]):
                steps.append((pc.a - pc.b * lo ** (mpmath.mpf(1) / n), hi - lo))
    merged = []
    for v, m in steps:
        if merged and not v < merged[-1][0]:
            merged[-1] = (merged[-1][0], merged[-1][1] + m)
        else:
            merged.append((v, m))
    return StepProfile(tuple((v, m) for v, m in merged if v > 0))


def reference_tail(spec: TestFunctionSpec, q) -> float:
    """Comparison sums: sum k^-q (uniform) or sum k^(-n/p) (harmonic), k in [j, J]."""
    ks = range(spec.j, spec.J + 1)
    if spec.params.variant is Variant.HARMONIC:
        e = spec.params.n / float(spec.params.p)
        return math.fsum(k ** -e for k in ks)
    if q == math.inf:
        return 1.0 / spec.j
    return math.fsum(k ** -float(q) for k in ks)


@dataclass(frozen=True)
class NormRow:
    j: int
    J: int
    Cj: Fraction
    norm_f: float
    norm_Df: float
    reference_tail: float
    norm_Df_unscaled: float

    @property
    def ratio(self) -> float:
        return self.norm_Df / self.reference_tail


def norm_table(params: CantorParams, q=1.0, j_range=range(2, 11), p=None) -> list:
    """Exact Lorentz norms of f_j and |Df_j| for j in ``j_range``.

    ``p`` defaults to the construction exponent.
    """
    p = params.p if p is None else p
    exp = LorentzExponents(float(p), q)
    rows = []
    for j in j_range:
        spec = TestFunctionSpec(params, j)
        rows.append(
            NormRow(
                j=j,
                J=spec.J,
                Cj=spec.Cj,
                norm_f=pieces_lorentz_norm(value_pieces(spec), params.n, exp.p, exp.q),
                norm_Df=float(lorentz_norm(gradient_profile(spec), exp.p, exp.q)),
                reference_tail=reference_tail(spec, exp.q),
                norm_Df_unscaled=float(lorentz_norm(unscaled_gradient_profile(spec), exp.p, exp.q)),
            )
        )
    return rows


def table_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "J", "Cj", "norm_f", "norm_Df", "reference_tail", "ratio", "norm_Df_unscaled"])
    for r in rows:
        w.writerow(
            [r.j, r.J, f"{r.Cj.numerator}/{r.Cj.denominator}", repr(r.norm_f), repr(r.norm_Df),
             repr(r.reference_tail), repr(r.ratio), repr(r.norm_Df_unscaled)]
        )
    return buf.getvalue()
