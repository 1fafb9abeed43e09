"""Grid-discretized Sobolev-Lorentz capacities.

Competitors live on the cells of a box [-B, B]^n with spacing h. The
gradient is taken by forward differences with zero extension past the box,
its magnitude is Euclidean, and the Lorentz norm of the gradient field uses
cell mass h^n. The cells touching the box boundary are held at 0 so that
the zero extension is an honest Lipschitz extension.

Four functionals are supported:

    gamma           ||Dg||^p                 g >= 1 on target
    gamma_rel       ||Dg||^p                 ... and g = 0 off the domain
    gamma_plus      ||g||^p + ||Dg||^p       g >= 1 on target
    gamma_plus_rel  ||g||^p + ||Dg||^p       ... and g = 0 off the domain

All norms are (p, q) Lorentz norms, q <= p, for which the sorted-weight
form is a convex function of the cell values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage, optimize

from .cantor import BudgetExceeded, CantorParams, Variant, word_budget
from .rearrange import (
    GridFunction,
    LorentzExponents,
    lorentz_norm,
    lorentz_norm_cells,
    lorentz_subgradient_cells,
    sorted_weights,
)
from .testfn import TestFunctionSpec, gradient_profile

__all__ = [
    "CapacityVariant",
    "MaskSpec",
    "CapacityProblem",
    "CapacityResult",
    "InfeasibleProblem",
    "forward_gradient",
    "gradient_magnitude",
    "objective",
    "minimize",
    "Refinement",
    "refine",
    "ramp_oracle",
    "radial_oracle",
    "ChainResult",
    "chain_check",
    "random_chain_instance",
    "CutoffSpec",
    "CutoffReport",
    "cutoff_multiply",
    "testfn_upper_bound",
    "cantor_core_centers",
]


class CapacityVariant(str, enum.Enum):
    GAMMA = "gamma"
    GAMMA_REL = "gamma_rel"
    GAMMA_PLUS = "gamma_plus"
    GAMMA_PLUS_REL = "gamma_plus_rel"

    @property
    def plus(self) -> bool:
        return self in (CapacityVariant.GAMMA_PLUS, CapacityVariant.GAMMA_PLUS_REL)

    @property
    def relative(self) -> bool:
        return self in (CapacityVariant.GAMMA_REL, CapacityVariant.GAMMA_PLUS_REL)


class InfeasibleProblem(ValueError):
    pass


# -- masks ---------------------------------------------------------------------

def cantor_core_centers(params: CantorParams, depth: int, budget: int | None = None) -> np.ndarray:
    """Float centers of the 2^(n*depth) generation-depth cubes, shape (m, n)."""
    geo = params.geometry
    n = params.n
    budget = word_budget() if budget is None else budget
    if n * depth > budget:
        raise BudgetExceeded(f"2^{n * depth} core cubes exceed the budget 2^{budget}")
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * n, indexing="ij")).reshape(n, -1).T
    centers = np.zeros((1, n))
    for k in range(1, depth + 1):
        off = float(geo.offset(k))
        centers = (centers[:, None, :] + off * signs[None, :, :]).reshape(-1, n)
    return centers


@dataclass(frozen=True)
class MaskSpec:
    """Geometric description of a cell set, re-evaluated on every lattice.

    kind "box": cells whose center lies in the closed cube Q(0, radius).
    kind "cells": explicit cell indices on a lattice of spacing ``base_h``;
        finer lattices take every sub-cell.
    kind "cantor": cells meeting a generation-``depth`` core cube.
    kind "all": every cell.
    """

    kind: str
    radius: float = 0.0
    cells: tuple = ()
    base_h: float = 0.0
    params: CantorParams | None = None
    depth: int = 0

    def build(self, shape, h, origin) -> np.ndarray:
        n = len(shape)
        mask = np.zeros(shape, dtype=bool)
        if self.kind == "all":
            mask[...] = True
            return mask
        axes = [origin[i] + (np.arange(shape[i]) + 0.5) * h for i in range(n)]
        if self.kind == "box":
            grids = np.meshgrid(*axes, indexing="ij")
            rho = np.max(np.abs(np.stack(grids)), axis=0)
            return rho <= self.radius + 1e-12 * max(1.0, self.radius)
        if self.kind == "cells":
            ratio = self.base_h / h
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise ValueError("explicit cells need the lattice spacing to divide the base spacing")
            r = int(round(ratio))
            for idx in self.cells:
                sl = tuple(slice(int(i) * r, (int(i) + 1) * r) for i in idx)
                mask[sl] = True
            return mask
        if self.kind == "cantor":
            centers = cantor_core_centers(self.params, self.depth)
            half = float(self.params.geometry.inner(self.depth))
            org = np.asarray(origin)
            lo = np.floor((centers - half - org) / h).astype(int)
            hi = np.floor((centers + half - org) / h).astype(int)
            lo = np.clip(lo, 0, np.array(shape) - 1)
            hi = np.clip(hi, 0, np.array(shape) - 1)
            for a, b in zip(lo, hi):
                mask[tuple(slice(x, y + 1) for x, y in zip(a, b))] = True
            return mask
        raise ValueError(f"unknown mask kind {self.kind!r}")

    def to_json(self) -> dict:
        if self.kind == "box":
            return {"box": self.radius}
        if self.kind == "cells":
            return {"cells": [list(c) for c in self.cells], "base_h": self.base_h}
        if self.kind == "cantor":
            return {"cantor": {"params": self.params.to_json(), "depth": self.depth}}
        return {"all": True}


# -- problems ------------------------------------------------------------------

@dataclass
class CapacityProblem:
    n: int
    exp: LorentzExponents
    variant: CapacityVariant
    half_width: float
    h: float
    target: MaskSpec
    domain: MaskSpec = field(default_factory=lambda: MaskSpec("all"))

    def __post_init__(self):
        if self.exp.finite_q and self.exp.q > self.exp.p:
            raise ValueError("the capacity functional is convex only for q <= p")
        if not self.exp.finite_q:
            raise ValueError("q = infinity is not supported by the solver")
        cells = 2 * self.half_width / self.h
        if abs(cells - round(cells)) > 1e-9:
            raise ValueError("2 * half_width must be a multiple of h")
        self.variant = CapacityVariant(self.variant)

    @property
    def cells_per_axis(self) -> int:
        return int(round(2 * self.half_width / self.h))

    @property
    def shape(self) -> tuple:
        return (self.cells_per_axis,) * self.n

    @property
    def origin(self) -> tuple:
        return (-self.half_width,) * self.n

    def lattice(self, samples=None) -> GridFunction:
        s = np.zeros(self.shape) if samples is None else samples
        return GridFunction(self.n, self.shape, self.h, self.origin, s)

    def masks(self):
        """(target, fixed_zero) boolean arrays; validates feasibility."""
        target = self.target.build(self.shape, self.h, self.origin)
        zero = np.zeros(self.shape, dtype=bool)
        for ax in range(self.n):
            idx = [slice(None)] * self.n
            idx[ax] = 0
            zero[tuple(idx)] = True
            idx[ax] = -1
            zero[tuple(idx)] = True
        if self.variant.relative:
            zero |= ~self.domain.build(self.shape, self.h, self.origin)
        if not target.any():
            raise InfeasibleProblem("target mask is empty")
        if (target & zero).any():
            raise InfeasibleProblem("target meets the cells held at zero (box boundary or outside the domain)")
        return target, zero

    def with_variant(self, variant) -> "CapacityProblem":
        return replace(self, variant=CapacityVariant(variant))

    def refined(self, h: float) -> "CapacityProblem":
        return replace(self, h=h)

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "p": float(self.exp.p),
            "q": float(self.exp.q),
            "variant": self.variant.value,
            "box": self.half_width,
            "h": self.h,
        }
        t = self.target.to_json()
        if "cantor" in t:
            out["target_from_cantor"] = t["cantor"]
        elif "box" in t:
            out["target_box"] = t["box"]
        else:
            out["target_cells"] = t["cells"]
        d = self.domain.to_json()
        if "box" in d:
            out["domain_box"] = d["box"]
        elif "cells" in d:
            out["domain_cells"] = d["cells"]
        return out

    @classmethod
    def from_json(cls, data) -> "CapacityProblem":
        h = float(data["h"])
        if "target_from_cantor" in data:
            tc = data["target_from_cantor"]
            params = CantorParams.from_json(tc["params"])
            target = MaskSpec("cantor", params=params, depth=int(tc["depth"]))
            n = params.n
        else:
            n = int(data["n"])
            if "target_box" in data:
                target = MaskSpec("box", radius=float(data["target_box"]))
            else:
                target = MaskSpec("cells", cells=tuple(tuple(c) for c in data["target_cells"]), base_h=h)
        if "domain_box" in data:
            domain = MaskSpec("box", radius=float(data["domain_box"]))
        elif "domain_cells" in data:
            domain = MaskSpec("cells", cells=tuple(tuple(c) for c in data["domain_cells"]), base_h=h)
        else:
            domain = MaskSpec("all")
        exp = LorentzExponents(float(data["p"]), data.get("q", 1.0))
        return cls(n, exp, CapacityVariant(data.get("variant", "gamma")), float(data["box"]), h, target, domain)


# -- discrete calculus -----------------------------------------------------------

def forward_gradient(g: np.ndarray, h: float) -> np.ndarray:
    """Forward differences with zero extension, shape (n, *g.shape)."""
    out = np.empty((g.ndim,) + g.shape)
    for ax in range(g.ndim):
        nxt = np.zeros_like(g)
        src = [slice(None)] * g.ndim
        dst = [slice(None)] * g.ndim
        src[ax] = slice(1, None)
        dst[ax] = slice(None, -1)
        nxt[tuple(dst)] = g[tuple(src)]
        out[ax] = (nxt - g) / h
    return out


def _gradient_adjoint(y: np.ndarray, h: float) -> np.ndarray:
    n = y.shape[0]
    out = np.zeros(y.shape[1:])
    for ax in range(n):
        prev = np.zeros_like(out)
        src = [slice(None)] * n
        dst = [slice(None)] * n
        src[ax] = slice(None, -1)
        dst[ax] = slice(1, None)
        prev[tuple(dst)] = y[ax][tuple(src)]
        out += (prev - y[ax]) / h
    return out


def gradient_magnitude(g: np.ndarray, h: float) -> np.ndarray:
    return np.sqrt(np.sum(forward_gradient(g, h) ** 2, axis=0))


def _samples(problem: CapacityProblem, g) -> np.ndarray:
    if isinstance(g, GridFunction):
        if not problem.lattice().conforms(g):
            raise ValueError("grid function does not match the problem lattice")
        return g.samples
    g = np.asarray(g, dtype=float)
    if g.shape != problem.shape:
        raise ValueError(f"samples of shape {g.shape} do not match the lattice {problem.shape}")
    return g


def objective(problem: CapacityProblem, g) -> float:
    g = _samples(problem, g)
    p, q = float(problem.exp.p), float(problem.exp.q)
    cell = problem.h ** problem.n
    val = lorentz_norm_cells(gradient_magnitude(g, problem.h), cell, p, q) ** p
    if problem.variant.plus:
        val += lorentz_norm_cells(g, cell, p, q) ** p
    return val


class _Evaluator:
    def __init__(self, problem: CapacityProblem):
        self.problem = problem
        self.p = float(problem.exp.p)
        self.q = float(problem.exp.q)
        self.cell = problem.h ** problem.n
        self.weights = sorted_weights(int(np.prod(problem.shape)), self.cell, self.p, self.q)

    def __call__(self, g):
        h, p, q = self.problem.h, self.p, self.q
        D = forward_gradient(g, h)
        mag = np.sqrt(np.sum(D ** 2, axis=0))
        N, s = lorentz_subgradient_cells(mag, self.cell, p, q, self.weights)
        val = N ** p
        safe = np.where(mag > 0, mag, 1.0)
        dirs = np.where(mag > 0, D / safe, 0.0)
        grad = p * N ** (p - 1) * _gradient_adjoint(s * dirs, h) if N > 0 else np.zeros_like(g)
        if self.problem.variant.plus:
            Ng, sg = lorentz_subgradient_cells(g, self.cell, p, q, self.weights)
            val += Ng ** p
            if Ng > 0:
                grad = grad + p * Ng ** (p - 1) * sg * np.sign(g)
        return val, grad


# -- solver ------------------------------------------------------------------------

@dataclass
class CapacityResult:
    value: float
    minimizer: GridFunction
    iterations: int
    converged: bool
    trace: list = field(repr=False)  # (iteration, objective, step, best)
    scheme: str = "forward differences, zero extension, Euclidean magnitude"
    gap: float = math.nan

    @property
    def certificate(self) -> str:
        return "converged" if self.converged else "best-found"

    def to_json(self, include_minimizer: bool = False) -> dict:
        out = {
            "value": self.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "gap": self.gap,
            "scheme": self.scheme,
        }
        if include_minimizer:
            out["minimizer"] = self.minimizer.to_json()
        return out


def _ramp_start(problem, target, zero):
    """Best of a few chessboard ramps from the target toward the zero cells."""
    dist = ndimage.distance_transform_cdt(~target, metric="chessboard").astype(float)
    room = dist[zero].min()
    best = None
    for width in (room, room / 2, room / 4):
        if width < 1:
            continue
        g = np.clip(1 - dist / width, 0, 1)
        g[zero] = 0.0
        val = objective(problem, g)
        if best is None or val < best[0]:
            best = (val, g)
    return best[1]


def minimize(
    problem: CapacityProblem,
    start=None,
    max_iter: int = 20000,
    tol: float = 1e-5,
    patience: int = 100,
    delta0: float = 0.25,
) -> CapacityResult:
    """Projected subgradient descent with a Polyak target level.

    The target level is best - delta; delta is halved whenever ``patience``
    iterations pass without the best value dropping by delta/2, and the run
    counts as converged once delta < tol * best.
    """
    target, zero = problem.masks()
    free = ~(target | zero)

    def project(g):
        g = np.clip(g, 0.0, 1.0)
        g[target] = 1.0
        g[zero] = 0.0
        return g

    if start is None:
        g = _ramp_start(problem, target, zero)
    else:
        g = np.array(_samples(problem, start), dtype=float)
    g = project(g)
    f = _Evaluator(problem)
    val, grad = f(g)
    best, best_g = val, g.copy()
    delta = delta0 * best
    mark, since = best, 0
    trace = [(0, val, 0.0, best)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = np.where(free, grad, 0.0)
        nrm2 = float(np.sum(grad * grad))
        if nrm2 == 0.0:
            converged = True
            break
        step = (val - (best - delta)) / nrm2
        g = project(g - step * grad)
        val, grad = f(g)
        if val < best:
            best, best_g = val, g.copy()
        trace.append((it, val, step, best))
        if best <= mark - delta / 2:
            mark, since = best, 0
        else:
            since += 1
            if since >= patience:
                delta /= 2
                mark, since = best, 0
        if delta < tol * best:
            converged = True
            break
    return CapacityResult(best, problem.lattice(best_g), it, converged, trace, gap=delta)


# -- refinement and oracles -------------------------------------------------------------

@dataclass
class Refinement:
    hs: tuple
    values: tuple
    extrapolated: float
    order: float
    monotone: bool
    results: list = field(repr=False, default_factory=list)

    def to_json(self) -> dict:
        return {
            "h_sequence": list(self.hs),
            "values": list(self.values),
            "extrapolated_value": self.extrapolated,
            "order": self.order,
            "monotone": self.monotone,
            "iterations": [r.iterations for r in self.results],
            "converged": all(r.converged for r in self.results),
        }


def richardson(values, ratio: float = 2.0):
    """Extrapolate h -> 0 from values at h, h/ratio, h/ratio^2.

    The order is estimated from the three values when the differences
    shrink monotonically; otherwise first order is assumed.
    """
    v1, v2, v3 = values
    d1, d2 = v1 - v2, v2 - v3
    if d1 * d2 > 0 and abs(d1) > abs(d2):
        r = d1 / d2
        return v3 - d2 / (r - 1), math.log(r, ratio), True
    return v3 + (v3 - v2) / (ratio - 1), 1.0, False


def refine(problem: CapacityProblem, levels: int = 3, **kw) -> Refinement:
    if levels != 3:
        raise ValueError("Richardson extrapolation uses exactly three grids")
    hs = tuple(problem.h / 2 ** i for i in range(levels))
    results = [minimize(problem.refined(h), **kw) for h in hs]
    vals = tuple(r.value for r in results)
    extra, order, mono = richardson(vals)
    return Refinement(hs, vals, extra, order, mono, results)


def _ring_value(n, p, q, r, R):
    """||D ramp||^p for the l-infinity ramp from Q(0, r) to Q(0, R)."""
    mass = 2 ** n * (R ** n - r ** n)
    exp = LorentzExponents(p, q)
    norm = float(lorentz_norm_single(mass, 1.0 / (R - r), exp))
    return norm ** float(exp.p)


def lorentz_norm_single(mass, value, exp: LorentzExponents):
    """Lorentz norm of value * indicator of a set of the given mass."""
    p = float(exp.p)
    if not exp.finite_q:
        return value * mass ** (1 / p)
    q = float(exp.q)
    return value * mass ** (1 / p) * (p / q) ** (1 / q)


def ramp_oracle(n: int, p, r: float, q=1.0, R: float | None = None) -> float:
    """Closed-form ||Df||^p of the l-infinity ramp 1 on Q(0, r), 0 off Q(0, R)."""
    R = 2 * r if R is None else R
    if not R > r > 0:
        raise ValueError("need 0 < r < R")
    return _ring_value(n, float(p), q, r, R)


def radial_oracle(n: int, p, r: float, R_max: float, q=1.0):
    """Best single-ramp competitor over outer radii rho in (r, R_max].

    Returns (value, rho). For the relative problem in Q(0, 2r) the optimum
    sits at rho = 2r whenever the value decreases in rho.
    """
    fn = lambda rho: _ring_value(n, float(p), q, r, rho)  # noqa: E731
    res = optimize.minimize_scalar(fn, bounds=(r * (1 + 1e-9), R_max), method="bounded", options={"xatol": 1e-10 * R_max})
    cand = [(res.fun, res.x), (fn(R_max), R_max)]
    return min(cand)


# -- capacity chain ---------------------------------------------------------------------------

@dataclass
class ChainResult:
    values: dict
    slack: float
    holds: bool
    converged: bool

    def to_json(self) -> dict:
        return {"values": dict(self.values), "slack": self.slack, "holds": self.holds, "converged": self.converged}


def chain_check(problem: CapacityProblem, tol: float = 1e-6, **kw) -> ChainResult:
    """Solve all four functionals on the problem's lattice and check

        gamma <= gamma_plus <= gamma_plus_rel,  gamma <= gamma_rel <= gamma_plus_rel.

    The solves are warm-started from the more constrained problems so the
    best-found values respect the inclusions of the feasible sets.
    """
    V = CapacityVariant
    res = {}
    res[V.GAMMA_PLUS_REL] = minimize(problem.with_variant(V.GAMMA_PLUS_REL), **kw)
    g_pr = res[V.GAMMA_PLUS_REL].minimizer
    res[V.GAMMA_REL] = minimize(problem.with_variant(V.GAMMA_REL), start=g_pr, **kw)
    res[V.GAMMA_PLUS] = minimize(problem.with_variant(V.GAMMA_PLUS), start=g_pr, **kw)
    whole = problem.with_variant(V.GAMMA)
    starts = [res[V.GAMMA_REL].minimizer, res[V.GAMMA_PLUS].minimizer]
    start = min(starts, key=lambda s: objective(whole, s))
    res[V.GAMMA] = minimize(whole, start=start, **kw)
    vals = {v.value: r.value for v, r in res.items()}
    g, gr, gp, gpr = (vals[v.value] for v in (V.GAMMA, V.GAMMA_REL, V.GAMMA_PLUS, V.GAMMA_PLUS_REL))
    slack = min(gp - g, gpr - gp, gr - g, gpr - gr)
    return ChainResult(vals, slack, slack >= -tol, all(r.converged for r in res.values()))


def random_chain_instance(rng: np.random.Generator, n: int = 2, p: float = 1.5, q: float = 1.0, cells: int = 24, h: float = 0.125) -> CapacityProblem:
    """Random box target E inside a random box domain G, both away from the
    box boundary."""
    half = cells * h / 2
    shape = (cells,) * n
    lo_g = rng.integers(2, cells // 3, size=n)
    hi_g = rng.integers(2 * cells // 3, cells - 2, size=n)
    lo_e = np.array([rng.integers(a + 1, b - 1) for a, b in zip(lo_g, hi_g)])
    hi_e = np.array([rng.integers(a + 1, min(a + 4, b)) for a, b in zip(lo_e, hi_g)])
    E = [tuple(idx) for idx in np.ndindex(*shape) if all(lo_e[i] <= idx[i] < hi_e[i] for i in range(n))]
    G = [tuple(idx) for idx in np.ndindex(*shape) if all(lo_g[i] <= idx[i] < hi_g[i] for i in range(n))]
    return CapacityProblem(
        n,
        LorentzExponents(p, q),
        CapacityVariant.GAMMA,
        half,
        h,
        MaskSpec("cells", cells=tuple(E), base_h=h),
        MaskSpec("cells", cells=tuple(G), base_h=h),
    )


# -- cutoff ----------------------------------------------------------------------------------------

@dataclass(frozen=True)
class CutoffSpec:
    """eta = 1 on ``inner``, 0 off ``support``, linear in the chessboard
    distance to ``inner`` in between; ``M`` bounds the discrete |D eta|."""

    inner: np.ndarray
    support: np.ndarray
    M: float

    def __post_init__(self):
        if self.M <= 1:
            raise ValueError("the Lipschitz bound M must exceed 1")
        if (self.inner & ~self.support).any():
            raise ValueError("eta_inner must lie inside eta_support")


@dataclass
class CutoffReport:
    eta: np.ndarray = field(repr=False)
    width: float
    max_slope: float
    norm_v: float
    norm_Dv: float
    norm_vt: float
    norm_Dvt: float
    term_M_v: float  # M * ||v chi_support||
    term_Dv: float  # ||Dv chi_support||

    @property
    def product_bound(self) -> float:
        return self.term_M_v + self.term_Dv

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "max_slope": self.max_slope,
            "norm_v": self.norm_v,
            "norm_Dv": self.norm_Dv,
            "norm_vt": self.norm_vt,
            "norm_Dvt": self.norm_Dvt,
            "term_M_v": self.term_M_v,
            "term_Dv": self.term_Dv,
            "product_bound": self.product_bound,
        }


def cutoff_multiply(v: GridFunction, spec: CutoffSpec, p=1.5, q=1.0):
    """v~ = eta v together with the norms entering the product rule.

    The discrete product rule D(eta v) = eta(. + e_i) D_i v + v D_i eta gives
    |D v~| <= |D v| chi + |v| |D eta| pointwise, so ||D v~|| is at most
    ||D v chi|| + M ||v chi|| with chi the indicator of the support.
    """
    inner, support = np.asarray(spec.inner, bool), np.asarray(spec.support, bool)
    if inner.shape != v.shape or support.shape != v.shape:
        raise ValueError("cutoff regions do not conform to the lattice")
    h = v.spacing
    if support.all():
        eta = np.ones(v.shape)
        width = math.inf
    else:
        if not inner.any():
            raise ValueError("eta_inner is empty")
        dist = ndimage.distance_transform_cdt(~inner, metric="chessboard").astype(float)
        room = dist[~support].min()  # first cell off the support, in cells
        width = room * h
        eta = np.clip(1 - dist / room, 0, 1)
    slope = float(gradient_magnitude(eta, h).max())
    # the box edge acts as a zero extension; ignore it when eta fills the box
    if support.all():
        slope = 0.0
    if slope > spec.M * (1 + 1e-12):
        raise ValueError(f"the available ramp needs slope {slope:.6g} > M = {spec.M}")
    cell = v.cell_measure
    s = v.samples
    vt = eta * s
    Dv = gradient_magnitude(s, h)
    Dvt = gradient_magnitude(vt, h) if not support.all() else Dv
    # forward differences reach one cell past the support
    chi_grad = ndimage.binary_dilation(support, structure=np.ones((3,) * v.dim)).astype(float)
    nrm = lambda a: lorentz_norm_cells(a, cell, p, q)  # noqa: E731
    report = CutoffReport(
        eta=eta,
        width=width,
        max_slope=slope,
        norm_v=nrm(s),
        norm_Dv=nrm(Dv),
        norm_vt=nrm(vt),
        norm_Dvt=nrm(Dvt),
        term_M_v=spec.M * nrm(s * chi_grad),
        term_Dv=nrm(Dv * chi_grad),
    )
    return v.with_samples(vt), report


# -- test-function bound ----------------------------------------------------------------------------

def testfn_upper_bound(params: CantorParams, j: int, q=1.0, p=None) -> float:
    """||Df_j||_{p,q}^p, an upper bound for gamma_{p,q}(E)."""
    p = float(params.p if p is None else p)
    spec = TestFunctionSpec(params, j)
    return float(lorentz_norm(gradient_profile(spec), p, q)) ** p


testfn_upper_bound.__test__ = False  # keep pytest from collecting it
