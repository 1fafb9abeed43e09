import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorcap.cantor import CantorParams, Variant
from lorcap.capacity import (
    CapacityProblem,
    CapacityVariant,
    CutoffSpec,
    InfeasibleProblem,
    MaskSpec,
    _Evaluator,
    _gradient_adjoint,
    chain_check,
    cutoff_multiply,
    forward_gradient,
    gradient_magnitude,
    lorentz_norm_single,
    minimize,
    objective,
    radial_oracle,
    ramp_oracle,
    random_chain_instance,
    richardson,
    testfn_upper_bound,
)
from lorcap.rearrange import GridFunction, LorentzExponents, lorentz_norm
from lorcap.testfn import TestFunctionSpec, gradient_profile

EXP = LorentzExponents(1.5, 1.0)


def annulus(h=0.125, variant="gamma_rel", box=1.25):
    return CapacityProblem(2, EXP, variant, box, h, MaskSpec("box", radius=0.5), MaskSpec("box", radius=1.0))


def linf_ramp(problem, r, R):
    axes = [problem.origin[i] + (np.arange(problem.shape[i]) + 0.5) * problem.h for i in range(problem.n)]
    rho = np.max(np.abs(np.stack(np.meshgrid(*axes, indexing="ij"))), axis=0)
    return np.clip((R - rho) / (R - r), 0, 1)


# -- discrete calculus -----------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(5,), (4, 6), (3, 4, 5)]))
def test_gradient_adjoint_identity(seed, shape):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=shape)
    y = rng.normal(size=(len(shape),) + shape)
    h = 0.3
    assert np.sum(forward_gradient(g, h) * y) == pytest.approx(np.sum(g * _gradient_adjoint(y, h)), rel=1e-10, abs=1e-10)


def test_gradient_of_linear_function():
    x = np.arange(6.0)
    g = np.add.outer(2 * x, 3 * x)  # 2i + 3j on cells of size 1
    D = forward_gradient(g, 1.0)
    assert np.allclose(D[0][:-1], 2) and np.allclose(D[1][:, :-1], 3)
    # zero extension past the last cell
    assert np.allclose(D[0][-1], -g[-1])


def test_subgradient_supports_objective():
    prob = annulus(h=0.25)
    rng = np.random.default_rng(5)
    for variant in CapacityVariant:
        pv = prob.with_variant(variant)
        ev = _Evaluator(pv)
        for _ in range(10):
            a, b = rng.random(pv.shape), rng.random(pv.shape)
            fa, ga = ev(a)
            assert fa == pytest.approx(objective(pv, a), rel=1e-12)
            assert objective(pv, b) >= fa + np.sum(ga * (b - a)) - 1e-9


# -- oracles -----------------------------------------------------------------------------

def test_lorentz_single_matches_general_norm():
    from lorcap.rearrange import StepProfile

    for p, q in ((1.5, 1.0), (2.0, 2.0), (3.0, 1.5), (2.0, "inf")):
        e = LorentzExponents(p, q)
        assert lorentz_norm_single(3.0, 2.0, e) == pytest.approx(float(lorentz_norm(StepProfile.from_pairs([(2.0, 3.0)]), p, q)), rel=1e-12)


def test_ramp_oracle_l2_closed_form():
    # for p = q = 2: |Df|^2 = mass * slope^2 = 4(R^2 - r^2)/(R - r)^2 = 4(R + r)/(R - r)
    assert ramp_oracle(2, 2.0, 0.5, q=2.0, R=1.0) == pytest.approx(12.0, rel=1e-12)
    with pytest.raises(ValueError):
        ramp_oracle(2, 1.5, 1.0, R=0.5)


def test_radial_oracle_against_scan():
    val, rho = radial_oracle(2, 1.5, 0.5, 3.0)
    scan = min(ramp_oracle(2, 1.5, 0.5, R=R) for R in np.linspace(0.5001, 3.0, 5000))
    assert val <= scan * (1 + 1e-9)
    assert val == pytest.approx(scan, rel=1e-4)


def test_discrete_ramp_approaches_oracle():
    prob = annulus(h=1 / 64)
    g = linf_ramp(prob, 0.5, 1.0)
    disc = objective(prob, g)
    assert disc == pytest.approx(ramp_oracle(2, 1.5, 0.5), rel=0.05)


def test_richardson_exact_on_linear_and_geometric_data():
    v, order, mono = richardson([3.0, 2.0, 1.5])
    assert v == pytest.approx(1.0) and order == pytest.approx(1.0) and mono
    v, order, mono = richardson([1 + 0.25, 1 + 0.0625, 1 + 0.015625])
    assert v == pytest.approx(1.0) and order == pytest.approx(2.0)
    v, order, mono = richardson([1.0, 2.0, 1.5])
    assert not mono and order == 1.0


# -- problems and solver ----------------------------------------------------------------------

def test_masks_and_feasibility():
    prob = annulus(h=0.25)
    target, zero = prob.masks()
    assert target.sum() == 16  # cell centers in [-0.5, 0.5]^2 at h = 1/4
    assert zero[0].all() and zero[:, -1].all()
    assert not (target & zero).any()
    bad = CapacityProblem(2, EXP, "gamma_rel", 1.25, 0.25, MaskSpec("box", radius=1.0), MaskSpec("box", radius=0.5))
    with pytest.raises(InfeasibleProblem):
        bad.masks()
    with pytest.raises(ValueError):
        CapacityProblem(2, LorentzExponents(1.5, 2.0), "gamma", 1.0, 0.25, MaskSpec("box", radius=0.5))
    with pytest.raises(ValueError):
        CapacityProblem(2, EXP, "gamma", 1.0, 0.3, MaskSpec("box", radius=0.5))


def test_cells_mask_refines():
    spec = MaskSpec("cells", cells=((1, 2),), base_h=0.5)
    m = spec.build((8, 8), 0.25, (-1, -1))
    assert m.sum() == 4 and m[2:4, 4:6].all()
    with pytest.raises(ValueError):
        spec.build((6, 6), 1 / 3, (-1, -1))


def test_cantor_mask_covers_core_cubes():
    params = CantorParams(2, Fraction(3, 2))
    m = MaskSpec("cantor", params=params, depth=1).build((32, 32), 1 / 16, (-1, -1))
    # each core cube of half-side 1/16 around (+-1/2, +-1/2) meets 3x3 cells
    assert m.sum() == 4 * 9


def test_problem_json_round_trip():
    prob = annulus()
    again = CapacityProblem.from_json(prob.to_json())
    assert again.to_json() == prob.to_json()
    assert np.array_equal(again.masks()[0], prob.masks()[0])


def test_minimize_improves_on_ramps_and_stays_feasible():
    prob = annulus(h=0.125)
    res = minimize(prob, max_iter=3000)
    target, zero = prob.masks()
    g = res.minimizer.samples
    assert np.all(g[target] == 1) and np.all(g[zero] == 0)
    assert np.all((g >= 0) & (g <= 1))
    assert res.value == pytest.approx(objective(prob, g), rel=1e-12)
    assert res.value <= objective(prob, linf_ramp(prob, 0.5, 1.0)) + 1e-12
    assert [t[3] for t in res.trace] == sorted((t[3] for t in res.trace), reverse=True)


def test_chain_on_one_instance():
    prob = random_chain_instance(np.random.default_rng(11), cells=12, h=0.25)
    res = chain_check(prob, max_iter=2000)
    v = res.values
    assert v["gamma"] <= v["gamma_plus"] <= v["gamma_plus_rel"]
    assert v["gamma"] <= v["gamma_rel"] <= v["gamma_plus_rel"]
    assert res.holds


# -- cutoff -----------------------------------------------------------------------------------

def test_cutoff_product_rule():
    h = 1 / 16
    n_side = 32
    x = -1 + (np.arange(n_side) + 0.5) * h
    X, Y = np.meshgrid(x, x, indexing="ij")
    rng = np.random.default_rng(0)
    v = GridFunction(2, (n_side, n_side), h, (-1, -1), np.cos(3 * X) * np.sin(2 * Y) + 0.1 * rng.random((n_side, n_side)))
    rho = np.maximum(abs(X), abs(Y))
    inner, support = rho <= 0.3, rho <= 0.7
    vt, rep = cutoff_multiply(v, CutoffSpec(inner, support, M=6.0))
    assert np.allclose(vt.samples[inner], v.samples[inner])
    assert np.all(vt.samples[~support] == 0)
    assert rep.norm_Dvt <= rep.product_bound + 1e-12
    assert rep.max_slope <= 6.0
    with pytest.raises(ValueError):
        cutoff_multiply(v, CutoffSpec(inner, support, M=1.5))
    with pytest.raises(ValueError):
        CutoffSpec(support, inner, M=2.0)


def test_testfn_upper_bound_is_gradient_norm():
    params = CantorParams(2, Fraction(3, 2))
    spec = TestFunctionSpec(params, 2)
    expected = float(lorentz_norm(gradient_profile(spec), 1.5, 1.0)) ** 1.5
    assert testfn_upper_bound(params, 2) == pytest.approx(expected)
    assert math.isfinite(testfn_upper_bound(CantorParams(2, Fraction(3, 2), Variant.HARMONIC), 3))
