"""Acceptance suite: one test per criterion.

Each test prints a line ``criterion N: PASS|FAIL ...`` (visible with -s);
the terminal summary repeats the verdicts (see conftest.py).
"""

import filecmp
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from lorcap import cli
from lorcap.cantor import CantorParams, Variant, classify_points, core_measure, generation_measure, FRAME
from lorcap.capacity import (
    CapacityProblem,
    MaskSpec,
    chain_check,
    minimize,
    random_chain_instance,
    ramp_oracle,
    refine,
    testfn_upper_bound,
)
from lorcap.hausdorff import covering_content, dimension_estimate
from lorcap.orlicz import admissibility_integral, calibrate_family, run_pipeline
from lorcap.rearrange import (
    LorentzExponents,
    StepProfile,
    layercake_p1,
    layercake_symbolic,
    lorentz_norm,
    lorentz_p1_symbolic,
)
from lorcap.surd import Surd
from lorcap.testfn import norm_table

PS = [Fraction(5, 4), Fraction(3, 2), Fraction(2), Fraction(3)]


def verdict(n, ok, detail=""):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    return ok


def random_profile(rng, exact):
    k = int(rng.integers(1, 9))
    vals = sorted(set(int(v) for v in rng.integers(1, 1000, size=k)), reverse=True)
    if exact:
        vals = [Fraction(v, int(rng.integers(1, 50))) for v in vals]
        vals = sorted(set(vals), reverse=True)
        masses = [Fraction(int(rng.integers(1, 1000)), int(rng.integers(1, 50))) for _ in vals]
    else:
        vals = sorted(set(float(v) * float(rng.random() + 0.5) for v in vals), reverse=True)
        masses = [float(rng.random() * 10 + 1e-3) for _ in vals]
    return StepProfile(tuple(zip(vals, masses)))


@pytest.mark.criterion(1)
def test_factor_p_layercake_identity():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    exact_ok = float_ok = True
    worst = 0.0
    for i in range(1000):
        p = PS[i % 4]
        prof = random_profile(rng, exact=True)
        lhs = lorentz_p1_symbolic(prof, p)
        rhs = {m: p * c for m, c in layercake_symbolic(prof).items()}
        exact_ok &= lhs == rhs
        fprof = random_profile(rng, exact=False)
        a = float(lorentz_norm(fprof, float(p), 1))
        b = float(p) * float(layercake_p1(fprof, float(p)))
        err = abs(a - b) / abs(b)
        worst = max(worst, err)
        float_ok &= err <= 1e-10
    elapsed = time.perf_counter() - start
    ok = exact_ok and float_ok and elapsed < 5
    verdict(1, ok, f"exact={exact_ok} worst_rel={worst:.2e} time={elapsed:.2f}s")
    assert exact_ok
    assert float_ok
    assert elapsed < 5


@pytest.mark.criterion(2)
def test_indicator_closed_form():
    rng = np.random.default_rng(2)
    ok = True
    for i in range(100):
        m = Fraction(int(rng.integers(1, 10 ** 6)), int(rng.integers(1, 10 ** 3)))
        p = PS[i % 4]
        prof = StepProfile.from_pairs([(1, m)])
        # exact: the functional is p * m^(1/p) as a linear form in m^(1/p)
        ok &= lorentz_p1_symbolic(prof, p) == {m: p}
        ok &= math.isclose(float(lorentz_norm(prof, float(p), 1)), float(p) * float(m) ** (1 / float(p)), rel_tol=1e-12)
    verdict(2, ok)
    assert ok


@pytest.mark.criterion(3)
def test_tiling_identity():
    ok = True
    for p in (Fraction(5, 4), Fraction(3, 2), Fraction(7, 4)):
        params = CantorParams(2, p)
        total = Surd(0)
        for k in range(1, 7):
            total = total + generation_measure(params, k)
            ok &= total + core_measure(params, k) == 4
    verdict(3, ok)
    assert ok


@pytest.mark.criterion(4)
def test_frame_measure_monte_carlo():
    params = CantorParams(2, Fraction(3, 2))
    exact = generation_measure(params, 1)
    rng = np.random.default_rng(4)
    X = rng.uniform(-1, 1, size=(10 ** 6, 2))
    res = classify_points(params, X, 2)
    est = 4 * np.mean((res["kind"] == FRAME) & (res["gen"] == 1))
    rel = abs(est - float(exact)) / float(exact)
    ok = exact == Fraction(63, 16) and rel <= 1e-2
    verdict(4, ok, f"exact={exact!r} mc={est:.5f} rel={rel:.1e}")
    assert exact == Fraction(63, 16)
    assert rel <= 1e-2


@pytest.mark.criterion(5)
def test_covering_reproductions():
    n, p = 2, Fraction(3, 2)
    U, H = CantorParams(n, p), CantorParams(n, p, Variant.HARMONIC)
    ok_u = all(covering_content(U, n - p, k).equals_power_of_depth(0) for k in range(1, 13))
    ok_h = all(covering_content(H, n - p, k).equals_power_of_depth(p - n) for k in range(1, 13))
    half = (n - p) / 2
    first = next((k for k in range(1, 21) if covering_content(H, half, k).sum > 1e3), None)
    ok = ok_u and ok_h and first is not None
    verdict(5, ok, f"harmonic sum at d={half} passes 1e3 at k={first}")
    assert ok_u and ok_h
    assert first is not None


@pytest.mark.criterion(6)
def test_uniform_decay_q2_and_weak():
    params = CantorParams(2, Fraction(3, 2))
    start = time.perf_counter()
    rows2 = norm_table(params, 2.0, range(2, 11))
    rows_w = norm_table(params, "inf", range(2, 11))
    elapsed = time.perf_counter() - start
    nd = [r.norm_Df for r in rows2]
    nf = [r.norm_f for r in rows2]
    C = 2 * rows_w[0].norm_Df
    weak_bad = [r.j for r in rows_w if r.norm_Df > C / r.j]
    failures = []
    if not all(b < a for a, b in zip(nd, nd[1:])):
        failures.append("||Df_j||_{p,2} not strictly decreasing")
    if not nd[-1] <= 0.5 * nd[0]:
        failures.append(f"||Df_10|| / ||Df_2|| = {nd[-1] / nd[0]:.3f} > 0.5")
    if weak_bad:
        failures.append(f"||Df_j||_(p,inf) > C/j for j in {weak_bad} (C = {C:.4f})")
    if not all(b < a for a, b in zip(nf, nf[1:])):
        failures.append("||f_j||_{p,2} not monotone")
    if elapsed >= 10:
        failures.append(f"runtime {elapsed:.1f}s")
    verdict(6, not failures, "; ".join(failures))
    assert not failures, "; ".join(failures)


@pytest.mark.criterion(7)
def test_harmonic_band_q1():
    params = CantorParams(2, Fraction(3, 2), Variant.HARMONIC)
    rows = norm_table(params, 1.0, range(2, 11))
    ratios = [r.ratio for r in rows]
    b, B = min(ratios), max(ratios)
    nd = [r.norm_Df for r in rows]
    decreasing = all(y < x for x, y in zip(nd, nd[1:]))
    # the comparison sums themselves tend to 0 like j^(1 - n/p), so the band forces decay
    far = norm_table(params, 1.0, [40])[0]
    far_in_band = far.norm_Df <= B * far.reference_tail and far.norm_Df < nd[-1]
    ok = B / b <= 4 and decreasing and far_in_band
    verdict(7, ok, f"band=[{b:.3f}, {B:.3f}] B/b={B / b:.3f} ||Df_40||={far.norm_Df:.4f}")
    assert B / b <= 4
    assert decreasing and far_in_band


@pytest.mark.criterion(8)
def test_uniform_q1_does_not_decay():
    params = CantorParams(2, Fraction(3, 2))
    rows = norm_table(params, 1.0, range(2, 13))
    cs = [r.Cj for r in rows]
    drift = float(min(cs) / max(cs))
    floor = rows[0].norm_Df * drift
    ok = all(r.norm_Df >= floor for r in rows)
    verdict(8, ok, f"min ||Df_j|| = {min(r.norm_Df for r in rows):.4f} >= {floor:.4f}")
    assert ok


@pytest.mark.criterion(9)
def test_dimension_estimates():
    ests = {}
    for v in Variant:
        ests[v.value] = dimension_estimate(CantorParams(2, Fraction(3, 2), v), depth=12)
    ok = all(e.status == "ok" and abs(e.estimate - 0.5) <= 0.02 for e in ests.values())
    verdict(9, ok, " ".join(f"{k}={e.estimate:.4f}" for k, e in ests.items()))
    assert ok


@pytest.mark.criterion(10)
@pytest.mark.slow
def test_capacity_solver_and_chain():
    prob = CapacityProblem(
        2, LorentzExponents(1.5, 1.0), "gamma_rel", 1.25, 0.125, MaskSpec("box", radius=0.5), MaskSpec("box", radius=1.0)
    )
    ref = refine(prob)
    oracle = ramp_oracle(2, 1.5, 0.5)
    rel = (ref.extrapolated - oracle) / oracle
    rng = np.random.default_rng(0)
    slacks = [chain_check(random_chain_instance(rng)).slack for _ in range(10)]
    ok = abs(rel) <= 0.25 and min(slacks) >= -1e-6
    verdict(10, ok, f"extrapolated={ref.extrapolated:.4f} oracle={oracle:.4f} rel={rel:+.3f} min_slack={min(slacks):.2e}")
    assert abs(rel) <= 0.25
    assert min(slacks) >= -1e-6


@pytest.mark.criterion(11)
@pytest.mark.slow
def test_minimize_below_testfn_bound():
    params = CantorParams(2, Fraction(3, 2))
    details, ok = [], True
    for j, J in ((2, 4), (3, 7)):
        prob = CapacityProblem(
            2, LorentzExponents(1.5, 1.0), "gamma", 1.625, 1 / 32, MaskSpec("cantor", params=params, depth=J)
        )
        value = minimize(prob).value
        bound = testfn_upper_bound(params, j)
        ok &= value <= 1.1 * bound
        details.append(f"j={j}: {value:.3f} <= {bound:.3f}")
    verdict(11, ok, "; ".join(details))
    assert ok


@pytest.mark.criterion(12)
@pytest.mark.slow
def test_orlicz_calibration_and_pipeline():
    worst = max(
        abs(admissibility_integral(calibrate_family(p, eps), p) - 1)
        for p in (1.25, 1.5, 2.0, 3.0)
        for eps in (0.25, 1.0, 4.0)
    )
    state = run_pipeline(CantorParams(3, Fraction(3, 2), Variant.HARMONIC), 5, calibrate_family(1.5, 1.0))
    mods = [r.modular_Dg + r.modular_g for r in state.rows]
    nonincreasing = all(b <= a for a, b in zip(mods, mods[1:]))
    halved = mods[4] <= 0.5 * mods[0]
    ok = worst <= 1e-8 and nonincreasing and halved
    verdict(12, ok, f"worst |I-1|={worst:.1e} modulars={[round(m, 4) for m in mods]}")
    assert worst <= 1e-8
    assert nonincreasing and halved


def _tree(root: Path):
    return sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())


@pytest.mark.criterion(13)
@pytest.mark.slow
def test_suite_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["suite", "--seed", "7", "--outdir", str(a)]) == 0
    assert cli.main(["suite", "--seed", "7", "--outdir", str(b)]) == 0
    files = _tree(a)
    same = files == _tree(b) and all(filecmp.cmp(a / f, b / f, shallow=False) for f in files)
    verdict(13, same, f"{len(files)} artifacts")
    assert files and same
