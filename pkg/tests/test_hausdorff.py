import math
from fractions import Fraction

import pytest

from lorcap.cantor import CantorParams, Variant, core_cubes
from lorcap.hausdorff import (
    covering_content,
    coverings_csv,
    dimension_estimate,
    mass_lower_bound,
    trend,
)

U = CantorParams(2, Fraction(3, 2))
H = CantorParams(2, Fraction(3, 2), Variant.HARMONIC)


def brute_sum(params, d, k):
    return math.fsum(float(c.half_side) ** float(d) for c in core_cubes(params, k))


@pytest.mark.parametrize("params", [U, H])
@pytest.mark.parametrize("d", [Fraction(1, 4), Fraction(1, 2), Fraction(1)])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_covering_sum_matches_enumeration(params, d, k):
    r = covering_content(params, d, k)
    assert r.sum == pytest.approx(brute_sum(params, d, k), rel=1e-12)
    assert r.count == 4 ** k
    assert r.half_side == pytest.approx(float(params.geometry.inner(k)), rel=1e-12)


def test_critical_exponent_identities():
    half = Fraction(1, 2)
    for k in range(1, 25):
        assert covering_content(U, half, k).equals_power_of_depth(0)
        assert covering_content(H, half, k).equals_power_of_depth(-half)
    # depth a power of two, where the k^e factor folds into the 2-exponent
    assert covering_content(H, half, 8).equals_power_of_depth(Fraction(-1, 2))
    assert not covering_content(H, half, 8).equals_power_of_depth(0)


def test_critical_exponent_for_other_p():
    # the sums are constant exactly at d = n / (beta + 1) = n - p
    params = CantorParams(3, Fraction(2))
    d = Fraction(3) / (params.beta + 1)
    assert d == 1
    assert all(covering_content(params, d, k).equals_power_of_depth(0) for k in range(1, 10))


def test_harmonic_small_d_blows_up():
    r = covering_content(H, Fraction(1, 4), 4)
    assert r.sum == pytest.approx(brute_sum(H, Fraction(1, 4), 4), rel=1e-12)
    assert covering_content(H, Fraction(1, 4), 20).sum > 1e3


def test_mass_bound():
    mb = mass_lower_bound(U, Fraction(1, 2), 6)
    assert mb.bound == pytest.approx(1)
    mh = mass_lower_bound(H, Fraction(1, 2), 6)
    assert mh.attained_at == 6
    assert mh.bound == pytest.approx(6 ** -0.5)
    with pytest.raises(ValueError):
        mass_lower_bound(U, 0, 3)


def test_trend_signs():
    assert trend(U, Fraction(1, 4), 10) > 0
    assert trend(U, Fraction(3, 4), 10) < 0
    assert abs(trend(H, Fraction(1, 2), 10)) < 1e-9


@pytest.mark.parametrize("params", [U, H])
def test_dimension_estimate(params):
    est = dimension_estimate(params, depth=12, tol=0.02)
    assert est.status == "ok"
    assert est.estimate == pytest.approx(0.5, abs=0.02)
    assert est.to_json()["status"] == "ok"


def test_dimension_estimate_indeterminate():
    assert dimension_estimate(U, depth=2).status == "indeterminate"


def test_coverings_csv():
    lines = coverings_csv(U, [Fraction(1, 2)], [1, 2]).strip().split("\n")
    assert lines[0] == "variant,d,k,count,half_side,sum"
    assert lines[1].startswith("uniform,0.5,1,4,")
    assert float(lines[2].split(",")[-1]) == pytest.approx(1)
