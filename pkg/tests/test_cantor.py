import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorcap.cantor import (
    CORE,
    FRAME,
    GAP,
    BudgetExceeded,
    CantorParams,
    DomainError,
    Geometry,
    Variant,
    Word,
    center,
    classify_points,
    core_cubes,
    core_measure,
    line_model_rows,
    frame,
    frames_csv,
    gap_measure,
    generation_measure,
    locate,
    words,
)
from lorcap.surd import Surd, pow2

P15 = CantorParams(2, Fraction(3, 2))
H15 = CantorParams(2, Fraction(3, 2), Variant.HARMONIC)


def test_params_validation_and_beta():
    assert P15.beta == 3
    assert CantorParams(3, 2).beta == 2
    with pytest.raises(ValueError):
        CantorParams(2, 2)
    with pytest.raises(ValueError):
        CantorParams(1, Fraction(1, 2))
    assert CantorParams.from_json(P15.to_json()) == P15


def test_generation_one_scales_uniform():
    # beta = 3: offset = outer = 2^(3-4) = 1/2, inner = 2^-4
    g = P15.geometry
    assert g.offset(1) == Fraction(1, 2)
    assert g.outer(1) == Fraction(1, 2)
    assert g.inner(1) == Fraction(1, 16)
    assert g.inner(0) == 1


def test_harmonic_scales_divide_by_generation():
    for k in range(1, 6):
        assert H15.geometry.outer(k) * k == P15.geometry.outer(k)
        assert H15.geometry.inner(k) * k == P15.geometry.inner(k)


def test_words_lexicographic():
    ws = [str(w) for w in words(2, 1)]
    assert ws == ["--", "-+", "+-", "++"]
    assert sum(1 for _ in words(2, 3)) == 64
    with pytest.raises(ValueError):
        Word(((1, 0),))


def test_line_model_picture():
    rows = [r for r in line_model_rows(3) if r["generation"] == 1]
    cs = sorted(r["center"] for r in rows)
    assert cs == [-0.5, 0.5]


def test_generation_measure_closed_form():
    # n=2, p=3/2 uniform: 4 * ((2*2^-1)^2 - (2*2^-4)^2) = 4 - 1/16 = 63/16
    assert generation_measure(P15, 1) == Fraction(63, 16)


@pytest.mark.parametrize("p", [Fraction(5, 4), Fraction(3, 2), Fraction(7, 4)])
def test_uniform_tiling_is_exact(p):
    params = CantorParams(2, p)
    total = Surd(0)
    for k in range(1, 7):
        total = total + generation_measure(params, k)
        assert total + core_measure(params, k) == 4
        assert gap_measure(params, k).is_zero()


@pytest.mark.parametrize("p", [Fraction(5, 4), Fraction(3, 2)])
def test_harmonic_accounting_is_exact(p):
    params = CantorParams(2, p, Variant.HARMONIC)
    total = Surd(0)
    for k in range(1, 7):
        total = total + generation_measure(params, k) + gap_measure(params, k)
        assert total + core_measure(params, k) == 4
        assert gap_measure(params, k).sign() >= 0


def _sibling_disjoint(params, k):
    geo = params.geometry
    fr = [frame(params, w) for w in words(params.n, k)]
    for a, b in itertools.combinations(fr, 2):
        sep = max(abs(x - y) for x, y in zip(a.center, b.center))
        if sep < a.outer + b.outer:
            return False
    return True


@pytest.mark.parametrize("params", [P15, H15, CantorParams(3, 2), CantorParams(3, 2, Variant.HARMONIC)])
def test_frames_do_not_overlap(params):
    for k in (1, 2):
        assert _sibling_disjoint(params, k)


def test_children_sit_inside_parent_core():
    for params in (P15, H15):
        geo = params.geometry
        for w in words(2, 3):
            parent = Word(w.letters[:-1])
            cp, cc = center(params, parent), center(params, w)
            reach = max(abs(a - b) for a, b in zip(cp, cc)) + geo.outer(3)
            assert reach <= geo.inner(2)


def test_locate_exact_examples():
    assert locate(P15, (Fraction(1, 2), Fraction(1, 2)), 1).kind == "core"
    loc = locate(P15, (Fraction(3, 4), Fraction(1, 2)), 2)
    assert loc.kind == "frame" and loc.generation == 1 and str(loc.word) == "++"
    assert locate(P15, (0, Fraction(1, 3)), 1).kind == "null"
    assert locate(P15, (Fraction(1), Fraction(1, 2)), 1).kind == "null"
    with pytest.raises(DomainError):
        locate(P15, (2, 0), 1)


def test_locate_harmonic_gap():
    # k=2 harmonic: inner(1) = 1/16, outer(2) = 2^(3-8)/2 = 1/64; so rho in (1/64, 1/16) relative
    # to the parent center but far from every child is a gap point
    c1 = Fraction(1, 2)
    x = (c1 + Fraction(1, 20), c1 + Fraction(1, 20))
    assert locate(H15, x, 3).kind == "gap"


@settings(max_examples=200, deadline=None)
@given(st.lists(st.fractions(-1, 1, max_denominator=997), min_size=2, max_size=2), st.sampled_from([P15, H15]))
def test_classify_agrees_with_exact_locate(xs, params):
    loc = locate(params, xs, 4)
    got = classify_points(params, np.array([[float(v) for v in xs]]), 4)
    code = {"frame": FRAME, "gap": GAP, "core": CORE}
    if loc.kind in code:
        assert got["kind"][0] == code[loc.kind]
        assert got["gen"][0] == loc.generation


def test_monte_carlo_generation_measure():
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, size=(200_000, 2))
    res = classify_points(P15, X, 3)
    for k in (1, 2):
        frac = np.mean((res["kind"] == FRAME) & (res["gen"] == k)) * 4
        exact = float(generation_measure(P15, k))
        se = 4 * np.sqrt(exact / 4 * (1 - exact / 4) / X.shape[0])
        assert abs(frac - exact) < 5 * se + 1e-12


def test_core_cubes_budget():
    assert len(core_cubes(P15, 2)) == 16
    with pytest.raises(BudgetExceeded):
        core_cubes(P15, 6, budget=10)
    with pytest.raises(BudgetExceeded):
        frames_csv(P15, 6, budget=10)


def test_frames_csv_layout():
    text = frames_csv(P15, 1)
    lines = text.strip().split("\n")
    assert lines[0] == "generation,word,c0,c1,inner,outer"
    assert len(lines) == 5
    assert lines[1].startswith("1,--,-0.5,-0.5,0.0625,0.5")


def test_irrational_geometry_stays_exact():
    # p = 5/4 in n = 2 gives beta = 5/3 and lengths in Q(2^(1/3))
    params = CantorParams(2, Fraction(5, 4))
    assert params.geometry.outer(1) == Fraction(1, 2)
    inner = params.geometry.inner(1)
    assert not inner.is_rational()
    assert inner == pow2(Fraction(-8, 3))
    assert isinstance(Geometry(1, Fraction(1)).outer(2), Surd)
