"""Geometry of the two Cantor-type constructions.

Generation k of either construction places 2^(nk) cubic annuli
``A_w = Q(c_w, outer_k) minus Q(c_w, inner_k)`` around the centers
``c_w = sum_i offset_i * w_i``; the closed inner cubes of generation k are
the "core cubes" whose intersection over k is the Cantor set E.

Uniform:   offset_k = outer_k = 2^(beta - k(beta+1)),   inner_k = 2^(-k(beta+1))
Harmonic:  offset_k = outer_k = 2^(beta - k(beta+1))/k, inner_k = 2^(-k(beta+1))/k

All lengths are exact elements of Q(2^(1/D)) (see :mod:`lorcap.surd`).
In the harmonic construction the children of a core cube do not fill it;
the leftover shell is reported as the "gap" of the next generation.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .surd import Surd, as_fraction, pow2

__all__ = [
    "Variant",
    "CantorParams",
    "Geometry",
    "Word",
    "Frame",
    "Cube",
    "Location",
    "BudgetExceeded",
    "DomainError",
    "word_budget",
    "words",
    "center",
    "frame",
    "generation_measure",
    "gap_measure",
    "core_measure",
    "core_cubes",
    "locate",
    "classify_points",
    "frames_csv",
    "line_model_rows",
]


class BudgetExceeded(RuntimeError):
    """Requested enumeration exceeds the configured word/cell budget."""


class DomainError(ValueError):
    """Point outside the closed unit cube Q(0, 1)."""


def word_budget() -> int:
    """Maximum n*k for which 2^(nk) objects may be materialized."""
    return int(os.environ.get("LORCAP_BUDGET_WORDS", os.environ.get("LORCAP_BUDGET", "0")) or 0) or 20


class Variant(str, enum.Enum):
    UNIFORM = "uniform"
    HARMONIC = "harmonic"


@dataclass(frozen=True)
class Geometry:
    """Scale data of a construction in dimension n with ratio exponent beta.

    Kept separate from :class:`CantorParams` so that the one-dimensional
    picture (n = 1, which has no admissible p) can still be generated.
    """

    n: int
    beta: Fraction
    variant: Variant = Variant.UNIFORM

    def offset(self, k: int) -> Surd:
        return _scales(self.beta, self.variant, k)[0]

    def outer(self, k: int) -> Surd:
        return _scales(self.beta, self.variant, k)[0]

    def inner(self, k: int) -> Surd:
        if k == 0:
            return Surd(1)
        return _scales(self.beta, self.variant, k)[1]


@lru_cache(maxsize=4096)
def _scales(beta: Fraction, variant: Variant, k: int):
    if k < 1:
        raise ValueError("generation index must be >= 1")
    outer = pow2(beta - k * (beta + 1))
    inner = pow2(-k * (beta + 1))
    if variant is Variant.HARMONIC:
        outer = outer * Fraction(1, k)
        inner = inner * Fraction(1, k)
    return outer, inner


@dataclass(frozen=True)
class CantorParams:
    n: int
    p: Fraction
    variant: Variant = Variant.UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "p", as_fraction(self.p))
        object.__setattr__(self, "variant", Variant(self.variant))
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError("the constructions need dimension n >= 2")
        if not 1 < self.p < self.n:
            raise ValueError(f"need 1 < p < n, got p={self.p}, n={self.n}")

    @property
    def beta(self) -> Fraction:
        return self.p / (self.n - self.p)

    @property
    def geometry(self) -> Geometry:
        return Geometry(self.n, self.beta, self.variant)

    def to_json(self) -> dict:
        return {"n": self.n, "p": float(self.p), "variant": self.variant.value}

    @classmethod
    def from_json(cls, data) -> "CantorParams":
        return cls(int(data["n"]), as_fraction(data["p"]), Variant(data.get("variant", "uniform")))


@dataclass(frozen=True)
class Word:
    letters: tuple

    def __post_init__(self):
        letters = tuple(tuple(int(s) for s in letter) for letter in self.letters)
        if not letters:
            raise ValueError("a word has at least one letter")
        n = len(letters[0])
        for letter in letters:
            if len(letter) != n or any(s not in (-1, 1) for s in letter):
                raise ValueError(f"letters must be sign vectors in {{-1,1}}^{n}")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    @property
    def dim(self) -> int:
        return len(self.letters[0])

    def __str__(self):
        return "|".join("".join("+" if s > 0 else "-" for s in letter) for letter in self.letters)


@dataclass(frozen=True)
class Frame:
    word: Word
    center: tuple
    outer: Surd
    inner: Surd

    @property
    def generation(self) -> int:
        return len(self.word)

    def measure(self, n: int) -> Surd:
        return (2 * self.outer) ** n - (2 * self.inner) ** n


@dataclass(frozen=True)
class Cube:
    word: Word
    center: tuple
    half_side: Surd


def _geometry(params) -> Geometry:
    return params if isinstance(params, Geometry) else params.geometry


def words(n: int, k: int) -> Iterator[Word]:
    """All words of length k, lexicographic over sign vectors (-1 before +1)."""
    letters = list(itertools.product((-1, 1), repeat=n))
    for combo in itertools.product(letters, repeat=k):
        yield Word(combo)


def center(params, w: Word) -> tuple:
    geo = _geometry(params)
    c = [Surd(0)] * geo.n
    for i, letter in enumerate(w.letters, start=1):
        off = geo.offset(i)
        c = [ci + off * s for ci, s in zip(c, letter)]
    return tuple(c)


def frame(params, w: Word) -> Frame:
    geo = _geometry(params)
    k = len(w)
    return Frame(w, center(geo, w), geo.outer(k), geo.inner(k))


def generation_measure(params, k: int) -> Surd:
    """Exact Lebesgue measure of the union of the generation-k frames."""
    if k < 1:
        raise ValueError("generation index must be >= 1")
    geo = _geometry(params)
    n = geo.n
    return Surd(2 ** (n * k)) * ((2 * geo.outer(k)) ** n - (2 * geo.inner(k)) ** n)


def gap_measure(params, k: int) -> Surd:
    """Measure of the parts of the generation-(k-1) core cubes not covered by
    the generation-k outer cubes (zero for the uniform construction)."""
    if k < 1:
        raise ValueError("generation index must be >= 1")
    geo = _geometry(params)
    n = geo.n
    parents = Surd(2 ** (n * (k - 1))) * (2 * geo.inner(k - 1)) ** n
    children = Surd(2 ** (n * k)) * (2 * geo.outer(k)) ** n
    return parents - children


def core_measure(params, k: int) -> Surd:
    geo = _geometry(params)
    return Surd(2 ** (geo.n * k)) * (2 * geo.inner(k)) ** geo.n


def core_cubes(params, k: int, budget: int | None = None) -> list:
    geo = _geometry(params)
    if k < 1:
        raise ValueError("generation index must be >= 1")
    budget = word_budget() if budget is None else budget
    if geo.n * k > budget:
        raise BudgetExceeded(f"2^{geo.n * k} core cubes exceed the budget 2^{budget}")
    half = geo.inner(k)
    return [Cube(w, center(geo, w), half) for w in words(geo.n, k)]


@dataclass(frozen=True)
class Location:
    """Result of :func:`locate`.

    kind is one of ``"frame"`` (x in the open annulus of ``word``),
    ``"core"`` (x in the closed core cube of ``word`` at the requested depth),
    ``"gap"`` (x in a harmonic gap shell of generation ``generation``; ``word``
    is then the parent word, or None at generation 1) or ``"null"`` (x lies
    on a boundary, part of the Lebesgue-null remainder).
    """

    kind: str
    generation: int
    word: Word | None = None
    frame: Frame | None = None


def locate(params, x: Sequence, depth: int) -> Location:
    geo = _geometry(params)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if len(x) != geo.n:
        raise ValueError(f"point must have {geo.n} coordinates")
    xs = [Surd.coerce(as_fraction(xi) if not isinstance(xi, Surd) else xi) for xi in x]
    if any(abs(xi) > 1 for xi in xs):
        raise DomainError(f"point {tuple(float(v) for v in xs)} lies outside Q(0,1)")
    c = [Surd(0)] * geo.n
    letters = []
    for k in range(1, depth + 1):
        letter = []
        for xi, ci in zip(xs, c):
            s = (xi - ci).sign()
            if s == 0:
                return Location("null", k, Word(tuple(letters)) if letters else None)
            letter.append(s)
        letters.append(tuple(letter))
        off = geo.offset(k)
        c = [ci + off * s for ci, s in zip(c, letter)]
        rho = max(abs(xi - ci) for xi, ci in zip(xs, c))
        w = Word(tuple(letters))
        outer, inner = geo.outer(k), geo.inner(k)
        if rho > outer:
            parent = Word(tuple(letters[:-1])) if k > 1 else None
            return Location("gap", k, parent)
        if rho == outer:
            return Location("null", k, w)
        if rho > inner:
            return Location("frame", k, w, Frame(w, tuple(c), outer, inner))
        if k == depth:
            return Location("core", k, w)
        if rho == inner:
            return Location("null", k, w)
    raise AssertionError("unreachable")


# kind codes of classify_points
NULL, FRAME, GAP, CORE = 0, 1, 2, 3


def classify_points(params, X: np.ndarray, depth: int) -> dict:
    """Floating-point, vectorized version of :func:`locate`.

    X has shape (m, n). Returns arrays ``kind`` (codes NULL/FRAME/GAP/CORE),
    ``gen`` (generation where the descent stopped) and ``rho`` (l-infinity
    distance to the center of that generation). Ties on sibling boundaries
    descend into the + child, which is immaterial for continuous
    functions of rho.
    """
    geo = _geometry(params)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m = X.shape[0]
    kind = np.full(m, CORE, dtype=np.int8)
    gen = np.full(m, depth, dtype=np.int32)
    rho_out = np.zeros(m)
    active = np.ones(m, dtype=bool)
    c = np.zeros_like(X)
    for k in range(1, depth + 1):
        off, outer, inner = float(geo.offset(k)), float(geo.outer(k)), float(geo.inner(k))
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        sgn = np.where(X[idx] >= c[idx], 1.0, -1.0)
        c[idx] += off * sgn
        rho = np.max(np.abs(X[idx] - c[idx]), axis=1)
        rho_out[idx] = rho
        gen[idx] = k
        is_gap = rho > outer
        is_frame = (~is_gap) & (rho > inner)
        kind[idx[is_gap]] = GAP
        kind[idx[is_frame]] = FRAME
        stop = is_gap | is_frame
        active[idx[stop]] = False
    return {"kind": kind, "gen": gen, "rho": rho_out}


def _fmt(x) -> str:
    return repr(float(x))


def frames_csv(params, depth: int, budget: int | None = None) -> str:
    """CSV geometry dump, one row per frame of generation 1..depth."""
    geo = _geometry(params)
    budget = word_budget() if budget is None else budget
    if geo.n * depth > budget:
        raise BudgetExceeded(f"2^{geo.n * depth} frames exceed the budget 2^{budget}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["generation", "word"] + [f"c{i}" for i in range(geo.n)] + ["inner", "outer"])
    for k in range(1, depth + 1):
        for w in words(geo.n, k):
            fr = frame(geo, w)
            writer.writerow([k, str(w)] + [_fmt(ci) for ci in fr.center] + [_fmt(fr.inner), _fmt(fr.outer)])
    return buf.getvalue()


def line_model_rows(generations: int = 3, beta=Fraction(1)) -> list:
    """Centers and frame intervals of the one-dimensional picture.

    With beta = 1 the centers are +-1/2, +-1/2 +- 1/8, ... and the
    generation-1 frames are [-1,-3/4] u [-1/4,0] and [0,1/4] u [3/4,1].
    """
    geo = Geometry(1, as_fraction(beta), Variant.UNIFORM)
    rows = []
    for k in range(1, generations + 1):
        for w in words(1, k):
            fr = frame(geo, w)
            (c,) = fr.center
            rows.append(
                {
                    "generation": k,
                    "word": str(w),
                    "center": c,
                    "left": (c - fr.outer, c - fr.inner),
                    "right": (c + fr.inner, c + fr.outer),
                }
            )
    return rows
