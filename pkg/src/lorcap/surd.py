"""Exact arithmetic in the number field Q(2^(1/D)).

Every length in the Cantor constructions is a rational combination of
powers 2^r with rational r, so it lives in Q(2^(1/D)) for a suitable D.
``x^D - 2`` is irreducible over Q (Eisenstein at 2), which makes the
representation by D rational coordinates unique: equality is exact and
the sign of a nonzero element is decided by adaptive-precision evaluation.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import mpmath

__all__ = ["Surd", "as_fraction", "pow2"]


def as_fraction(x) -> Fraction:
    """Exact rational from int/Fraction/str; floats go through their repr
    so that 1.1 becomes 11/10 rather than its binary expansion."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot convert {x!r} to a fraction")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def _poly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_divmod(a, b):
    a = _poly_trim(a)
    b = _poly_trim(b)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lead = b[-1]
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        coef = a[-1] / lead
        q[shift] = coef
        for i, bi in enumerate(b):
            a[i + shift] -= coef * bi
        a = _poly_trim(a)
    return _poly_trim(q), a


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _poly_trim(out)


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return _poly_trim([x - y for x, y in zip(a, b)])


class Surd:
    """Element sum_i coeffs[i] * 2**(i/den) of Q(2^(1/den))."""

    __slots__ = ("den", "coeffs")

    def __init__(self, value=0, den: int = 1, coeffs=None):
        if coeffs is None:
            self.den = 1
            self.coeffs = (as_fraction(value),)
        else:
            if len(coeffs) != den:
                raise ValueError("need exactly den coefficients")
            self.den = den
            self.coeffs = tuple(Fraction(c) for c in coeffs)
            self._reduce()

    @classmethod
    def _raw(cls, den, coeffs):
        obj = cls.__new__(cls)
        obj.den = den
        obj.coeffs = tuple(coeffs)
        obj._reduce()
        return obj

    def _reduce(self):
        g = self.den
        for i, c in enumerate(self.coeffs):
            if c:
                g = math.gcd(g, i)
        if g > 1:
            self.coeffs = self.coeffs[::g]
            self.den //= g

    @classmethod
    def coerce(cls, x) -> "Surd":
        if isinstance(x, Surd):
            return x
        return cls(x)

    def lift(self, den: int) -> tuple:
        if den % self.den:
            raise ValueError(f"cannot lift denominator {self.den} to {den}")
        step = den // self.den
        out = [Fraction(0)] * den
        for i, c in enumerate(self.coeffs):
            out[i * step] = c
        return tuple(out)

    @staticmethod
    def _common(a: "Surd", b: "Surd"):
        d = a.den * b.den // math.gcd(a.den, b.den)
        return d, a.lift(d), b.lift(d)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        try:
            other = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        d, a, b = Surd._common(self, other)
        return Surd._raw(d, [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Surd._raw(self.den, [-c for c in self.coeffs])

    def __sub__(self, other):
        try:
            other = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Surd.coerce(other) - self

    def __mul__(self, other):
        try:
            other = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        d, a, b = Surd._common(self, other)
        out = [Fraction(0)] * d
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                if not y:
                    continue
                k = i + j
                if k >= d:
                    out[k - d] += 2 * x * y
                else:
                    out[k] += x * y
        return Surd._raw(d, out)

    __rmul__ = __mul__

    def inverse(self) -> "Surd":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        d = self.den
        if d == 1:
            return Surd(1 / self.coeffs[0])
        modulus = [Fraction(-2)] + [Fraction(0)] * (d - 1) + [Fraction(1)]
        # extended Euclid: find s with s*a = 1 mod (x^d - 2)
        r0, r1 = modulus, _poly_trim(self.coeffs)
        s0, s1 = [], [Fraction(1)]
        while len(r1) > 1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
        c = r1[0]
        s = [x / c for x in s1]
        _, s = _poly_divmod(s, modulus)
        s = s + [Fraction(0)] * (d - len(s))
        return Surd._raw(d, s)

    def __truediv__(self, other):
        try:
            other = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Surd.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = Surd(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # predicates and comparisons --------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is irrational")
        return self.coeffs[0]

    def to_mpf(self):
        return mpmath.fsum(
            mpmath.mpf(c.numerator) / c.denominator * mpmath.power(2, mpmath.mpf(i) / self.den)
            for i, c in enumerate(self.coeffs)
            if c
        )

    def sign(self) -> int:
        if self.is_zero():
            return 0
        if self.is_rational():
            c = self.coeffs[0]
            return (c > 0) - (c < 0)
        scale = max(abs(c) for c in self.coeffs) * 2
        dps = 40
        while True:
            with mpmath.workdps(dps):
                v = self.to_mpf()
                err = mpmath.mpf(scale.numerator) / scale.denominator * len(self.coeffs) * mpmath.mpf(10) ** (5 - dps)
                if abs(v) > err:
                    return 1 if v > 0 else -1
            dps *= 2

    def __float__(self):
        if self.is_rational():
            return float(self.coeffs[0])
        with mpmath.workdps(30):
            return float(self.to_mpf())

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __eq__(self, other):
        try:
            other = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.den, self.coeffs))

    def _cmp(self, other) -> int:
        return (self - Surd.coerce(other)).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __repr__(self):
        if self.is_rational():
            return f"Surd({self.coeffs[0]})"
        terms = [f"{c}*2^({i}/{self.den})" for i, c in enumerate(self.coeffs) if c]
        return "Surd(" + " + ".join(terms) + ")"


def pow2(e) -> Surd:
    """2**e exactly, for rational e."""
    e = as_fraction(e)
    whole = math.floor(e)
    frac = e - whole
    d = frac.denominator
    coeffs = [Fraction(0)] * d
    coeffs[frac.numerator] = Fraction(2) ** whole
    return Surd._raw(d, coeffs)
