"""Dense univariate polynomials with Fraction coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List

from .exactnum import format_rational


class DensePoly:
    """Polynomial in ``x`` stored as ``coeffs[i]`` = coefficient of ``x**i``.

    Trailing zeros are stripped so ``degree`` is exact; the zero polynomial
    has ``coeffs == []`` and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs: List[Fraction] = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs

    @classmethod
    def constant(cls, value) -> "DensePoly":
        return cls([value])

    @classmethod
    def x(cls) -> "DensePoly":
        return cls([0, 1])

    @classmethod
    def linear(cls, const, slope=1) -> "DensePoly":
        return cls([const, slope])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    @property
    def monic(self) -> bool:
        return self.leading == 1

    def coeff(self, i: int) -> Fraction:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other) -> bool:
        if isinstance(other, DensePoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == DensePoly([other]).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __repr__(self) -> str:
        return f"DensePoly([{', '.join(format_rational(c) for c in self.coeffs)}])"

    def __add__(self, other) -> "DensePoly":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return DensePoly(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> "DensePoly":
        return DensePoly(-c for c in self.coeffs)

    def __sub__(self, other) -> "DensePoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "DensePoly":
        return _as_poly(other) - self

    def __mul__(self, other) -> "DensePoly":
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return DensePoly(c * f for c in self.coeffs)
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return DensePoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return DensePoly(out)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "coeffs": [format_rational(c) for c in self.coeffs] or ["0"],
            "monic": self.monic,
        }


def _as_poly(p) -> DensePoly:
    if isinstance(p, DensePoly):
        return p
    return DensePoly([p])


def rising_poly(shift, k: int, sign: int = 1) -> DensePoly:
    """``(shift + sign*x)_k`` as a polynomial in ``x``."""
    out = DensePoly([1])
    for i in range(k):
        out = out * DensePoly([Fraction(shift) + i, sign])
    return out
