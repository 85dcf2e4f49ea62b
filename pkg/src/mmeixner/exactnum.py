"""Exact rational scalars, Pochhammer kernels and truncated multivariate series.

Every scalar is a :class:`fractions.Fraction`.  Series are truncated by total
degree, so a product or power never needs more than the monomials with
``sum(k) <= degree``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, Iterator, Tuple, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]
Index = Tuple[int, ...]


def to_rational(value: RationalLike) -> Fraction:
    """Coerce ``value`` to a Fraction.  Floats are refused on purpose."""
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a Fraction, int or 'p/q' string")
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def format_rational(value: Fraction) -> str:
    """Wire format: ``"p/q"``, or ``"p"`` when the denominator is 1."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


def pochhammer(a: RationalLike, k: int) -> Fraction:
    """Rising factorial ``a (a+1) ... (a+k-1)``; 1 when ``k == 0``."""
    if k < 0:
        raise ValueError("pochhammer needs k >= 0")
    a = Fraction(a)
    out = Fraction(1)
    for i in range(k):
        out *= a + i
    return out


def gamma_ratio(a: RationalLike, m: int) -> Fraction:
    """``Gamma(a + m) / Gamma(a)`` for an integer shift ``m`` of either sign.

    For ``m < 0`` this is ``1 / ((a-1)(a-2)...(a+m))`` and raises
    ZeroDivisionError when one of those factors vanishes (a pole).
    """
    a = Fraction(a)
    if m >= 0:
        return pochhammer(a, m)
    denom = Fraction(1)
    for i in range(1, -m + 1):
        denom *= a - i
    return 1 / denom


def falling(a: RationalLike, k: int) -> Fraction:
    a = Fraction(a)
    out = Fraction(1)
    for i in range(k):
        out *= a - i
    return out


def factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return factorial(n) // (factorial(k) * factorial(n - k))


def generalized_binom(alpha: RationalLike, k: int) -> Fraction:
    """``alpha (alpha-1) ... (alpha-k+1) / k!``."""
    return falling(alpha, k) / factorial(k)


def multi_factorial(n: Iterable[int]) -> int:
    out = 1
    for v in n:
        out *= factorial(v)
    return out


def grlex_key(k: Index) -> tuple:
    """Graded-lexicographic sort key: total degree first, then larger leading exponents first."""
    return (sum(k), tuple(-v for v in k))


def indices_up_to(nvars: int, degree: int) -> Iterator[Index]:
    """All exponent tuples with total degree <= ``degree``, graded-lex order."""
    for d in range(degree + 1):
        yield from indices_of_degree(nvars, d)


def indices_of_degree(nvars: int, d: int) -> Iterator[Index]:
    if nvars == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in indices_of_degree(nvars - 1, d - first):
            yield (first,) + rest


class TruncatedSeries:
    """Formal power series in ``nvars`` variables, truncated at total degree ``degree``.

    Absent keys mean a zero coefficient.  Instances are treated as immutable.
    """

    __slots__ = ("nvars", "degree", "coeffs")

    def __init__(self, nvars: int, degree: int, coeffs: Dict[Index, Fraction] | None = None):
        if nvars < 1:
            raise ValueError("a series needs at least one variable")
        if degree < 0:
            raise ValueError("truncation degree must be >= 0")
        self.nvars = nvars
        self.degree = degree
        clean: Dict[Index, Fraction] = {}
        for k, v in (coeffs or {}).items():
            k = tuple(int(e) for e in k)
            if len(k) != nvars or min(k) < 0:
                raise ValueError(f"bad exponent tuple {k!r}")
            if sum(k) > degree:
                continue
            v = Fraction(v)
            if v:
                clean[k] = clean.get(k, Fraction(0)) + v
                if not clean[k]:
                    del clean[k]
        self.coeffs = clean

    # constructors -------------------------------------------------------

    @classmethod
    def constant(cls, nvars: int, degree: int, value: RationalLike = 1) -> "TruncatedSeries":
        return cls(nvars, degree, {(0,) * nvars: Fraction(value)})

    @classmethod
    def variable(cls, nvars: int, degree: int, index: int, scale: RationalLike = 1) -> "TruncatedSeries":
        """``scale * t_index`` with a 0-based ``index``."""
        k = [0] * nvars
        k[index] = 1
        return cls(nvars, degree, {tuple(k): Fraction(scale)})

    @classmethod
    def linear(cls, nvars: int, degree: int, const: RationalLike, weights) -> "TruncatedSeries":
        """``const + sum_j weights[j] * t_j``."""
        coeffs = {(0,) * nvars: Fraction(const)}
        for j, w in enumerate(weights):
            k = [0] * nvars
            k[j] = 1
            coeffs[tuple(k)] = Fraction(w)
        return cls(nvars, degree, coeffs)

    # access -------------------------------------------------------------

    def __getitem__(self, k) -> Fraction:
        return self.coeffs.get(tuple(k), Fraction(0))

    def items(self):
        """Nonzero coefficients in graded-lex order."""
        return sorted(self.coeffs.items(), key=lambda kv: grlex_key(kv[0]))

    @property
    def constant_term(self) -> Fraction:
        return self[(0,) * self.nvars]

    def _check(self, other: "TruncatedSeries") -> None:
        if not isinstance(other, TruncatedSeries):
            raise TypeError("expected a TruncatedSeries")
        if other.nvars != self.nvars or other.degree != self.degree:
            raise ValueError(
                f"series shapes differ: ({self.nvars}, {self.degree}) vs ({other.nvars}, {other.degree})"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.nvars, self.degree, self.coeffs) == (other.nvars, other.degree, other.coeffs)

    def __repr__(self) -> str:
        terms = ", ".join(f"{k}: {format_rational(v)}" for k, v in self.items())
        return f"TruncatedSeries(nvars={self.nvars}, degree={self.degree}, {{{terms}}})"

    # arithmetic ---------------------------------------------------------

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return TruncatedSeries(self.nvars, self.degree, out)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def scale(self, factor: RationalLike) -> "TruncatedSeries":
        factor = Fraction(factor)
        return TruncatedSeries(self.nvars, self.degree, {k: v * factor for k, v in self.coeffs.items()})

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return series_mul(self, other)


def binomial_series(alpha: RationalLike, var_index: int, degree: int, nvars: int) -> TruncatedSeries:
    """Truncation of ``(1 + t_var)^alpha``; ``var_index`` is 1-based."""
    if not 1 <= var_index <= nvars:
        raise ValueError("var_index must lie in 1..nvars")
    coeffs = {}
    for k in range(degree + 1):
        e = [0] * nvars
        e[var_index - 1] = k
        coeffs[tuple(e)] = generalized_binom(alpha, k)
    return TruncatedSeries(nvars, degree, coeffs)


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    a._check(b)
    D = a.degree
    out: Dict[Index, Fraction] = {}
    for ka, va in a.coeffs.items():
        da = sum(ka)
        for kb, vb in b.coeffs.items():
            if da + sum(kb) > D:
                continue
            k = tuple(x + y for x, y in zip(ka, kb))
            out[k] = out.get(k, Fraction(0)) + va * vb
    return TruncatedSeries(a.nvars, D, out)


def series_pow(base: TruncatedSeries, alpha: RationalLike) -> TruncatedSeries:
    """``base ** alpha`` via ``sum_k binom(alpha, k) u^k`` with ``u = base - 1``.

    ``u`` has no constant term, so ``u^k`` starts at degree ``k`` and the sum
    stops at ``k = degree`` exactly.
    """
    if base.constant_term != 1:
        raise ValueError("series_pow needs a base with constant term 1")
    alpha = Fraction(alpha)
    one = TruncatedSeries.constant(base.nvars, base.degree)
    u = base - one
    result = one
    u_pow = one
    for k in range(1, base.degree + 1):
        u_pow = series_mul(u_pow, u)
        if not u_pow.coeffs:
            break
        c = generalized_binom(alpha, k)
        if c:
            result = result + u_pow.scale(c)
    return result


def multinomial_series(x: RationalLike, nvars: int, degree: int) -> TruncatedSeries:
    """``(1 - s_1 - ... - s_r)^x`` expanded through the series engine."""
    base = TruncatedSeries.linear(nvars, degree, 1, [-1] * nvars)
    return series_pow(base, x)


def box(caps) -> Iterator[Index]:
    """All tuples ``0 <= k_i <= caps[i]`` in lexicographic order."""
    return product(*(range(c + 1) for c in caps))
