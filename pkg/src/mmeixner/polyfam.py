"""Multiple Meixner (both kinds) and multiple Charlier polynomials.

Polynomials are built from the explicit finite double sums and returned in
monic form.  The Rodrigues evaluators below compute the same polynomials by
literally applying the backward-difference operators on the integer grid, and
serve as an independent check of the explicit sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from itertools import product
from typing import Sequence, Tuple

from .errors import DomainError, ParameterError
from .exactnum import (
    TruncatedSeries,
    binom,
    format_rational,
    gamma_ratio,
    indices_up_to,
    multi_factorial,
    pochhammer,
    series_mul,
    series_pow,
    to_rational,
)
from .poly import DensePoly, rising_poly

MultiIndex = Tuple[int, ...]

FIRST = "first"
SECOND = "second"
CHARLIER = "charlier"


def as_multi_index(n) -> MultiIndex:
    n = tuple(int(v) for v in n)
    if not n:
        raise ParameterError("multi-index must have at least one entry")
    if min(n) < 0:
        raise ParameterError(f"multi-index entries must be >= 0, got {n}")
    return n


def unit(r: int, k: int) -> MultiIndex:
    """0-based unit vector e_k of length r."""
    e = [0] * r
    e[k] = 1
    return tuple(e)


def _fractions(values) -> Tuple[Fraction, ...]:
    return tuple(to_rational(v) for v in values)


@dataclass(frozen=True)
class MeixnerFirstParams:
    """Shared ``beta`` and one ``c_j`` per weight."""

    beta: Fraction
    c: Tuple[Fraction, ...]

    def __init__(self, beta, c):
        object.__setattr__(self, "beta", to_rational(beta))
        object.__setattr__(self, "c", _fractions(c))
        if self.beta <= 0:
            raise ParameterError("beta must be > 0")
        if not self.c:
            raise ParameterError("need at least one c value")
        for cj in self.c:
            if not 0 < cj < 1:
                raise ParameterError(f"c values must satisfy 0 < c < 1, got {format_rational(cj)}")
        if len(set(self.c)) != len(self.c):
            raise ParameterError("c values must be pairwise distinct")

    @property
    def r(self) -> int:
        return len(self.c)

    def to_json(self) -> dict:
        return {"beta": format_rational(self.beta), "c": [format_rational(v) for v in self.c]}


@dataclass(frozen=True)
class MeixnerSecondParams:
    """One ``beta_j`` per weight and a shared ``c``."""

    betas: Tuple[Fraction, ...]
    c: Fraction

    def __init__(self, betas, c):
        object.__setattr__(self, "betas", _fractions(betas))
        object.__setattr__(self, "c", to_rational(c))
        if not self.betas:
            raise ParameterError("need at least one beta value")
        if not 0 < self.c < 1:
            raise ParameterError("c must satisfy 0 < c < 1")
        for b in self.betas:
            if b <= 0:
                raise ParameterError("beta values must be > 0")
        for i, bi in enumerate(self.betas):
            for bj in self.betas[i + 1:]:
                if (bi - bj).denominator == 1:
                    raise ParameterError(
                        "beta_i - beta_j must not be an integer "
                        f"({format_rational(bi)} - {format_rational(bj)})"
                    )

    @property
    def r(self) -> int:
        return len(self.betas)

    def to_json(self) -> dict:
        return {"betas": [format_rational(v) for v in self.betas], "c": format_rational(self.c)}


@dataclass(frozen=True)
class CharlierParams:
    a: Tuple[Fraction, ...]

    def __init__(self, a):
        object.__setattr__(self, "a", _fractions(a))
        if not self.a:
            raise ParameterError("need at least one a value")
        for v in self.a:
            if v <= 0:
                raise ParameterError("a values must be > 0")
        if len(set(self.a)) != len(self.a):
            raise ParameterError("a values must be pairwise distinct")

    @property
    def r(self) -> int:
        return len(self.a)

    def to_json(self) -> dict:
        return {"a": [format_rational(v) for v in self.a]}


def _check_length(n: MultiIndex, r: int) -> MultiIndex:
    n = as_multi_index(n)
    if len(n) != r:
        raise ParameterError(f"multi-index has length {len(n)} but parameters have r = {r}")
    return n


# classical ---------------------------------------------------------------

def meixner_classical_tilde(n: int, beta, c) -> DensePoly:
    """Hypergeometric normalisation: ``sum_k C(n,k) (-x)_k / (beta)_k ((1-c)/c)^k``."""
    beta, c = to_rational(beta), to_rational(c)
    if beta <= 0 or not 0 < c < 1:
        raise ParameterError("classical Meixner needs beta > 0 and 0 < c < 1")
    ratio = (1 - c) / c
    out = DensePoly()
    for k in range(n + 1):
        out = out + rising_poly(0, k, sign=-1) * (binom(n, k) * ratio**k / pochhammer(beta, k))
    return out


def meixner_classical(n: int, beta, c) -> DensePoly:
    """Monic Meixner polynomial ``(beta)_n c^n / (c-1)^n * tilde``."""
    beta, c = to_rational(beta), to_rational(c)
    tilde = meixner_classical_tilde(n, beta, c)
    return tilde * (pochhammer(beta, n) * c**n / (c - 1) ** n)


# multiple families --------------------------------------------------------

def meixner1_explicit(n, p: MeixnerFirstParams) -> DensePoly:
    n = _check_length(n, p.r)
    N = sum(n)
    # Group the k-sum by |k|: the x-dependence only enters through |k|.
    shell = [Fraction(0)] * (N + 1)
    for k in product(*(range(v + 1) for v in n)):
        w = Fraction(1)
        for nj, kj, cj in zip(n, k, p.c):
            w *= binom(nj, kj) * cj ** (nj - kj) / (cj - 1) ** nj
        shell[sum(k)] += w
    out = DensePoly()
    for s, w in enumerate(shell):
        if w:
            out = out + rising_poly(0, s, sign=-1) * rising_poly(p.beta, N - s) * w
    return out


def meixner2_explicit(n, p: MeixnerSecondParams) -> DensePoly:
    n = _check_length(n, p.r)
    N = sum(n)
    c = p.c
    out = DensePoly()
    for k in product(*(range(v + 1) for v in n)):
        K = sum(k)
        w = Fraction(1)
        for nj, kj in zip(n, k):
            w *= binom(nj, kj)
        w *= c ** (N - K) / (c - 1) ** N
        term = rising_poly(0, K, sign=-1)
        shift = 0
        for j, (nj, kj) in enumerate(zip(n, k)):
            term = term * rising_poly(p.betas[j] - shift, nj - kj)
            shift += kj
        out = out + term * w
    return out


def charlier_explicit(n, p: CharlierParams) -> DensePoly:
    """Multiple Charlier polynomial.

    The defining sum carries an overall ``(-1)^|n|`` which already makes the
    result monic; :func:`charlier_sign` records that factor.
    """
    n = _check_length(n, p.r)
    N = sum(n)
    shell = [Fraction(0)] * (N + 1)
    for k in product(*(range(v + 1) for v in n)):
        w = Fraction(1)
        for nj, kj, aj in zip(n, k, p.a):
            w *= binom(nj, kj) * aj ** (nj - kj)
        shell[sum(k)] += w
    out = DensePoly()
    for s, w in enumerate(shell):
        if w:
            out = out + rising_poly(0, s, sign=-1) * w
    return out * (-1) ** N


def charlier_sign(n) -> int:
    return (-1) ** sum(as_multi_index(n))


def charlier_classical(n: int, a) -> DensePoly:
    return charlier_explicit((n,), CharlierParams([a]))


def charlier_classical_tilde(n: int, a) -> DensePoly:
    """``C_n(x) / (-a)^n``, the 2F0 normalisation used by the duality."""
    a = to_rational(a)
    return charlier_classical(n, a) * (1 / (-a) ** n)


def explicit(kind: str, n, params) -> DensePoly:
    if kind == FIRST:
        return meixner1_explicit(n, params)
    if kind == SECOND:
        return meixner2_explicit(n, params)
    if kind == CHARLIER:
        return charlier_explicit(n, params)
    raise ParameterError(f"unknown family {kind!r}")


# Rodrigues evaluators ------------------------------------------------------

def _grid_x(x) -> int:
    if isinstance(x, Fraction):
        if x.denominator != 1:
            raise DomainError("Rodrigues evaluation is defined on integers x >= 0 only")
        x = x.numerator
    if not isinstance(x, int) or x < 0:
        raise DomainError("Rodrigues evaluation is defined on integers x >= 0 only")
    return x


def _nabla_power(values: dict, n: int, lo: int, hi: int) -> dict:
    """``nabla^n`` applied to ``values`` (dict y -> value), result on lo..hi."""
    out = {}
    for y in range(lo, hi + 1):
        acc = Fraction(0)
        for k in range(n + 1):
            acc += binom(n, k) * (-1) ** k * values.get(y - k, Fraction(0))
        out[y] = acc
    return out


def rodrigues1_eval(n, p: MeixnerFirstParams, x) -> Fraction:
    n = _check_length(n, p.r)
    x = _grid_x(x)
    N = sum(n)
    lo = x - N
    # Gamma(N+beta+y) / (Gamma(N+beta) Gamma(y+1)); 1/Gamma(y+1) = 0 for y < 0.
    f = {y: (pochhammer(N + p.beta, y) / pochhammer(1, y) if y >= 0 else Fraction(0))
         for y in range(lo, x + 1)}
    # Operators are applied right to left: j = r first.
    reach = 0
    for j in reversed(range(p.r)):
        cj = p.c[j]
        scaled = {y: cj**y * v for y, v in f.items()}
        reach += n[j]
        diffed = _nabla_power(scaled, n[j], lo + reach, x)
        f = {y: cj ** (-y) * v for y, v in diffed.items()}
    value = f[x]
    pref = pochhammer(p.beta, N)
    for nj, cj in zip(n, p.c):
        pref *= (cj / (cj - 1)) ** nj
    # Gamma(beta) Gamma(x+1) / Gamma(beta+x)
    pref *= pochhammer(1, x) / pochhammer(p.beta, x)
    return pref * value


def rodrigues2_eval(n, p: MeixnerSecondParams, x) -> Fraction:
    n = _check_length(n, p.r)
    x = _grid_x(x)
    N = sum(n)
    c = p.c
    lo = x - N
    # c^y / Gamma(y+1), zero for negative y
    f = {y: (c**y / pochhammer(1, y) if y >= 0 else Fraction(0)) for y in range(lo, x + 1)}
    reach = 0
    for j in reversed(range(p.r)):
        bj, nj = p.betas[j], n[j]
        # Every stage vanishes for y < 0 (the innermost 1/Gamma(y+1) factor
        # survives each multiplication), so Gamma ratios are only formed at
        # y >= 0 where they are finite Pochhammer products.
        lifted = {y: (gamma_ratio(bj + nj, y) * v if y >= 0 else Fraction(0)) for y, v in f.items()}
        reach += nj
        diffed = _nabla_power(lifted, nj, lo + reach, x)
        f = {y: (v / gamma_ratio(bj, y) if y >= 0 else Fraction(0)) for y, v in diffed.items()}
    value = f[x]
    pref = (c / (c - 1)) ** N
    for bj, nj in zip(p.betas, n):
        pref *= pochhammer(bj, nj)
    pref *= pochhammer(1, x) / c**x
    return pref * value


# generating functions ------------------------------------------------------

def generating_series(kind: str, params, x, degree: int) -> TruncatedSeries:
    """Right-hand side of the multivariate generating function, truncated."""
    x = to_rational(x)
    if kind == FIRST:
        r = params.r
        first = TruncatedSeries.linear(r, degree, 1, [1 / (1 - cj) for cj in params.c])
        second = TruncatedSeries.linear(r, degree, 1, [cj / (1 - cj) for cj in params.c])
        return series_mul(series_pow(first, x), series_pow(second, -x - params.beta))
    if kind == SECOND:
        r, c = params.r, params.c
        a = c / (1 - c)
        one = TruncatedSeries.constant(r, degree)
        factors = [TruncatedSeries.linear(r, degree, 1, [a if i == j else 0 for i in range(r)])
                   for j in range(r)]
        prod_all = one
        for fct in factors:
            prod_all = series_mul(prod_all, fct)
        head = one - (one - prod_all).scale(1 / c)
        out = series_pow(head, x)
        for fct, bj in zip(factors, params.betas):
            out = series_mul(out, series_pow(fct, -x - bj))
        return out
    raise ParameterError(f"generating functions exist for 'first' and 'second', not {kind!r}")


@dataclass
class GeneratingReport:
    kind: str
    degree: int
    checked: int
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"kind": self.kind, "degree": self.degree, "checked": self.checked,
                "passed": self.passed, "failures": self.failures}


def generating_coefficient_check(kind: str, params, degree: int, x_samples: Sequence) -> GeneratingReport:
    """Compare series coefficients of ``t^n`` with ``M_n(x) / n!`` for all ``|n| <= degree``."""
    polys = {n: explicit(kind, n, params) for n in indices_up_to(params.r, degree)}
    failures = []
    checked = 0
    for x in x_samples:
        x = to_rational(x)
        series = generating_series(kind, params, x, degree)
        for n, poly in polys.items():
            lhs = series[n]
            rhs = poly(x) / multi_factorial(n)
            checked += 1
            if lhs != rhs:
                failures.append({"x": format_rational(x), "n": list(n),
                                 "series": format_rational(lhs), "poly": format_rational(rhs)})
    return GeneratingReport(kind, degree, checked, failures)


# Charlier limits -------------------------------------------------------------

def charlier_limit_params(kind: str, a, beta_scale):
    a = _fractions(a)
    s = to_rational(beta_scale)
    if kind == FIRST:
        return MeixnerFirstParams(s, [aj / s for aj in a])
    if kind == SECOND:
        return MeixnerSecondParams([aj * s for aj in a], 1 / s)
    raise ParameterError(f"unknown Meixner kind {kind!r}")


def charlier_limit_probe(kind: str, n, a, x, beta_scale) -> Fraction:
    """Value at ``x`` of the Meixner polynomial with Charlier-scaled parameters."""
    params = charlier_limit_params(kind, a, beta_scale)
    return explicit(kind, n, params)(to_rational(x))


# pointwise evaluation over a whole box hits the same factors many times
_poch = lru_cache(maxsize=65536)(pochhammer)
_binom = lru_cache(maxsize=4096)(binom)


def explicit_value(kind: str, n, params, x) -> Fraction:
    """Explicit double sum evaluated directly at a rational ``x`` (no polynomial expansion)."""
    x = to_rational(x)
    n = _check_length(n, params.r)
    N = sum(n)
    total = Fraction(0)
    for k in product(*(range(v + 1) for v in n)):
        K = sum(k)
        head = _poch(-x, K)
        if not head:
            continue
        w = Fraction(1)
        for nj, kj in zip(n, k):
            w *= _binom(nj, kj)
        if kind == FIRST:
            for nj, kj, cj in zip(n, k, params.c):
                w *= cj ** (nj - kj) / (cj - 1) ** nj
            w *= _poch(params.beta + x, N - K)
        elif kind == SECOND:
            c = params.c
            w *= c ** (N - K) / (c - 1) ** N
            shift = 0
            for bj, nj, kj in zip(params.betas, n, k):
                w *= _poch(bj + x - shift, nj - kj)
                shift += kj
        elif kind == CHARLIER:
            for nj, kj, aj in zip(n, k, params.a):
                w *= aj ** (nj - kj)
            w *= (-1) ** N
        else:
            raise ParameterError(f"unknown family {kind!r}")
        total += w * head
    return total
