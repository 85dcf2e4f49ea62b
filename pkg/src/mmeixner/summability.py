"""Square-summability probes for the eigenstate norm series.

The series are

    first kind:  sum_n M_n(x)^2 t^n / (n! (beta)_{|n|})
    second kind: sum_n M_n(x)^2 t^n / (n! prod_j (beta_j)_{n_j})
    Charlier:    sum_n C_n(x)^2 t^n / n!

They are summed exactly shell by shell (``|n| = d``); the verdict is a
root-test style heuristic on the shell sums, never a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence

from .errors import DomainError, ParameterError
from .exactnum import box, factorial, format_rational, multi_factorial, pochhammer, to_rational
from .polyfam import (
    CHARLIER,
    FIRST,
    SECOND,
    CharlierParams,
    MeixnerFirstParams,
    charlier_classical,
    meixner_classical_tilde,
)
from .recurrence import values_by_recurrence

CONVERGES = "Converges"
DIVERGES = "Diverges"
INCONCLUSIVE = "Inconclusive"

DEFAULT_DEPTH = {1: 60, 2: 40, 3: 24}
WINDOW = 8
BLOWUP = Fraction(10) ** 12


def default_depth(r: int) -> int:
    return DEFAULT_DEPTH.get(r, 8)


def _check_t(t, r: int) -> tuple:
    t = tuple(to_rational(v) for v in t)
    if len(t) != r:
        raise ParameterError(f"t has {len(t)} entries but r = {r}")
    if any(v <= 0 for v in t):
        raise ParameterError("all t_i must be > 0")
    return t


@dataclass(frozen=True)
class RegionMembership:
    in_a: bool
    in_b: tuple

    @property
    def admissible(self) -> bool:
        return self.in_a and any(self.in_b)

    def to_json(self) -> dict:
        return {"inA": self.in_a, "inB": list(self.in_b), "admissible": self.admissible}


def region_membership(kind: str, t, params) -> RegionMembership:
    t = _check_t(t, params.r)
    if kind == FIRST:
        s = sum((cj / (1 - cj)) ** 2 * tj for cj, tj in zip(params.c, t))
        return RegionMembership(s < 1, tuple(tj > (1 - cj) ** 2 for cj, tj in zip(params.c, t)))
    if kind == SECOND:
        c = params.c
        in_a = all(tj < ((1 - c) / c) ** 2 for tj in t)
        return RegionMembership(in_a, tuple(tj > (1 - c) ** 2 for tj in t))
    if kind == CHARLIER:
        # every positive t is admissible for Charlier
        return RegionMembership(True, tuple(True for _ in t))
    raise ParameterError(f"unknown family {kind!r}")


def term_weight(kind: str, n, t, params) -> Fraction:
    """Factor multiplying ``P_n(x)^2`` in the norm series."""
    w = Fraction(1, multi_factorial(n))
    for nj, tj in zip(n, t):
        w *= tj**nj
    if kind == FIRST:
        w /= pochhammer(params.beta, sum(n))
    elif kind == SECOND:
        for nj, bj in zip(n, params.betas):
            w /= pochhammer(bj, nj)
    return w


@dataclass
class SeriesProbe:
    x: Fraction
    t: tuple
    partials: List[Fraction]
    terms: List[Fraction]
    verdict: str

    @property
    def depth(self) -> int:
        return len(self.partials) - 1

    def tail_estimate(self) -> Fraction | None:
        """Geometric extrapolation of the unsummed tail, or None if shells are not shrinking."""
        q = _max_ratio(self.terms)
        if q is None or q >= 1:
            return None
        return self.terms[-1] * q / (1 - q)

    def to_json(self) -> dict:
        return {
            "x": format_rational(self.x),
            "t": [format_rational(v) for v in self.t],
            "partials": [format_rational(v) for v in self.partials],
            "terms": [format_rational(v) for v in self.terms],
            "verdict": self.verdict,
        }


def _ratios(terms: Sequence[Fraction]) -> List[Fraction | None]:
    window = terms[-(WINDOW + 1):]
    out = []
    for a, b in zip(window, window[1:]):
        if a == 0:
            out.append(Fraction(0) if b == 0 else None)
        else:
            out.append(b / a)
    return out


def _max_ratio(terms: Sequence[Fraction]) -> Fraction | None:
    if len(terms) < WINDOW + 1:
        return None
    rs = _ratios(terms)
    if any(r is None for r in rs):
        return None
    return max(rs)


def classify(partials: Sequence[Fraction], terms: Sequence[Fraction], tol) -> str:
    tol = to_rational(tol)
    if any(p > BLOWUP for p in partials):
        return DIVERGES
    if len(terms) < WINDOW + 1:
        return INCONCLUSIVE
    window = terms[-(WINDOW + 1):]
    if all(b >= a for a, b in zip(window, window[1:])) and window[-1] > 0:
        return DIVERGES
    q = _max_ratio(terms)
    if q is not None and q < 1:
        tail = terms[-1] * q / (1 - q)
        if tail < tol * partials[-1]:
            return CONVERGES
    return INCONCLUSIVE


def family_values(kind: str, params, x, depth: int) -> Dict[tuple, Fraction]:
    return values_by_recurrence(kind, params, x, depth)


def norm_series_partials(kind: str, x, t, params, depth: int | None = None, tol="1/1000") -> SeriesProbe:
    x = to_rational(x)
    t = _check_t(t, params.r)
    D = default_depth(params.r) if depth is None else depth
    if D < 0:
        raise ParameterError("depth must be >= 0")
    vals = family_values(kind, params, x, D)
    shells = [Fraction(0)] * (D + 1)
    for n, v in vals.items():
        if v:
            shells[sum(n)] += v * v * term_weight(kind, n, t, params)
    partials = []
    acc = Fraction(0)
    for s in shells:
        acc += s
        partials.append(acc)
    return SeriesProbe(x, t, partials, shells, classify(partials, shells, tol))


def box_sum(kind: str, x, t, params, caps) -> Fraction:
    """The same series restricted to the box ``0 <= n_i <= caps[i]``."""
    x = to_rational(x)
    t = _check_t(t, params.r)
    vals = family_values(kind, params, x, sum(caps))
    total = Fraction(0)
    for n in box(caps):
        v = vals[n]
        total += v * v * term_weight(kind, n, t, params)
    return total


@dataclass(frozen=True)
class NormalizationConstant:
    value: float
    bound: float
    partial: Fraction
    depth: int

    def to_json(self) -> dict:
        return {"value": repr(self.value), "bound": repr(self.bound),
                "partial": format_rational(self.partial), "depth": self.depth}


def normalization_constant(kind: str, x, t, params, tol="1/1000000000", depth: int | None = None,
                           max_depth: int = 120) -> NormalizationConstant:
    """``1/sqrt(S)`` where ``S`` is the norm series at an integer ``x``.

    Without ``depth`` the series is extended until two successive partials
    agree to ``tol`` relatively.  ``S >= partial`` always, so the returned
    value is an upper end; ``bound`` is the width down to the estimate that
    includes the extrapolated tail (or down to 0 when no estimate exists).
    """
    x = to_rational(x)
    if x.denominator != 1 or x < 0:
        raise DomainError("normalization constants exist only for integer x >= 0")
    if not region_membership(kind, t, params).admissible:
        raise ParameterError("t is outside the admissible region")
    tol = to_rational(tol)
    if depth is not None:
        probe = norm_series_partials(kind, x, t, params, depth, tol)
    else:
        D = max(WINDOW + 1, default_depth(params.r))
        while True:
            probe = norm_series_partials(kind, x, t, params, D, tol)
            p = probe.partials
            if abs(p[-1] - p[-2]) < tol * p[-1] and probe.tail_estimate() is not None:
                break
            if D >= max_depth:
                break
            D = min(max_depth, D + 10)
    partial = probe.partials[-1]
    upper = 1 / math.sqrt(partial)
    tail = probe.tail_estimate() if probe.depth >= WINDOW + 1 else None
    lower = 0.0 if tail is None else 1 / math.sqrt(partial + tail)
    return NormalizationConstant(upper, upper - lower, partial, probe.depth)


def duality_check(family: str, n: int, k: int, params) -> tuple:
    """Both sides of the self-duality in ``(n, k)``; equal exactly."""
    if family == "meixner":
        if isinstance(params, MeixnerFirstParams):
            beta, c = params.beta, params.c[0]
        else:
            beta, c = params
        return meixner_classical_tilde(n, beta, c)(k), meixner_classical_tilde(k, beta, c)(n)
    if family == CHARLIER:
        a = params.a[0] if isinstance(params, CharlierParams) else to_rational(params)
        return charlier_classical(n, a)(k) / (-a) ** n, charlier_classical(k, a)(n) / (-a) ** k
    raise ParameterError(f"duality is implemented for 'meixner' and 'charlier', not {family!r}")


@dataclass(frozen=True)
class RadiusProbe:
    x: Fraction
    depth: int
    value: Fraction
    root_estimate: float
    ratio_estimate: float
    expected: float

    @property
    def root_error(self) -> float:
        return abs(self.root_estimate - self.expected) / self.expected

    @property
    def ratio_error(self) -> float:
        return abs(self.ratio_estimate - self.expected) / self.expected

    def to_json(self) -> dict:
        return {"x": format_rational(self.x), "depth": self.depth, "value": format_rational(self.value),
                "rootEstimate": repr(self.root_estimate), "ratioEstimate": repr(self.ratio_estimate),
                "expected": repr(self.expected)}


def _log_abs(q: Fraction) -> float:
    return math.log(abs(q.numerator)) - math.log(q.denominator)


def radius_probe(x, beta, c, depth: int = 40) -> RadiusProbe:
    """Root estimate ``(|M_D(x)|/D!)^(1/D)`` for classical Meixner polynomials.

    The generating function puts the nearest singularity at ``-(1-c)`` when
    ``x`` is not a nonnegative integer and at ``-(1-c)/c`` otherwise, so the
    estimate should approach ``1/(1-c)`` or ``c/(1-c)``.  The ratio
    ``|M_D/D!| / |M_{D-1}/(D-1)!|`` is returned alongside.
    """
    x, beta, c = to_rational(x), to_rational(beta), to_rational(c)
    if depth < 10:
        raise ParameterError("radius probes need depth >= 10")
    params = MeixnerFirstParams(beta, [c])
    vals = values_by_recurrence(FIRST, params, x, depth)
    top, prev = vals[(depth,)], vals[(depth - 1,)]
    if top == 0:
        root = 0.0
    else:
        root = math.exp((_log_abs(top) - math.lgamma(depth + 1)) / depth)
    ratio = 0.0 if prev == 0 or top == 0 else math.exp(_log_abs(top) - _log_abs(prev) - math.log(depth))
    natural = x.denominator == 1 and x >= 0
    expected = float(c / (1 - c)) if natural else float(1 / (1 - c))
    return RadiusProbe(x, depth, top, root, ratio, expected)


def meixner_at_zero(n: int, beta, c) -> Fraction:
    """Closed form ``M_n(0) = (beta)_n (c/(c-1))^n``."""
    beta, c = to_rational(beta), to_rational(c)
    return pochhammer(beta, n) * (c / (c - 1)) ** n


def classical_closed_form(k: int, beta, c) -> float:
    """Limit ``k!/(c^k (beta)_k (1-c)^beta)`` of the r=1 norm series at ``t = (1-c)^2/c``."""
    beta, c = to_rational(beta), to_rational(c)
    return float(Fraction(factorial(k)) / (c**k * pochhammer(beta, k))) * (1 - float(c)) ** (-float(beta))


def expected_verdict(x) -> str:
    """Verdict predicted inside the admissible region: only ``x`` in N gives a normalizable state."""
    x = to_rational(x)
    return CONVERGES if x.denominator == 1 and x >= 0 else DIVERGES
