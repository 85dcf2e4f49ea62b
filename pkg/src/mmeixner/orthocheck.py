"""Discrete weights and rigorously bracketed orthogonality sums.

A truncated sum ``sum_{k<=K} p(k) k^l w(k)`` is computed exactly; the tail
``k > K`` is bounded using a majorant that decays geometrically with ratio
``rho`` from ``K0`` on.  With ``P(k) = sum_i |p_i| k^i`` (increasing for
``k >= 1``) one has ``|p(k)| <= P(k)`` and

    P(k+1) (k+1)^l w(k+1) / (P(k) k^l w(k)) <= ((k+1)/k)^(d+l) * ratio_bound(k),

where ``ratio_bound(k)`` is a nonincreasing upper bound for ``w(k+1)/w(k)``.
The right-hand side is nonincreasing in ``k``, so once it is <= rho it stays
there and the tail is at most ``P(K+1) (K+1)^l w(K+1) / (1 - rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from .errors import ParameterError
from .exactnum import factorial, format_rational, pochhammer, to_rational
from .poly import DensePoly
from .polyfam import (
    CHARLIER,
    FIRST,
    SECOND,
    CharlierParams,
    MeixnerFirstParams,
    MeixnerSecondParams,
    _check_length,
    charlier_classical,
    explicit,
    meixner_classical_tilde,
)

MEIXNER_FIRST = "meixner_first"
MEIXNER_SECOND = "meixner_second"
POISSON = "charlier"


@dataclass(frozen=True)
class DiscreteWeight:
    """Weight number ``j`` (0-based) of a family.

    ``meixner_first``: ``(beta)_k c_j^k / k!``; ``meixner_second``:
    ``(beta_j)_k c^k / k!``; ``charlier``: ``a_j^k / k!``.  The classical
    weights are the ``r = 1`` cases.
    """

    kind: str
    params: object
    j: int = 0

    def __post_init__(self):
        expected = {MEIXNER_FIRST: MeixnerFirstParams, MEIXNER_SECOND: MeixnerSecondParams,
                    POISSON: CharlierParams}
        if self.kind not in expected:
            raise ParameterError(f"unknown weight kind {self.kind!r}")
        if not isinstance(self.params, expected[self.kind]):
            raise ParameterError(f"{self.kind} weight needs {expected[self.kind].__name__}")
        if not 0 <= self.j < self.params.r:
            raise ParameterError(f"weight index {self.j + 1} outside 1..{self.params.r}")

    # (shift, base) with w(k) = (shift)_k base^k / k!; shift None means Poisson
    def _shape(self) -> Tuple[Fraction | None, Fraction]:
        p = self.params
        if self.kind == MEIXNER_FIRST:
            return p.beta, p.c[self.j]
        if self.kind == MEIXNER_SECOND:
            return p.betas[self.j], p.c
        return None, p.a[self.j]

    def ratio_bound(self, k: int) -> Fraction:
        """Nonincreasing upper bound on ``w(k'+1)/w(k')`` valid for all ``k' >= k``."""
        shift, base = self._shape()
        if shift is None:
            return base / (k + 1)
        return base * max(Fraction(1), (shift + k) / (k + 1))

    @property
    def rho(self) -> Fraction:
        shift, base = self._shape()
        if shift is None:
            return Fraction(1, 2)
        return (base + 1) / 2

    def masses(self, K: int) -> List[Fraction]:
        shift, base = self._shape()
        out = [Fraction(1)]
        for k in range(K):
            step = base / (k + 1) if shift is None else (shift + k) * base / (k + 1)
            out.append(out[-1] * step)
        return out


def weight_mass(w: DiscreteWeight, k: int) -> Fraction:
    shift, base = w._shape()
    if shift is None:
        return base**k / factorial(k)
    return pochhammer(shift, k) * base**k / factorial(k)


def domination_threshold(w: DiscreteWeight, degree: int) -> int:
    """Smallest ``K0`` from which the summand majorant decays with ratio ``<= rho``."""
    e = max(degree, 0)
    rho = w.rho
    k = 0 if e == 0 else 1
    while True:
        growth = Fraction(1) if e == 0 else Fraction(k + 1, k) ** e
        if growth * w.ratio_bound(k) <= rho:
            return k
        k += 1


class _Moments:
    """Cache of truncated moments ``sum_{k<=K} k^s w(k)``."""

    def __init__(self):
        self._store: Dict[Tuple[DiscreteWeight, int], List[Fraction]] = {}

    def get(self, w: DiscreteWeight, K: int, order: int) -> List[Fraction]:
        key = (w, K)
        have = self._store.get(key)
        if have is not None and len(have) > order:
            return have
        masses = w.masses(K)
        moments = [Fraction(0)] * (order + 1)
        for k, m in enumerate(masses):
            if not m:
                continue
            kp = 1
            for s in range(order + 1):
                moments[s] += kp * m
                kp *= k
        self._store[key] = moments
        return moments


_MOMENTS = _Moments()


@dataclass(frozen=True)
class OrthoSum:
    partial: Fraction
    tail_bound: Fraction
    threshold: int

    def contains(self, value) -> bool:
        value = Fraction(value)
        return abs(value - self.partial) <= self.tail_bound

    @property
    def lower(self) -> Fraction:
        return self.partial - self.tail_bound

    @property
    def upper(self) -> Fraction:
        return self.partial + self.tail_bound


def _tail(poly: DensePoly, w: DiscreteWeight, ell: int, K: int) -> Tuple[Fraction, int]:
    d = max(poly.degree, 0)
    K0 = domination_threshold(w, d + ell)
    if K < K0:
        raise ParameterError(f"cutoff K={K} is below the ratio-domination threshold K0={K0}")
    k = K + 1
    majorant = sum(abs(c) * k**i for i, c in enumerate(poly.coeffs))
    return majorant * k**ell * weight_mass(w, k) / (1 - w.rho), K0


def orthogonality_sum(poly: DensePoly, w: DiscreteWeight, ell: int, K: int) -> OrthoSum:
    """Exact partial sum up to ``K`` of ``poly(k) k^ell w(k)`` plus a rigorous tail bound."""
    if ell < 0:
        raise ParameterError("ell must be >= 0")
    tail, K0 = _tail(poly, w, ell, K)
    moments = _MOMENTS.get(w, K, max(poly.degree, 0) + ell)
    partial = sum((c * moments[i + ell] for i, c in enumerate(poly.coeffs)), Fraction(0))
    return OrthoSum(partial, tail, K0)


def orthogonality_sum_direct(poly: DensePoly, w: DiscreteWeight, ell: int, K: int) -> OrthoSum:
    """Same contract as :func:`orthogonality_sum`, summed term by term."""
    tail, K0 = _tail(poly, w, ell, K)
    partial = Fraction(0)
    for k, m in enumerate(w.masses(K)):
        partial += poly(k) * k**ell * m
    return OrthoSum(partial, tail, K0)


def _weight_kind(kind: str) -> str:
    return {FIRST: MEIXNER_FIRST, SECOND: MEIXNER_SECOND, CHARLIER: POISSON}[kind]


@dataclass
class OrthogonalityReport:
    kind: str
    n: tuple
    K: int
    epsilon: Fraction
    conditions: list = field(default_factory=list)
    diagonal: dict | None = None

    @property
    def passed(self) -> bool:
        ok = all(c["pass"] for c in self.conditions)
        if self.diagonal is not None:
            ok = ok and self.diagonal["pass"]
        return ok

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "n": list(self.n),
            "K": self.K,
            "epsilon": format_rational(self.epsilon),
            "passed": self.passed,
            "conditions": [
                {"j": c["j"], "ell": c["ell"], "partial": format_rational(c["partial"]),
                 "tailBound": format_rational(c["tailBound"]), "pass": c["pass"]}
                for c in self.conditions
            ],
        }
        if self.diagonal is not None:
            d = self.diagonal
            out["diagonal"] = {k: (format_rational(v) if isinstance(v, Fraction) else v) for k, v in d.items()}
        return out


def verify_multiple_orthogonality(kind: str, n, params, K: int = 200, epsilon="1/1000000000000") -> OrthogonalityReport:
    """Check every defining condition ``sum_k P_n(k) k^l w_j(k) = 0``, ``l < n_j``.

    For ``r = 1`` the diagonal norm is also checked against its closed form
    (``n!/(c^n (beta)_n)`` times the total mass for Meixner, ``a^n n!`` times
    the total mass for Charlier), using brackets on both sums.
    """
    n = _check_length(n, params.r)
    epsilon = to_rational(epsilon)
    poly = explicit(kind, n, params)
    report = OrthogonalityReport(kind, n, K, epsilon)
    wk = _weight_kind(kind)
    for j, nj in enumerate(n):
        w = DiscreteWeight(wk, params, j)
        for ell in range(nj):
            s = orthogonality_sum(poly, w, ell, K)
            ok = abs(s.partial) <= s.tail_bound and s.tail_bound <= epsilon
            report.conditions.append(
                {"j": j + 1, "ell": ell, "partial": s.partial, "tailBound": s.tail_bound, "pass": ok}
            )
    if params.r == 1:
        report.diagonal = diagonal_check(kind, n[0], params, K)
    return report


def diagonal_check(kind: str, n: int, params, K: int) -> dict:
    """Bracket ``sum_k Q_n(k)^2 w(k)`` against ``norm * sum_k w(k)``."""
    wk = _weight_kind(kind)
    w = DiscreteWeight(wk, params, 0)
    if kind == CHARLIER:
        a = params.a[0]
        q = charlier_classical(n, a)
        value = a**n * factorial(n)
    else:
        beta, c = (params.beta, params.c[0]) if kind == FIRST else (params.betas[0], params.c)
        q = meixner_classical_tilde(n, beta, c)
        value = Fraction(factorial(n)) / (c**n * pochhammer(beta, n))
    sq = orthogonality_sum(q * q, w, 0, K)
    total = orthogonality_sum(DensePoly([1]), w, 0, K)
    lo, hi = value * total.lower, value * total.upper
    ok = not (hi < sq.lower or sq.upper < lo)
    return {"n": n, "value": value, "partial": sq.partial, "tailBound": sq.tail_bound,
            "massPartial": total.partial, "massTailBound": total.tail_bound, "pass": ok}
