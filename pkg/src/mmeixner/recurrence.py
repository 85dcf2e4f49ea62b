"""Nearest-neighbour recurrence coefficients and recurrence-built polynomials.

The relation is

    x P_n = P_{n+e_k} + b_{n,k} P_n + sum_j a_{n,j} P_{n-e_j}

with ``a_{n,j} = 0`` whenever ``n_j = 0``.  Directions are 0-based in code.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Dict, Iterable, Optional, Sequence, Tuple

from .errors import DegenerateParametersError, ParameterError
from .exactnum import box, format_rational, indices_up_to, to_rational
from .poly import DensePoly
from .polyfam import (
    CHARLIER,
    FIRST,
    SECOND,
    CharlierParams,
    MeixnerFirstParams,
    MeixnerSecondParams,
    MultiIndex,
    _check_length,
    explicit,
)


@dataclass(frozen=True)
class NNCoefficients:
    at: MultiIndex
    b: Tuple[Fraction, ...]
    a: Tuple[Fraction, ...]

    def to_json(self) -> dict:
        return {
            "n": list(self.at),
            "b": [format_rational(v) for v in self.b],
            "a": [format_rational(v) for v in self.a],
        }


def nn_coeffs_first(n, p: MeixnerFirstParams) -> NNCoefficients:
    n = _check_length(n, p.r)
    N = sum(n)
    drift = sum(Fraction(ni) / (1 - ci) for ni, ci in zip(n, p.c))
    b = tuple((p.beta + N) * ck / (1 - ck) + drift for ck in p.c)
    a = tuple(cj * nj * (p.beta + N - 1) / (1 - cj) ** 2 for nj, cj in zip(n, p.c))
    return NNCoefficients(n, b, a)


def nn_coeffs_second(n, p: MeixnerSecondParams) -> NNCoefficients:
    n = _check_length(n, p.r)
    N = sum(n)
    c = p.c
    b = tuple(c * (nk + bk) / (1 - c) + Fraction(N) / (1 - c) for nk, bk in zip(n, p.betas))
    a = []
    for j, (nj, bj) in enumerate(zip(n, p.betas)):
        if nj == 0:
            a.append(Fraction(0))
            continue
        val = c * nj * (nj + bj - 1) / (1 - c) ** 2
        for i, (ni, bi) in enumerate(zip(n, p.betas)):
            if i == j:
                continue
            den = nj + bj - ni - bi
            if den == 0:
                raise DegenerateParametersError(
                    f"n_j + beta_j - n_i - beta_i vanishes at n={n}, j={j + 1}, i={i + 1}"
                )
            val *= (nj + bj - bi) / den
        a.append(val)
    return NNCoefficients(n, b, tuple(a))


def nn_coeffs_charlier(n, p: CharlierParams) -> NNCoefficients:
    """Multiple Charlier coefficients: ``b_{n,k} = a_k + |n|``, ``a_{n,j} = a_j n_j``."""
    n = _check_length(n, p.r)
    N = sum(n)
    return NNCoefficients(n, tuple(ak + N for ak in p.a), tuple(aj * nj for aj, nj in zip(p.a, n)))


def nn_coeffs(kind: str, n, params) -> NNCoefficients:
    if kind == FIRST:
        return nn_coeffs_first(n, params)
    if kind == SECOND:
        return nn_coeffs_second(n, params)
    if kind == CHARLIER:
        return nn_coeffs_charlier(n, params)
    raise ParameterError(f"unknown family {kind!r}")


def subleading_delta(kind: str, n, params) -> Fraction:
    """Coefficient of ``x^{|n|-1}`` in the monic polynomial, from its closed form."""
    if kind == FIRST:
        n = _check_length(n, params.r)
        N = sum(n)
        beta = params.beta
        return (Fraction(N * N) + N * (2 * beta - 1)) / 2 + (beta + N - 1) * sum(
            Fraction(ni) / (ci - 1) for ni, ci in zip(n, params.c)
        )
    if kind == SECOND:
        n = _check_length(n, params.r)
        c = params.c
        acc = Fraction(0)
        tail = Fraction(0)
        before = 0
        for nj, bj in zip(n, params.betas):
            acc += nj * (nj + bj - 1 + before)
            tail += Fraction(nj * nj, 2) + Fraction(nj, 2) * (2 * bj - 1)
            before += nj
        return acc / (c - 1) + tail
    raise ParameterError(f"subleading delta is defined for 'first' and 'second', not {kind!r}")


def default_last_step(n: MultiIndex) -> int:
    """Direction of the final step on the default path (raise coordinate 1 fully, then 2, ...)."""
    for k in reversed(range(len(n))):
        if n[k] > 0:
            return k
    raise ValueError("the zero index has no last step")


def recurrence_build(kind: str, target, params, path: Optional[Sequence[int]] = None) -> DensePoly:
    """Build ``P_target`` by iterating the recurrence from ``P_0 = 1``.

    ``path`` is an optional sequence of 0-based directions whose multiset
    matches ``target``; nodes on it are reached through the given steps, all
    other neighbours needed by the ``a``-terms use the default path.
    """
    target = _check_length(target, params.r)
    r = len(target)
    zero = (0,) * r
    via: Dict[MultiIndex, int] = {}
    if path is not None:
        node = list(zero)
        for k in path:
            node[k] += 1
            via[tuple(node)] = k
        if tuple(node) != target:
            raise ParameterError("path does not end at the target index")

    memo: Dict[MultiIndex, DensePoly] = {zero: DensePoly([1])}
    x = DensePoly.x()

    def build(m: MultiIndex) -> DensePoly:
        # Iterative post-order to avoid deep recursion on large targets.
        stack = [m]
        while stack:
            cur = stack[-1]
            if cur in memo:
                stack.pop()
                continue
            k = via.get(cur, None)
            if k is None:
                k = default_last_step(cur)
            prev = tuple(v - (i == k) for i, v in enumerate(cur))
            need = [prev] + [tuple(v - (i == j) for i, v in enumerate(prev)) for j in range(r) if prev[j] > 0]
            missing = [q for q in need if q not in memo]
            if missing:
                stack.extend(missing)
                continue
            co = nn_coeffs(kind, prev, params)
            poly = (x - co.b[k]) * memo[prev]
            for j in range(r):
                if prev[j] > 0 and co.a[j]:
                    poly = poly - memo[tuple(v - (i == j) for i, v in enumerate(prev))] * co.a[j]
            memo[cur] = poly
            stack.pop()
        return memo[m]

    return build(target)


def raising_paths(target: MultiIndex) -> Iterable[Tuple[int, ...]]:
    """Every distinct ordering of the raising steps that reaches ``target``."""
    steps = [k for k, v in enumerate(target) for _ in range(v)]
    return sorted(set(permutations(steps)))


def values_by_recurrence(kind: str, params, x, depth: int) -> Dict[MultiIndex, Fraction]:
    """``P_n(x)`` for every ``|n| <= depth`` at a single rational ``x``."""
    x = to_rational(x)
    r = params.r
    zero = (0,) * r
    vals: Dict[MultiIndex, Fraction] = {zero: Fraction(1)}
    for n in indices_up_to(r, depth):
        if n == zero:
            continue
        k = default_last_step(n)
        prev = tuple(v - (i == k) for i, v in enumerate(n))
        co = nn_coeffs(kind, prev, params)
        val = (x - co.b[k]) * vals[prev]
        for j in range(r):
            if prev[j] > 0 and co.a[j]:
                val -= co.a[j] * vals[tuple(v - (i == j) for i, v in enumerate(prev))]
        vals[n] = val
    return vals


@dataclass
class RecurrenceReport:
    kind: str
    caps: Tuple[int, ...]
    checked: int = 0
    failures: list = None

    def __post_init__(self):
        if self.failures is None:
            self.failures = []

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"kind": self.kind, "box": list(self.caps), "checked": self.checked,
                "passed": self.passed, "failures": self.failures}


def recurrence_residual(kind: str, n, k: int, params, polys: Dict[MultiIndex, DensePoly]) -> DensePoly:
    """``x P_n - P_{n+e_k} - b P_n - sum_j a_j P_{n-e_j}``; zero when the identity holds."""
    def get(m):
        if m not in polys:
            polys[m] = explicit(kind, m, params)
        return polys[m]

    n = _check_length(n, params.r)
    co = nn_coeffs(kind, n, params)
    up = tuple(v + (i == k) for i, v in enumerate(n))
    res = DensePoly.x() * get(n) - get(up) - get(n) * co.b[k]
    for j in range(params.r):
        if n[j] > 0:
            res = res - get(tuple(v - (i == j) for i, v in enumerate(n))) * co.a[j]
    return res


def verify_recurrence(kind: str, params, caps: Sequence[int], paths: bool = True) -> RecurrenceReport:
    """Exact recurrence identities for every ``n`` in the box and every direction.

    Also checks ``b_{n,k} = delta_n - delta_{n+e_k}`` for the Meixner kinds
    and, with ``paths``, that every raising order rebuilds the same polynomial.
    """
    caps = tuple(int(v) for v in caps)
    if len(caps) != params.r:
        raise ParameterError(f"box has {len(caps)} entries but r = {params.r}")
    report = RecurrenceReport(kind, caps)
    polys: Dict[MultiIndex, DensePoly] = {}
    for n in sorted(box(caps)):
        co = nn_coeffs(kind, n, params)
        for k in range(params.r):
            res = recurrence_residual(kind, n, k, params, polys)
            report.checked += 1
            if res != 0:
                report.failures.append({"check": "identity", "n": list(n), "k": k + 1,
                                        "residual": [format_rational(v) for v in res.coeffs]})
            if kind in (FIRST, SECOND):
                up = tuple(v + (i == k) for i, v in enumerate(n))
                rhs = subleading_delta(kind, n, params) - subleading_delta(kind, up, params)
                report.checked += 1
                if co.b[k] != rhs:
                    report.failures.append({"check": "delta", "n": list(n), "k": k + 1,
                                            "b": format_rational(co.b[k]), "delta": format_rational(rhs)})
        if paths and any(n):
            want = polys.get(n) or explicit(kind, n, params)
            for path in raising_paths(n):
                report.checked += 1
                if recurrence_build(kind, n, params, path) != want:
                    report.failures.append({"check": "path", "n": list(n), "path": [k + 1 for k in path]})
    return report
