"""Truncated Fock lattice, ladder operators and the two Hamiltonian families.

Everything is written in the rescaled basis ``e_n = sqrt(n!) |n>`` where

    b_i   e_n = n_i e_{n - e_i}
    b_i^+ e_n = e_{n + e_i}

so all matrix entries are rational.  A state ``sum_n M_n(x)/sqrt(n!) |n>``
has amplitudes ``M_n(x)/n!`` in this basis.  Raising past a cap maps to
zero; identities are only checked away from the caps.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Tuple

from .errors import DegenerateParametersError, ParameterError
from .exactnum import box, format_rational, grlex_key, multi_factorial, pochhammer, to_rational
from .polyfam import FIRST, SECOND, MeixnerFirstParams, MeixnerSecondParams, explicit_value

ASPRINTED = "asPrinted"
FAITHFUL = "recurrenceFaithful"
ORDERINGS = (ASPRINTED, FAITHFUL)


class FockLattice:
    """Occupation-number box ``0 <= n_i <= caps[i]`` with a graded-lex flat ordering."""

    def __init__(self, caps: Iterable[int]):
        caps = tuple(int(c) for c in caps)
        if not caps or min(caps) < 0:
            raise ParameterError("caps must be a nonempty list of nonnegative integers")
        self.caps = caps
        self.states: List[Tuple[int, ...]] = sorted(box(caps), key=grlex_key)
        self._index = {n: i for i, n in enumerate(self.states)}

    @property
    def r(self) -> int:
        return len(self.caps)

    @property
    def dim(self) -> int:
        return len(self.states)

    def flatten(self, n) -> int:
        return self._index[tuple(n)]

    def unflatten(self, i: int) -> Tuple[int, ...]:
        return self.states[i]

    def __contains__(self, n) -> bool:
        return tuple(n) in self._index

    def interior(self, margin: int = 1) -> List[Tuple[int, ...]]:
        return [n for n in self.states if all(v <= c - margin for v, c in zip(n, self.caps))]

    def __eq__(self, other) -> bool:
        return isinstance(other, FockLattice) and other.caps == self.caps

    def __hash__(self):
        return hash(self.caps)


def build_lattice(r: int, caps) -> FockLattice:
    caps = list(caps)
    if len(caps) != r:
        raise ParameterError(f"expected {r} caps, got {len(caps)}")
    return FockLattice(caps)


class SparseOperator:
    """Rational matrix on a lattice, stored column-wise: ``cols[col][row]``."""

    __slots__ = ("lattice", "cols")

    def __init__(self, lattice: FockLattice, cols: Dict[int, Dict[int, Fraction]] | None = None):
        self.lattice = lattice
        self.cols: Dict[int, Dict[int, Fraction]] = {}
        for c, col in (cols or {}).items():
            clean = {r: Fraction(v) for r, v in col.items() if v}
            if clean:
                self.cols[c] = clean

    @classmethod
    def from_action(cls, lattice: FockLattice, action: Callable) -> "SparseOperator":
        """Build from ``action(n) -> {m: coeff}`` giving the image of ``e_n``."""
        cols = {}
        for n in lattice.states:
            col = {}
            for m, v in action(n).items():
                if m in lattice and v:
                    col[lattice.flatten(m)] = col.get(lattice.flatten(m), Fraction(0)) + Fraction(v)
            cols[lattice.flatten(n)] = col
        return cls(lattice, cols)

    @classmethod
    def diagonal(cls, lattice: FockLattice, fn: Callable) -> "SparseOperator":
        return cls.from_action(lattice, lambda n: {n: fn(n)})

    @classmethod
    def identity(cls, lattice: FockLattice) -> "SparseOperator":
        return cls.diagonal(lattice, lambda n: 1)

    def entry(self, row: int, col: int) -> Fraction:
        return self.cols.get(col, {}).get(row, Fraction(0))

    def items(self):
        """``(row, col, value)`` triplets in (row, col) order."""
        out = [(r, c, v) for c, col in self.cols.items() for r, v in col.items()]
        return sorted(out)

    def _same(self, other: "SparseOperator") -> None:
        if self.lattice != other.lattice:
            raise ParameterError("operators live on different lattices")

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        self._same(other)
        cols = {c: dict(col) for c, col in self.cols.items()}
        for c, col in other.cols.items():
            tgt = cols.setdefault(c, {})
            for r, v in col.items():
                tgt[r] = tgt.get(r, Fraction(0)) + v
        return SparseOperator(self.lattice, cols)

    def scale(self, factor) -> "SparseOperator":
        f = Fraction(factor)
        return SparseOperator(self.lattice, {c: {r: v * f for r, v in col.items()} for c, col in self.cols.items()})

    def __neg__(self) -> "SparseOperator":
        return self.scale(-1)

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        return self + (-other)

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        """Operator product ``self * other`` (``other`` acts first)."""
        self._same(other)
        cols = {}
        for c, col in other.cols.items():
            out: Dict[int, Fraction] = {}
            for mid, v in col.items():
                for r, w in self.cols.get(mid, {}).items():
                    out[r] = out.get(r, Fraction(0)) + w * v
            cols[c] = out
        return SparseOperator(self.lattice, cols)

    def apply(self, amplitudes: Dict[int, Fraction]) -> Dict[int, Fraction]:
        out: Dict[int, Fraction] = {}
        for c, a in amplitudes.items():
            if not a:
                continue
            for r, v in self.cols.get(c, {}).items():
                out[r] = out.get(r, Fraction(0)) + v * a
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseOperator) and self.lattice == other.lattice and self.cols == other.cols

    def to_json(self) -> dict:
        return {"dim": self.lattice.dim, "caps": list(self.lattice.caps),
                "entries": [[r, c, format_rational(v)] for r, c, v in self.items()]}


def _shift(n, i, d):
    return tuple(v + d if k == i else v for k, v in enumerate(n))


def ladder(lattice: FockLattice, mode: int, which: str) -> SparseOperator:
    """``b_mode`` (``which='lower'``) or ``b_mode^+`` (``'raise'``); ``mode`` is 0-based."""
    if not 0 <= mode < lattice.r:
        raise ParameterError(f"mode {mode} outside 0..{lattice.r - 1}")
    if which == "lower":
        return SparseOperator.from_action(lattice, lambda n: {_shift(n, mode, -1): n[mode]} if n[mode] else {})
    if which == "raise":
        return SparseOperator.from_action(lattice, lambda n: {_shift(n, mode, 1): 1})
    raise ParameterError("which must be 'lower' or 'raise'")


def number(lattice: FockLattice, mode: int) -> SparseOperator:
    return SparseOperator.diagonal(lattice, lambda n: n[mode])


def total_number(lattice: FockLattice) -> SparseOperator:
    return SparseOperator.diagonal(lattice, lambda n: sum(n))


def build_b(lattice: FockLattice, p: MeixnerSecondParams, j: int) -> Tuple[SparseOperator, SparseOperator]:
    """``B_j = prod_{l != j} (N_j + beta_j - N_l - beta_l)`` and its inverse (diagonal)."""
    if lattice.r != p.r:
        raise ParameterError("lattice and parameters disagree on r")

    def eig(n):
        out = Fraction(1)
        for l in range(p.r):
            if l != j:
                out *= n[j] + p.betas[j] - n[l] - p.betas[l]
        if out == 0:
            raise DegenerateParametersError(f"B_{j + 1} has a zero eigenvalue at {n}")
        return out

    return SparseOperator.diagonal(lattice, eig), SparseOperator.diagonal(lattice, lambda n: 1 / eig(n))


def _check_ordering(ordering: str) -> None:
    if ordering not in ORDERINGS:
        raise ParameterError(f"ordering must be one of {ORDERINGS}")


def hamiltonian_first(lattice: FockLattice, p: MeixnerFirstParams, i: int, ordering: str = FAITHFUL) -> SparseOperator:
    """``H_i`` for the first kind, assembled as an operator product on the lattice."""
    _check_ordering(ordering)
    if lattice.r != p.r:
        raise ParameterError("lattice and parameters disagree on r")
    L = lattice
    gamma_i = p.c[i] / (1 - p.c[i])
    K = SparseOperator.diagonal(L, lambda n: p.beta + sum(n))
    diag = SparseOperator.diagonal(L, lambda n: sum(Fraction(nk) / (1 - ck) for nk, ck in zip(n, p.c)))
    H = ladder(L, i, "lower") + diag + K.scale(gamma_i)
    raising = None
    for j, cj in enumerate(p.c):
        term = ladder(L, j, "raise").scale(cj / (1 - cj) ** 2)
        raising = term if raising is None else raising + term
    if ordering == ASPRINTED:
        H = H + (K @ raising)
    else:
        H = H + (raising @ K)
    return H


def hamiltonian_second(lattice: FockLattice, p: MeixnerSecondParams, i: int, ordering: str = FAITHFUL) -> SparseOperator:
    """``H_i`` for the second kind; only the ``(N_j + beta_j)`` factor moves between orderings."""
    _check_ordering(ordering)
    if lattice.r != p.r:
        raise ParameterError("lattice and parameters disagree on r")
    L = lattice
    c = p.c
    H = (
        ladder(L, i, "lower")
        + SparseOperator.diagonal(L, lambda n: c / (1 - c) * (n[i] + p.betas[i]))
        + SparseOperator.diagonal(L, lambda n: Fraction(sum(n)) / (1 - c))
    )
    for j in range(p.r):
        _, Binv = build_b(L, p, j)
        shifted = SparseOperator.diagonal(L, lambda n, j=j: n[j] + p.betas[j])

        def others(n, j=j):
            out = Fraction(1)
            for k in range(p.r):
                if k != j:
                    out *= n[j] + p.betas[j] - p.betas[k]
            return out

        prod_op = SparseOperator.diagonal(L, others)
        up = ladder(L, j, "raise")
        if ordering == ASPRINTED:
            term = shifted @ prod_op @ Binv @ up
        else:
            term = prod_op @ Binv @ up @ shifted
        H = H + term.scale(c / (1 - c) ** 2)
    return H


def hamiltonian(kind: str, lattice: FockLattice, params, i: int, ordering: str = FAITHFUL) -> SparseOperator:
    if kind == FIRST:
        return hamiltonian_first(lattice, params, i, ordering)
    if kind == SECOND:
        return hamiltonian_second(lattice, params, i, ordering)
    raise ParameterError(f"Hamiltonians exist for 'first' and 'second', not {kind!r}")


@dataclass
class StateVector:
    lattice: FockLattice
    amplitudes: Dict[int, Fraction]
    x: Fraction

    def amplitude(self, n) -> Fraction:
        return self.amplitudes.get(self.lattice.flatten(n), Fraction(0))

    def to_json(self) -> dict:
        return {"dim": self.lattice.dim, "x": format_rational(self.x),
                "amplitudes": [[i, format_rational(v)] for i, v in sorted(self.amplitudes.items()) if v]}


def eigenstate(kind: str, x, lattice: FockLattice, params) -> StateVector:
    """Unnormalised common eigenstate: amplitude ``M_n(x)/n!`` at each lattice point."""
    x = to_rational(x)
    if lattice.r != params.r:
        raise ParameterError("lattice and parameters disagree on r")
    amps = {}
    for idx, n in enumerate(lattice.states):
        amps[idx] = explicit_value(kind, n, params, x) / multi_factorial(n)
    return StateVector(lattice, amps, x)


def verify_eigen_action(H: SparseOperator, s: StateVector, x=None) -> Fraction:
    """Largest ``|(H s - x s)_m|`` over interior ``m`` (every ``m_i <= cap_i - 1``)."""
    x = s.x if x is None else to_rational(x)
    if H.lattice != s.lattice:
        raise ParameterError("operator and state live on different lattices")
    hs = H.apply(s.amplitudes)
    worst = Fraction(0)
    for m in s.lattice.interior(1):
        idx = s.lattice.flatten(m)
        worst = max(worst, abs(hs.get(idx, Fraction(0)) - x * s.amplitudes.get(idx, Fraction(0))))
    return worst


def commutator(Hi: SparseOperator, Hj: SparseOperator) -> SparseOperator:
    return (Hi @ Hj) - (Hj @ Hi)


def commutator_interior(Hi: SparseOperator, Hj: SparseOperator, margin: int = 2) -> Fraction:
    """Largest ``|[Hi, Hj]|`` entry whose row and column both sit ``margin`` away from every cap."""
    L = Hi.lattice
    inner = {L.flatten(n) for n in L.interior(margin)}
    worst = Fraction(0)
    for r, c, v in commutator(Hi, Hj).items():
        if r in inner and c in inner:
            worst = max(worst, abs(v))
    return worst


def weighted_state_norm(s: StateVector, kind: str, t, params) -> Fraction:
    """``sum_n |M_n|^2/n! * t^n / weight(n)`` over the lattice (squared norm, truncated)."""
    t = tuple(to_rational(v) for v in t)
    total = Fraction(0)
    for idx, amp in s.amplitudes.items():
        n = s.lattice.unflatten(idx)
        fact = multi_factorial(n)
        m = amp * fact
        w = Fraction(1, fact)
        for nj, tj in zip(n, t):
            w *= tj**nj
        if kind == FIRST:
            w /= pochhammer(params.beta, sum(n))
        elif kind == SECOND:
            for nj, bj in zip(n, params.betas):
                w /= pochhammer(bj, nj)
        else:
            raise ParameterError(f"unknown kind {kind!r}")
        total += m * m * w
    return total


def coefficients_from_columns(H: SparseOperator, n) -> dict:
    """Read ``b_{n,i}``, ``a_{n,j}`` and the lowering weight off the matrix of ``H_i``.

    In amplitude space the eigen-equation at row ``n`` reads
    ``(n_i+1) psi_{n+e_i} + H[n,n] psi_n + sum_j H[n, n-e_j] psi_{n-e_j}``;
    multiplying by ``n!`` turns it into the recurrence, so
    ``b = H[n,n]`` and ``a_j = n_j H[n, n-e_j]``.
    """
    L = H.lattice
    n = tuple(n)
    row = L.flatten(n)
    a = []
    lowers = []
    for j in range(L.r):
        if n[j] > 0:
            a.append(n[j] * H.entry(row, L.flatten(_shift(n, j, -1))))
        else:
            a.append(Fraction(0))
    for i in range(L.r):
        up = _shift(n, i, 1)
        lowers.append(H.entry(row, L.flatten(up)) / (n[i] + 1) if up in L else None)
    return {"b": H.entry(row, row), "a": tuple(a), "lower": tuple(lowers)}
