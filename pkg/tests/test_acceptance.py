"""Acceptance criteria 1 to 13, each printing one PASS/FAIL line.

Criteria are checked at their stated tolerances and sizes.  A failing line
reports the measured values so the gap is visible in the test log.
"""

import json
import math
import subprocess
import sys
import time
from fractions import Fraction as F
from itertools import product

import pytest

from mmeixner import oscillator as osc
from mmeixner.exactnum import indices_up_to, multi_factorial, multinomial_series, pochhammer
from mmeixner.polyfam import (
    CharlierParams,
    MeixnerFirstParams,
    MeixnerSecondParams,
    charlier_explicit,
    charlier_limit_probe,
    generating_coefficient_check,
    meixner1_explicit,
    meixner2_explicit,
    meixner_classical,
    rodrigues1_eval,
    rodrigues2_eval,
)
from mmeixner.orthocheck import verify_multiple_orthogonality
from mmeixner.recurrence import nn_coeffs, raising_paths, recurrence_build, recurrence_residual, subleading_delta
from mmeixner.summability import (
    classical_closed_form,
    duality_check,
    expected_verdict,
    norm_series_partials,
    radius_probe,
    region_membership,
)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


FIRST2 = MeixnerFirstParams(1, [F(1, 3), F(1, 2)])
FIRST3 = MeixnerFirstParams(1, [F(1, 3), F(1, 2), F(1, 5)])
SECOND2 = MeixnerSecondParams([F(1, 2), F(3, 4)], F(1, 2))
SECOND3 = MeixnerSecondParams([F(1, 2), F(3, 4), F(1, 3)], F(1, 2))
CHARLIER2 = CharlierParams([1, F(5, 2)])
CHARLIER3 = CharlierParams([1, F(5, 2), F(1, 3)])


def test_criterion_01_classical_reduction(report):
    start = time.perf_counter()
    bad = []
    for beta, c in product([F(1, 2), 1, F(5, 2)], [F(1, 4), F(1, 2), F(3, 4)]):
        p1, p2 = MeixnerFirstParams(beta, [c]), MeixnerSecondParams([beta], c)
        for n in range(9):
            m = meixner_classical(n, beta, c)
            if not (meixner1_explicit((n,), p1) == meixner2_explicit((n,), p2) == m):
                bad.append((beta, c, n))
    elapsed = time.perf_counter() - start
    report(1, not bad and elapsed < 1, f"81 exact comparisons, {len(bad)} mismatches, {elapsed:.2f}s (limit 1s)")


def test_criterion_02_rodrigues(report):
    start = time.perf_counter()
    checked, bad = 0, 0
    for p1, p2 in ((FIRST2, SECOND2), (FIRST3, MeixnerSecondParams([F(1, 2), F(3, 4), F(1, 3)], F(1, 3)))):
        for n in indices_up_to(p1.r, 6):
            e1, e2 = meixner1_explicit(n, p1), meixner2_explicit(n, p2)
            for x in range(11):
                checked += 2
                bad += rodrigues1_eval(n, p1, x) != e1(x)
                bad += rodrigues2_eval(n, p2, x) != e2(x)
    elapsed = time.perf_counter() - start
    report(2, bad == 0 and elapsed < 10, f"{checked} evaluations, {bad} mismatches, {elapsed:.2f}s (limit 10s)")


def test_criterion_03_generating_functions(report):
    start = time.perf_counter()
    xs = [0, 1, 3, F(1, 2), F(-3, 7), F(7, 5), F(11, 3)]
    checked, failures = 0, 0
    for kind, params in (("first", MeixnerFirstParams(F(3, 2), [F(1, 4)])), ("first", FIRST2), ("first", FIRST3),
                         ("second", MeixnerSecondParams([F(3, 2)], F(1, 4))), ("second", SECOND2),
                         ("second", SECOND3)):
        rep = generating_coefficient_check(kind, params, 6, xs)
        checked += rep.checked
        failures += len(rep.failures)
    elapsed = time.perf_counter() - start
    report(3, failures == 0 and elapsed < 30,
           f"{checked} coefficients at {len(xs)} x samples, {failures} mismatches, {elapsed:.2f}s (limit 30s)")


def test_criterion_04_multinomial(report):
    checked, bad = 0, 0
    for r, x in product((1, 2, 3), (0, 2, F(1, 2), F(-5, 3), F(7, 4))):
        s = multinomial_series(x, r, 6)
        for k in indices_up_to(r, 6):
            checked += 1
            bad += s[k] != pochhammer(-x, sum(k)) / multi_factorial(k)
    report(4, bad == 0, f"{checked} coefficients, {bad} mismatches")


def test_criterion_05_recurrence(report):
    start = time.perf_counter()
    identities = deltas = paths = 0
    bad = []
    for kind, p in (("first", FIRST2), ("first", FIRST3), ("second", SECOND2), ("second", SECOND3)):
        polys = {}
        for n in indices_up_to(p.r, 5):
            for k in range(p.r):
                identities += 1
                if recurrence_residual(kind, n, k, p, polys) != 0:
                    bad.append(("identity", kind, n, k))
                up = tuple(v + (i == k) for i, v in enumerate(n))
                deltas += 1
                if nn_coeffs(kind, n, p).b[k] != subleading_delta(kind, n, p) - subleading_delta(kind, up, p):
                    bad.append(("delta", kind, n, k))
            if sum(n) and (p.r == 2 or sum(n) <= 4):
                want = polys[n]
                for path in raising_paths(n):
                    paths += 1
                    if recurrence_build(kind, n, p, path) != want:
                        bad.append(("path", kind, n, path))
    elapsed = time.perf_counter() - start
    report(5, not bad and elapsed < 30,
           f"{identities} identities, {deltas} delta checks, {paths} raising paths, {len(bad)} failures, "
           f"{elapsed:.2f}s (limit 30s)")


def test_criterion_06_orthogonality(report):
    eps = F(1, 10**12)
    conditions, worst, failed = 0, F(0), []
    cases = [("first", FIRST2), ("first", FIRST3), ("second", SECOND2), ("second", SECOND3),
             ("charlier", CHARLIER2), ("charlier", CHARLIER3),
             ("first", MeixnerFirstParams(F(5, 2), [F(1, 3)])), ("second", MeixnerSecondParams([F(1, 2)], F(1, 2))),
             ("charlier", CharlierParams([F(3, 2)]))]
    diagonals = 0
    for kind, p in cases:
        for n in indices_up_to(p.r, 5):
            rep = verify_multiple_orthogonality(kind, n, p, K=200, epsilon=eps)
            conditions += len(rep.conditions)
            worst = max([worst] + [c["tailBound"] for c in rep.conditions])
            diagonals += rep.diagonal is not None
            if not rep.passed:
                failed.append((kind, n))
    report(6, not failed,
           f"{conditions} conditions and {diagonals} diagonal norms at K=200, worst tail bound "
           f"{float(worst):.1e} (limit 1e-12), {len(failed)} failures")


EIGEN_CASES = [
    ("first", MeixnerFirstParams(1, [F(1, 2)])),
    ("first", FIRST2),
    ("first", FIRST3),
    ("second", MeixnerSecondParams([F(1, 2)], F(1, 2))),
    ("second", SECOND2),
    ("second", SECOND3),
]
EIGEN_X = [0, 1, 2, 3, 4, 5, F(1, 3), F(7, 5)]


@pytest.fixture(scope="module")
def hamiltonians():
    start = time.perf_counter()
    out = {}
    for kind, p in EIGEN_CASES:
        lattice = osc.FockLattice([6] * p.r)
        out[(kind, p.r)] = (lattice, [osc.hamiltonian(kind, lattice, p, i) for i in range(p.r)])
    out["build_seconds"] = time.perf_counter() - start
    return out


def test_criterion_07_eigen_action(report, hamiltonians):
    start = time.perf_counter()
    worst, checks = F(0), 0
    printed = []
    for kind, p in EIGEN_CASES:
        lattice, hs = hamiltonians[(kind, p.r)]
        for x in EIGEN_X:
            state = osc.eigenstate(kind, x, lattice, p)
            for h in hs:
                checks += 1
                worst = max(worst, osc.verify_eigen_action(h, state))
        h_printed = osc.hamiltonian(kind, lattice, p, 0, osc.ASPRINTED)
        printed.append(osc.verify_eigen_action(h_printed, osc.eigenstate(kind, 2, lattice, p)))
    elapsed = time.perf_counter() - start + hamiltonians["build_seconds"]
    note = "asPrinted residuals at x=2: " + ", ".join(f"{float(v):.3g}" for v in printed)
    report(7, worst == 0 and elapsed < 20,
           f"{checks} eigen-actions, max residual {worst}, {elapsed:.2f}s (limit 20s); {note}")


def test_criterion_08_commutators(report, hamiltonians):
    worst, on_states = F(0), F(0)
    for kind, p in EIGEN_CASES:
        if p.r < 2:
            continue
        lattice, hs = hamiltonians[(kind, p.r)]
        inner = {lattice.flatten(n) for n in lattice.interior(2)}
        for i in range(p.r):
            for j in range(i + 1, p.r):
                worst = max(worst, osc.commutator_interior(hs[i], hs[j]))
                comm = osc.commutator(hs[i], hs[j])
                for x in (0, 3):
                    out = comm.apply(osc.eigenstate(kind, x, lattice, p).amplitudes)
                    on_states = max([on_states] + [abs(v) for k, v in out.items() if k in inner])
    report(8, worst == 0,
           f"max |[H_i,H_j]| entry on the margin-2 interior = {float(worst):.6g} (required 0); "
           f"on eigenstates the commutator is {on_states}")


SUMMABILITY_CASES = [
    ("first", MeixnerFirstParams(1, [F(1, 2)]), [F(1, 2)]),
    ("first", FIRST2, [2, F(1, 10)]),
    ("first", MeixnerFirstParams(1, [F(1, 3), F(1, 4), F(1, 5)]), [1, F(1, 2), F(1, 2)]),
    ("second", MeixnerSecondParams([F(1, 2)], F(1, 2)), [F(1, 2)]),
    ("second", SECOND2, [F(1, 2), F(1, 2)]),
    ("second", MeixnerSecondParams([F(1, 2), F(3, 4), F(1, 3)], F(1, 3)), [1, F(1, 2), F(1, 2)]),
    ("charlier", CharlierParams([1]), [1]),
    ("charlier", CHARLIER2, [1, 1]),
    ("charlier", CHARLIER3, [1, 1, 1]),
]
CLOSED_FORM_GRID = [(b, c) for b in (F(1, 2), 1, F(5, 2)) for c in (F(1, 4), F(1, 3))] + \
    [(F(1, 2), F(1, 2)), (1, F(1, 2))]


def test_criterion_09_summability(report):
    wrong = []
    for kind, p, t in SUMMABILITY_CASES:
        assert region_membership(kind, t, p).admissible
        for x in (0, 1, 2, 3, F(1, 2), F(3, 2)):
            verdict = norm_series_partials(kind, x, t, p).verdict
            if verdict != expected_verdict(x):
                wrong.append((kind, p.r, str(x), verdict))
    closed_err = 0.0
    for beta, c in CLOSED_FORM_GRID:
        p = MeixnerFirstParams(beta, [c])
        for k in range(4):
            probe = norm_series_partials("first", k, [(1 - c) ** 2 / c], p, depth=60)
            closed_err = max(closed_err, abs(float(probe.partials[-1]) - classical_closed_form(k, beta, c)))
    e_probe = norm_series_partials("charlier", 0, [1], CharlierParams([1]), depth=30)
    e_err = abs(float(e_probe.partials[-1]) - math.e)
    ok = not wrong and closed_err < 1e-9 and e_err < 1e-12
    report(9, ok, f"{len(SUMMABILITY_CASES) * 6} verdicts, {len(wrong)} wrong {wrong}; closed-form error "
                  f"{closed_err:.1e} (limit 1e-9); e error {e_err:.1e} (limit 1e-12)")


def test_criterion_10_duality(report):
    bad = 0
    for n, k in product(range(11), repeat=2):
        for beta, c in ((1, F(1, 2)), (F(5, 2), F(1, 3))):
            lhs, rhs = duality_check("meixner", n, k, (beta, c))
            bad += lhs != rhs
        for a in (1, F(3, 2)):
            lhs, rhs = duality_check("charlier", n, k, a)
            bad += lhs != rhs
    report(10, bad == 0, f"{121 * 4} exact duality checks, {bad} mismatches")


def test_criterion_11_charlier_limits(report):
    a = [1, F(4, 3)]
    cp = CharlierParams(a)
    worst = math.inf
    failures = []
    for kind in ("first", "second"):
        for n in indices_up_to(2, 3):
            if not sum(n):
                continue
            target = charlier_explicit(n, cp)
            for x in (0, F(1, 2), 3):
                gaps = [abs(charlier_limit_probe(kind, n, a, x, s) - target(x)) for s in (100, 1000, 10000)]
                for g1, g2 in zip(gaps, gaps[1:]):
                    if g2 == 0:
                        continue
                    ratio = float(g1 / g2)
                    worst = min(worst, ratio)
                    if ratio < 5:
                        failures.append((kind, n, str(x), ratio))
    report(11, not failures, f"smallest gap ratio per decade {worst:.3f} (required >= 5), {len(failures)} failures")


def test_criterion_12_radius(report):
    lines, ok = [], True
    for x in (F(1, 2), 3):
        probe = radius_probe(x, 1, F(1, 2), 40)
        ok = ok and probe.root_error <= 0.15
        lines.append(f"x={x}: root {probe.root_estimate:.4f} vs {probe.expected:.4f} "
                     f"({100 * probe.root_error:.1f}% off, ratio estimate {100 * probe.ratio_error:.1f}% off)")
    report(12, ok, "; ".join(lines) + " (limit 15%)")


CLI_RUNS = [
    (["eval", "--kind", "first", "--beta", "1", "--c", "1/3,1/2", "--n", "1,0"], 0),
    (["eval", "--kind", "first", "--beta", "1", "--c", "1/2,1/2", "--n", "1,0"], 2),
    (["rodrigues", "--kind", "second", "--betas", "1/2,3/4", "--c", "1/2", "--n", "2,1", "--x", "0,4"], 0),
    (["coeffs", "--kind", "charlier", "--a", "1,5/2", "--n", "2,1"], 0),
    (["verify", "recurrence", "--kind", "first", "--beta", "1", "--c", "1/3,1/2", "--box", "3,3"], 0),
    (["verify", "orthogonality", "--kind", "charlier", "--a", "1,5/2", "--n", "2,2"], 0),
    (["verify", "orthogonality", "--kind", "first", "--beta", "1", "--c", "1/3,1/2", "--n", "3,0", "--K", "15"], 1),
    (["verify", "generating", "--kind", "second", "--betas", "1/2,3/4", "--c", "1/2", "--depth", "3"], 0),
    (["verify", "eigen", "--kind", "second", "--betas", "1/2,3/4", "--c", "1/2", "--caps", "5,5", "--x", "2"], 0),
    (["verify", "commutator", "--kind", "first", "--beta", "1", "--c", "1/3,1/2", "--caps", "4,4"], None),
    (["verify", "summability", "--kind", "charlier", "--a", "1", "--x", "1/2", "--t", "1"], 0),
    (["verify", "duality", "--kind", "first", "--beta", "1", "--c", "1/2"], 0),
    (["verify", "limit", "--kind", "second", "--a", "1,4/3", "--n", "2,1"], 0),
    (["sweep", "coeffs", "--kind", "first", "--beta", "1", "--c", "1/3,1/2", "--box", "3,3"], 0),
    (["sweep", "summability", "--kind", "first", "--beta", "1", "--c", "1/2", "--t", "1/2",
      "--x", "0,1/2,1,3/2,2"], 0),
    (["export-operator", "--kind", "first", "--beta", "1", "--c", "1/3,1/2", "--caps", "2,2"], 0),
    (["verify", "nonsense"], 2),
]


def _mm(argv):
    return subprocess.run([sys.executable, "-m", "mmeixner.cli", *argv], capture_output=True)


def test_criterion_13_cli(report):
    problems = []
    for argv, want in CLI_RUNS:
        a, b = _mm(argv), _mm(argv)
        if a.stdout != b.stdout or a.returncode != b.returncode:
            problems.append(("nondeterministic", argv[:2]))
        if want is not None and a.returncode != want:
            problems.append(("exit", argv[:2], a.returncode, want))
        if a.returncode in (0, 1) and "--format" not in argv and argv[0] != "sweep":
            payload = json.loads(a.stdout)
            if json.loads(json.dumps(payload)) != payload:
                problems.append(("json", argv[:2]))
    # the commutator suite reports its own verdict; its exit code must agree with it
    comm = _mm(CLI_RUNS[9][0])
    if (comm.returncode == 0) != json.loads(comm.stdout)["passed"]:
        problems.append(("commutator exit code", comm.returncode))
    capped = subprocess.run([sys.executable, "-m", "mmeixner.cli", *CLI_RUNS[10][0]], capture_output=True,
                            env={"MM_MAX_DENOM_BITS": "8", "PATH": ""})
    if capped.returncode != 2:
        problems.append(("denominator cap", capped.returncode))
    subcommands = {argv[0] if argv[0] != "verify" else f"verify {argv[1]}" for argv, _ in CLI_RUNS}
    report(13, not problems, f"{len(CLI_RUNS)} invocations run twice over {len(subcommands)} subcommands, "
                             f"problems: {problems or 'none'}")
