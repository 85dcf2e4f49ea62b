"""Command-line interface: ``mm <command> [options]``.

Rationals go in and come out as ``"p/q"`` strings.  Exit codes: 0 when every
check passes, 1 when a verification fails, 2 on usage or parameter errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Callable, List, Sequence

from . import oscillator as osc
from .errors import DomainError, ParameterError
from .exactnum import box, format_rational, to_rational
from .orthocheck import verify_multiple_orthogonality
from .polyfam import (
    CHARLIER,
    FIRST,
    SECOND,
    CharlierParams,
    MeixnerFirstParams,
    MeixnerSecondParams,
    charlier_explicit,
    charlier_limit_probe,
    explicit,
    generating_coefficient_check,
    rodrigues1_eval,
    rodrigues2_eval,
)
from .recurrence import nn_coeffs, verify_recurrence
from .summability import duality_check, expected_verdict, norm_series_partials, region_membership

KINDS = (FIRST, SECOND, CHARLIER)
DEFAULT_X_SAMPLES = "0,1,2,5,1/2,-3/7,7/5"
DENOM_ENV = "MM_MAX_DENOM_BITS"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# parsing ---------------------------------------------------------------------

def _rationals(text: str | None) -> List[Fraction] | None:
    if text is None:
        return None
    try:
        return [to_rational(p) for p in text.split(",") if p.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot read {text!r} as comma-separated rationals") from exc


def _ints(text: str | None) -> List[int] | None:
    if text is None:
        return None
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _require(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required for this command")
    return value


def _param_source(args) -> dict:
    src = {"beta": args.beta, "betas": args.betas, "c": args.c, "a": args.a}
    if args.params_json:
        try:
            extra = json.loads(args.params_json)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--params-json is not valid JSON: {exc}") from exc
        if not isinstance(extra, dict):
            raise UsageError("--params-json must be a JSON object")
        for key, value in extra.items():
            if key not in src:
                raise UsageError(f"unknown parameter {key!r} in --params-json")
            src[key] = ",".join(str(v) for v in value) if isinstance(value, list) else str(value)
    return src


def build_params(args):
    src = _param_source(args)
    if args.kind == FIRST:
        return MeixnerFirstParams(_require(src["beta"], "--beta"), _rationals(_require(src["c"], "--c")))
    if args.kind == SECOND:
        return MeixnerSecondParams(_rationals(_require(src["betas"], "--betas")), _require(src["c"], "--c"))
    return CharlierParams(_rationals(_require(src["a"], "--a")))


def _multi_index(args, params) -> tuple:
    n = tuple(_require(_ints(args.n), "--n"))
    if len(n) != params.r or min(n) < 0:
        raise UsageError(f"--n needs {params.r} nonnegative entries")
    return n


def _caps(text, r: int, flag: str) -> tuple:
    caps = tuple(_require(_ints(text), flag))
    if len(caps) != r:
        raise UsageError(f"{flag} needs {r} entries")
    return caps


def _fmt_list(values) -> List[str]:
    return [format_rational(v) for v in values]


# commands --------------------------------------------------------------------

def cmd_eval(args) -> tuple:
    params = build_params(args)
    n = _multi_index(args, params)
    poly = explicit(args.kind, n, params)
    out = {"kind": args.kind, "params": params.to_json(), "n": list(n),
           "degree": poly.degree, "coeffs": _fmt_list(poly.coeffs)}
    if args.x is not None:
        out["values"] = [{"x": format_rational(x), "value": format_rational(poly(x))} for x in _rationals(args.x)]
    return out, True


def cmd_rodrigues(args) -> tuple:
    if args.kind == CHARLIER:
        raise UsageError("rodrigues is available for --kind first and second")
    params = build_params(args)
    n = _multi_index(args, params)
    poly = explicit(args.kind, n, params)
    fn = rodrigues1_eval if args.kind == FIRST else rodrigues2_eval
    rows = []
    for x in _rationals(_require(args.x, "--x")):
        val = fn(n, params, x)
        rows.append({"x": format_rational(x), "rodrigues": format_rational(val),
                     "explicit": format_rational(poly(x)), "match": val == poly(x)})
    return {"kind": args.kind, "params": params.to_json(), "n": list(n), "values": rows}, all(r["match"] for r in rows)


def cmd_coeffs(args) -> tuple:
    params = build_params(args)
    n = _multi_index(args, params)
    out = nn_coeffs(args.kind, n, params).to_json()
    out.update({"kind": args.kind, "params": params.to_json()})
    return out, True


def _verify_recurrence(args, params) -> tuple:
    report = verify_recurrence(args.kind, params, _caps(args.box, params.r, "--box"))
    return report.to_json(), report.passed


def _verify_orthogonality(args, params) -> tuple:
    eps = args.tol if args.tol is not None else "1/1000000000000"
    report = verify_multiple_orthogonality(args.kind, _multi_index(args, params), params, K=args.K, epsilon=eps)
    return report.to_json(), report.passed


def _verify_generating(args, params) -> tuple:
    xs = _rationals(args.x if args.x is not None else DEFAULT_X_SAMPLES)
    report = generating_coefficient_check(args.kind, params, args.depth if args.depth is not None else 4, xs)
    return report.to_json(), report.passed


def _hamiltonians(args, params, lattice) -> list:
    if args.kind == CHARLIER:
        raise UsageError("Hamiltonians exist for --kind first and second")
    return [osc.hamiltonian(args.kind, lattice, params, i, args.ordering) for i in range(params.r)]


def _verify_eigen(args, params) -> tuple:
    lattice = osc.FockLattice(_caps(args.caps, params.r, "--caps"))
    hs = _hamiltonians(args, params, lattice)
    comm = max((osc.commutator_interior(hs[i], hs[j]) for i in range(len(hs)) for j in range(i + 1, len(hs))),
               default=Fraction(0))
    out = []
    ok = True
    for x in _rationals(_require(args.x, "--x")):
        state = osc.eigenstate(args.kind, x, lattice, params)
        residual = max(osc.verify_eigen_action(h, state) for h in hs)
        ok = ok and residual == 0
        out.append({"kind": args.kind, "params": params.to_json(), "caps": list(lattice.caps),
                    "x": format_rational(x), "ordering": args.ordering,
                    "residual": format_rational(residual), "commutatorMax": format_rational(comm)})
    return (out[0] if len(out) == 1 else out), ok


def _verify_commutator(args, params) -> tuple:
    lattice = osc.FockLattice(_caps(args.caps, params.r, "--caps"))
    hs = _hamiltonians(args, params, lattice)
    pairs = []
    for i in range(len(hs)):
        for j in range(i + 1, len(hs)):
            pairs.append({"i": i + 1, "j": j + 1,
                          "interiorMax": format_rational(osc.commutator_interior(hs[i], hs[j], args.margin))})
    ok = all(p["interiorMax"] == "0" for p in pairs)
    return {"kind": args.kind, "params": params.to_json(), "caps": list(lattice.caps), "margin": args.margin,
            "ordering": args.ordering, "pairs": pairs, "passed": ok}, ok


def _summability_row(kind, params, x, t, depth, tol) -> dict:
    probe = norm_series_partials(kind, x, t, params, depth, tol)
    member = region_membership(kind, t, params)
    expected = expected_verdict(x) if member.admissible else None
    return {"x": format_rational(x), "t": _fmt_list(probe.t), "depth": probe.depth,
            "partial": format_rational(probe.partials[-1]), "verdict": probe.verdict,
            "admissible": member.admissible, "expected": expected,
            "pass": expected is None or probe.verdict == expected}


def _verify_summability(args, params) -> tuple:
    t = _rationals(_require(args.t, "--t"))
    tol = args.tol if args.tol is not None else "1/1000"
    rows = [_summability_row(args.kind, params, x, t, args.depth, tol) for x in _rationals(_require(args.x, "--x"))]
    out = {"kind": args.kind, "params": params.to_json(), "probes": rows}
    return out, all(r["pass"] for r in rows)


def _verify_duality(args, params) -> tuple:
    if params.r != 1:
        raise UsageError("duality is a one-weight statement; pass a single c or a")
    top = args.n_max
    family = CHARLIER if args.kind == CHARLIER else "meixner"
    if args.kind == SECOND:
        arg = (params.betas[0], params.c)
    else:
        arg = params
    failures = []
    for n in range(top + 1):
        for k in range(top + 1):
            lhs, rhs = duality_check(family, n, k, arg)
            if lhs != rhs:
                failures.append({"n": n, "k": k, "lhs": format_rational(lhs), "rhs": format_rational(rhs)})
    out = {"family": family, "params": params.to_json(), "max": top, "checked": (top + 1) ** 2,
           "failures": failures, "passed": not failures}
    return out, not failures


def _verify_limit(args, params_unused) -> tuple:
    if args.kind == CHARLIER:
        raise UsageError("limit compares --kind first or second against Charlier")
    a = _rationals(_require(args.a, "--a"))
    cp = CharlierParams(a)
    n = tuple(_require(_ints(args.n), "--n"))
    if len(n) != cp.r:
        raise UsageError(f"--n needs {cp.r} entries")
    xs = _rationals(args.x if args.x is not None else "0,1/2,3")
    scales = _rationals(args.scales)
    target = charlier_explicit(n, cp)
    rows = []
    ok = True
    for x in xs:
        gaps = [abs(charlier_limit_probe(args.kind, n, a, x, s) - target(x)) for s in scales]
        ratios = [None if g2 == 0 else g1 / g2 for g1, g2 in zip(gaps, gaps[1:])]
        good = all(g2 == 0 or (g1 / g2) >= to_rational(args.min_ratio) for g1, g2 in zip(gaps, gaps[1:]))
        ok = ok and good
        rows.append({"x": format_rational(x), "gaps": [format_rational(g) for g in gaps],
                     "gapsApprox": [f"{float(g):.6e}" for g in gaps],
                     "ratios": [None if q is None else f"{float(q):.6f}" for q in ratios], "pass": good})
    return {"kind": args.kind, "a": _fmt_list(a), "n": list(n), "scales": _fmt_list(scales),
            "minRatio": args.min_ratio, "rows": rows, "passed": ok}, ok


SUITES = {
    "recurrence": _verify_recurrence,
    "orthogonality": _verify_orthogonality,
    "generating": _verify_generating,
    "eigen": _verify_eigen,
    "commutator": _verify_commutator,
    "summability": _verify_summability,
    "duality": _verify_duality,
    "limit": _verify_limit,
}


def cmd_verify(args) -> tuple:
    params = None if args.suite == "limit" else build_params(args)
    return SUITES[args.suite](args, params)


def _coeff_row(job) -> list:
    kind, params, n = job
    co = nn_coeffs(kind, n, params)
    return list(n) + _fmt_list(co.b) + _fmt_list(co.a)


def _summ_row(job) -> list:
    kind, params, x, t, depth, tol = job
    row = _summability_row(kind, params, x, t, depth, tol)
    return [row["x"], row["verdict"], row["expected"] or "", row["depth"], row["partial"]]


def _pmap(fn: Callable, jobs: Sequence, workers: int) -> list:
    if workers <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def cmd_sweep(args) -> tuple:
    params = build_params(args)
    r = params.r
    if args.table == "coeffs":
        caps = _caps(args.box, r, "--box")
        header = [f"n{i + 1}" for i in range(r)] + [f"b{i + 1}" for i in range(r)] + [f"a{i + 1}" for i in range(r)]
        jobs = [(args.kind, params, n) for n in sorted(box(caps))]
        rows = _pmap(_coeff_row, jobs, args.jobs)
    else:
        t = _rationals(_require(args.t, "--t"))
        tol = args.tol if args.tol is not None else "1/1000"
        header = ["x", "verdict", "expected", "depth", "partial"]
        jobs = [(args.kind, params, x, t, args.depth, tol) for x in _rationals(_require(args.x, "--x"))]
        rows = _pmap(_summ_row, jobs, args.jobs)
    return {"header": header, "rows": rows}, True


def cmd_export_operator(args) -> tuple:
    params = build_params(args)
    lattice = osc.FockLattice(_caps(args.caps, params.r, "--caps"))
    i = args.mode - 1
    if not 0 <= i < params.r:
        raise UsageError(f"--mode must lie in 1..{params.r}")
    what = args.operator
    if what == "hamiltonian":
        op = _hamiltonians(args, params, lattice)[i]
    elif what in ("lower", "raise"):
        op = osc.ladder(lattice, i, what)
    elif what == "number":
        op = osc.number(lattice, i)
    else:
        if args.kind != SECOND:
            raise UsageError("B and Binv need --kind second")
        op = osc.build_b(lattice, params, i)[0 if what == "B" else 1]
    out = op.to_json()
    out.update({"operator": what, "mode": args.mode, "kind": args.kind})
    return out, True


# output ----------------------------------------------------------------------

def _max_denominator_bits(payload: Any) -> int:
    if isinstance(payload, dict):
        return max((_max_denominator_bits(v) for v in payload.values()), default=0)
    if isinstance(payload, (list, tuple)):
        return max((_max_denominator_bits(v) for v in payload), default=0)
    if isinstance(payload, str) and "/" in payload:
        try:
            return Fraction(payload).denominator.bit_length()
        except (ValueError, ZeroDivisionError):
            return 0
    return 0


def _denominator_cap() -> int | None:
    raw = os.environ.get(DENOM_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        cap = int(raw)
    except ValueError as exc:
        raise UsageError(f"{DENOM_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise UsageError(f"{DENOM_ENV} must be >= 1")
    return cap


def render(payload, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if isinstance(payload, dict) and "header" in payload:
            w.writerow(payload["header"])
            w.writerows(payload["rows"])
        else:
            rows = payload if isinstance(payload, list) else _table_rows(payload)
            keys = list(rows[0].keys()) if rows else []
            w.writerow(keys)
            for row in rows:
                w.writerow([json.dumps(row[k]) if isinstance(row[k], (list, dict)) else row[k] for k in keys])
        return buf.getvalue()
    lines: List[str] = []
    _pretty(payload, lines, "")
    return "\n".join(lines) + "\n"


ROW_KEYS = ("values", "probes", "rows", "conditions", "pairs", "failures")


def _table_rows(payload: dict) -> list:
    for key in ROW_KEYS:
        rows = payload.get(key)
        if isinstance(rows, list) and rows and all(isinstance(r, dict) for r in rows):
            return rows
    return [payload]


def _pretty(value, lines: List[str], indent: str) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{indent}{k}:")
                _pretty(v, lines, indent + "  ")
            else:
                lines.append(f"{indent}{k}: {v}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}-")
                _pretty(v, lines, indent + "  ")
            else:
                lines.append(f"{indent}- {v}")
    else:
        lines.append(f"{indent}{value}")


# parser ----------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, kinds=KINDS) -> None:
    p.add_argument("--kind", choices=kinds, default=kinds[0])
    p.add_argument("--beta", help="shared beta (first kind)")
    p.add_argument("--betas", help="comma-separated beta_j (second kind)")
    p.add_argument("--c", help="comma-separated c_j (first kind) or a single c (second kind)")
    p.add_argument("--a", help="comma-separated a_j (Charlier)")
    p.add_argument("--params-json", help='JSON object, e.g. {"betas": ["1/2", "3/4"], "c": "1/2"}')
    p.add_argument("--format", choices=("json", "csv", "pretty"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mm", description="Exact multiple Meixner and Charlier polynomial toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="monic polynomial coefficients, optionally point values")
    _add_common(p)
    p.add_argument("--n", required=True)
    p.add_argument("--x", help="comma-separated evaluation points")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rodrigues", help="difference-operator evaluation at integer x")
    _add_common(p, (FIRST, SECOND))
    p.add_argument("--n", required=True)
    p.add_argument("--x", required=True)
    p.set_defaults(func=cmd_rodrigues)

    p = sub.add_parser("coeffs", help="nearest-neighbour recurrence coefficients at n")
    _add_common(p)
    p.add_argument("--n", required=True)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    _add_common(p)
    p.add_argument("--n")
    p.add_argument("--x")
    p.add_argument("--t")
    p.add_argument("--box")
    p.add_argument("--caps")
    p.add_argument("--K", type=int, default=200)
    p.add_argument("--depth", type=int)
    p.add_argument("--tol")
    p.add_argument("--margin", type=int, default=2)
    p.add_argument("--ordering", choices=osc.ORDERINGS, default=osc.FAITHFUL)
    p.add_argument("--n-max", type=int, default=10, help="duality: check all n, k up to this")
    p.add_argument("--scales", default="100,1000,10000", help="limit: beta scales")
    p.add_argument("--min-ratio", default="5", help="limit: required gap ratio per step")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="CSV tables over a grid")
    p.add_argument("table", choices=("coeffs", "summability"))
    _add_common(p)
    p.add_argument("--box")
    p.add_argument("--x")
    p.add_argument("--t")
    p.add_argument("--depth", type=int)
    p.add_argument("--tol")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep, format="csv")

    p = sub.add_parser("export-operator", help="sparse triplet JSON for a lattice operator")
    _add_common(p, (FIRST, SECOND))
    p.add_argument("--caps", required=True)
    p.add_argument("--operator", choices=("hamiltonian", "lower", "raise", "number", "B", "Binv"),
                   default="hamiltonian")
    p.add_argument("--mode", type=int, default=1, help="1-based mode index")
    p.add_argument("--ordering", choices=osc.ORDERINGS, default=osc.FAITHFUL)
    p.set_defaults(func=cmd_export_operator)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cap = _denominator_cap()
        payload, ok = args.func(args)
        if cap is not None:
            bits = _max_denominator_bits(payload)
            if bits > cap:
                raise UsageError(f"denominator grew to {bits} bits, above {DENOM_ENV}={cap}")
        text = render(payload, args.format)
    except (UsageError, ParameterError, DomainError, ValueError, ZeroDivisionError, TypeError) as exc:
        print(f"mm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
