"""Command-line front end: ``moment-toc solve|simulate|verify|sweep|moments``.

Every option can also be given through an environment variable named
``MOMENT_TOC_<OPTION>`` (for example ``MOMENT_TOC_TOL_PD``); command-line
flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from typing import Sequence

from . import __version__
from .casesolver import (
    CandidateSolution,
    NonGeneric,
    SolveReport,
    SolverConfig,
    endpoint_equations,
    enumerate_cases,
    solve,
)
from .control import StairStepControl, sample_trajectory, simulate_exact
from .elimination import from_mpoly
from .hankel import TOL_PD, TOL_SING, MomentSequence, ShiftKind, shift_sequence
from .moments import InitialState, moments_unchecked
from .polyalg import TOL_ROOT

SCHEMA_VERSION = "1"
ENV_PREFIX = "MOMENT_TOC_"
EXIT_OK, EXIT_USAGE, EXIT_NOT_CONTROLLABLE, EXIT_NON_GENERIC, EXIT_DISCREPANCY = 0, 1, 2, 3, 4
VERDICT_EXIT = {"optimal_found": EXIT_OK, "not_controllable": EXIT_NOT_CONTROLLABLE,
                "non_generic": EXIT_NON_GENERIC}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _env_default(dest: str, default, kind=None):
    raw = os.environ.get(ENV_PREFIX + dest.upper())
    if raw is None:
        return default
    if kind is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return kind(raw) if kind else raw


def _add(p: argparse.ArgumentParser, flag: str, **kw):
    dest = kw.get("dest") or flag.lstrip("-").replace("-", "_")
    if kw.get("action") == "store_true":
        kw["default"] = _env_default(dest, False, bool)
    else:
        kw["default"] = _env_default(dest, kw.get("default"), kw.get("type"))
    p.add_argument(flag, **kw)


def parse_vector(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise UsageError(f"cannot parse vector {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError("vector entries must be finite")
    return vals


def _x0(args, minimum: int = 4) -> list[float]:
    if not args.x0:
        raise UsageError("--x0 is required")
    x = parse_vector(args.x0)
    if len(x) < minimum:
        raise UsageError(f"--x0 needs at least {minimum} components, got {len(x)}")
    return x


def _config(args) -> SolverConfig:
    return SolverConfig(args.tol_pd, args.tol_root, args.tol_sing, args.tol_sim)


# --------------------------------------------------------------- JSON report

def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def candidate_to_dict(c: CandidateSolution) -> dict:
    rep = None
    if c.report is not None:
        rep = {
            "singular_residuals": {str(d): _num(v) for d, v in c.report.singular_residuals.items()},
            "pd": list(c.report.pd_results),
            "minors": [[_num(v) for v in m] for m in c.report.minors],
            "failed": c.report.failed(),
            "passed": c.report.passed,
        }
    return {
        "case_id": c.case.id,
        "type": c.case.type.value,
        "k": c.case.k,
        "a": _num(c.a),
        "b": _num(c.b),
        "theta": _num(c.theta),
        "nodes": [_num(z) for z in c.nodes],
        "weights": [_num(w) for w in c.weights],
        "accepted": c.accepted,
        "reject_reason": c.rejected_reason,
        "reasons": list(c.reasons),
        "condition_report": rep,
        "residual": _num(c.residual),
        "control": c.control.to_list() if c.control is not None else None,
    }


def report_to_dict(rep: SolveReport | None, x0: Sequence[float], config: SolverConfig,
                   accepted_only: bool = False, verdict: str | None = None) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "input": {
            "x0": [float(v) for v in x0],
            "tolerances": {"tol_pd": config.tol_pd, "tol_root": config.tol_root,
                           "tol_sing": config.tol_sing, "tol_sim": config.tol_sim},
        },
        "verdict": verdict or rep.verdict,
        "candidates": [],
        "best": None,
        "co_optimal": [],
    }
    if rep is None:
        return out
    cands = sorted(rep.candidates, key=lambda c: c.case.id)
    out["candidates"] = [candidate_to_dict(c) for c in cands if c.accepted or not accepted_only]
    out["degenerate_cases"] = list(rep.degenerate_cases)
    best = rep.best
    if best is not None:
        out["best"] = {
            "case_id": best.case.id,
            "theta": best.theta,
            "control": best.control.to_list(),
            "mirrored": rep.mirrored,
        }
        out["co_optimal"] = [c.case.id for c in rep.co_optimal]
    return out


def _dump(obj, out_path: str | None) -> None:
    text = json.dumps(obj, indent=2)
    _write(text + "\n", out_path)


def _write(text: str, out_path: str | None) -> None:
    if out_path and out_path != "-":
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v: float) -> str:
    return repr(float(v))


def _text_report(d: dict) -> str:
    lines = [f"verdict: {d['verdict']}"]
    for c in d["candidates"]:
        status = "accepted" if c["accepted"] else f"rejected ({c['reject_reason']})"
        theta = "-" if c["theta"] is None else f"{c['theta']:.10g}"
        lines.append(f"case {c['case_id']} type {c['type']} k={c['k']}: a={c['a']:.10g} "
                     f"b={c['b']:.10g} theta={theta} {status}")
    if d["best"]:
        b = d["best"]
        lines.append(f"best: case {b['case_id']}, theta = {b['theta']:.12g}"
                     + (" (mirrored)" if b["mirrored"] else ""))
        for seg in b["control"]:
            lines.append(f"  u = {seg['level']:+d} for {seg['duration']:.12g}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ commands

def run_solve(x0: Sequence[float], config: SolverConfig) -> tuple[SolveReport | None, str]:
    try:
        rep = solve(x0, config)
    except NonGeneric:
        return None, "non_generic"
    return rep, rep.verdict


def cmd_solve(args) -> int:
    x0 = _x0(args)
    config = _config(args)
    rep, verdict = run_solve(x0, config)
    d = report_to_dict(rep, x0, config, args.accepted_only, verdict)
    if args.json:
        _dump(d, args.out)
    else:
        _write(_text_report(d), args.out)
    if args.trajectory and rep is not None and rep.best is not None:
        traj = sample_trajectory(x0, rep.best.control, args.samples)
        _write(trajectory_csv(traj, len(x0)), args.trajectory)
    return VERDICT_EXIT[verdict]


def trajectory_csv(traj, n: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{j}" for j in range(1, n + 1)] + ["u"])
    for t, x, u in traj.samples:
        w.writerow([_fmt(t)] + [_fmt(v) for v in x] + [str(u)])
    return buf.getvalue()


def parse_control(text: str) -> StairStepControl:
    """``level:duration`` pairs separated by commas, e.g. ``1:0.5,0:2,-1:1``."""
    segs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            lv, dur = item.split(":")
            segs.append({"level": int(lv), "duration": float(dur)})
        except ValueError:
            raise UsageError(f"bad control segment {item!r}") from None
    if not segs:
        raise UsageError("empty control")
    try:
        return StairStepControl.from_list(segs)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _load_report(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read report {path!r}: {e}") from None


def cmd_simulate(args) -> int:
    if args.report:
        d = _load_report(args.report)
        if not d.get("best"):
            raise UsageError("report has no best control")
        try:
            u = StairStepControl.from_list(d["best"]["control"])
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"invalid control in report: {e}") from None
        x0 = parse_vector(args.x0) if args.x0 else d["input"]["x0"]
    elif args.control:
        u = parse_control(args.control)
        x0 = _x0(args)
    else:
        raise UsageError("give --control or --report")
    if len(x0) < 4:
        raise UsageError("--x0 needs at least 4 components")
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    if not u.segments:
        raise UsageError("empty control")
    traj = sample_trajectory(x0, u, args.samples)
    _write(trajectory_csv(traj, len(x0)), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .oracle import GridSpec, grid_search_min_time

    config = _config(args)
    if args.report:
        d = _load_report(args.report)
        try:
            x0 = [float(v) for v in d["input"]["x0"]]
            verdict = d["verdict"]
            best = d.get("best")
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"malformed report: {e}") from None
    else:
        x0 = _x0(args)
        rep, verdict = run_solve(x0, config)
        best = report_to_dict(rep, x0, config)["best"] if rep else None
    if len(x0) > 5:
        raise UsageError("the grid oracle is limited to n <= 5")
    if verdict == "non_generic":
        print("verify: non-generic initial state, nothing to compare")
        return EXIT_NON_GENERIC
    state = InitialState(x0)
    grid = GridSpec(points=args.grid_points, refinements=args.refinements)
    oracle = grid_search_min_time(state, grid=grid)
    problems = []
    summary = {"x0": x0, "verdict": verdict, "oracle_theta": oracle.theta,
               "oracle_history": oracle.history}
    if best is not None:
        theta = float(best["theta"])
        u = StairStepControl.from_list(best["control"])
        final, _ = simulate_exact(x0, u)
        residual = max(abs(v) for v in final)
        summary.update(solver_theta=theta, residual=residual)
        if abs(u.total_time - theta) > 1e-9 * max(1.0, abs(theta)):
            problems.append(f"control duration {u.total_time!r} differs from theta {theta!r}")
        if residual > config.tol_sim * (1 + max(abs(v) for v in x0)):
            problems.append(f"simulation residual {residual:.3e} above tolerance")
        if oracle.theta is None:
            problems.append("oracle found no feasible control")
        elif oracle.theta < theta * (1 - 1e-3):
            problems.append(f"oracle time {oracle.theta!r} below solver theta {theta!r}")
    elif oracle.theta is not None:
        problems.append(f"solver reports {verdict} but oracle found time {oracle.theta!r}")
    summary["discrepancies"] = problems
    if args.json:
        _dump(summary, args.out)
    else:
        lines = [f"solver: {verdict}" + (f", theta = {summary['solver_theta']!r}" if best else ""),
                 f"oracle: {oracle.theta!r}"]
        lines += [f"DISCREPANCY: {p}" for p in problems] or ["agreement"]
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_DISCREPANCY if problems else EXIT_OK


def parse_axis(text: str) -> tuple[int, list[float]]:
    """``J=lo:hi:count`` with a one-based component index."""
    try:
        idx, rng = text.split("=")
        lo, hi, count = rng.split(":")
        j, lo, hi, count = int(idx), float(lo), float(hi), int(count)
    except ValueError:
        raise UsageError(f"bad axis {text!r}, expected J=lo:hi:count") from None
    if count < 1:
        raise UsageError("axis count must be positive")
    if count == 1:
        return j, [lo]
    return j, [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def sweep_points(template: Sequence[float], axes: Sequence[tuple[int, list[float]]]):
    """Grid points in deterministic order (the last axis varies fastest)."""
    for combo in itertools.product(*(vals for _, vals in axes)):
        x = list(template)
        for (j, _), v in zip(axes, combo):
            x[j - 1] = v
        yield x


def sweep(template: Sequence[float], axes, config: SolverConfig | None = None) -> list[dict]:
    rows = []
    for x in sweep_points(template, axes):
        rep, verdict = run_solve(x, config or SolverConfig())
        best = rep.best if rep is not None else None
        rows.append({"x0": x, "verdict": verdict,
                     "theta": best.theta if best else None,
                     "case_id": best.case.id if best else None})
    return rows


def local_minima(xs: Sequence[float], ys: Sequence[float | None]) -> list[int]:
    """Indices of strict interior local minima (undefined values break runs)."""
    out = []
    for i in range(1, len(ys) - 1):
        y0, y1, y2 = ys[i - 1], ys[i], ys[i + 1]
        if None in (y0, y1, y2):
            continue
        if y1 < y0 and y1 <= y2:
            out.append(i)
    return out


def refine_minimum(template, j: int, lo: float, hi: float, config=None, rounds: int = 3,
                   count: int = 21) -> tuple[float, float]:
    """Zoom a 1-D sweep in on a local minimum bracketed by ``[lo, hi]``."""
    best = None
    for _ in range(rounds):
        rows = sweep(template, [(j, [lo + (hi - lo) * i / (count - 1) for i in range(count)])], config)
        finite = [(r["theta"], r["x0"][j - 1]) for r in rows if r["theta"] is not None]
        if not finite:
            break
        theta, xv = min(finite)
        best = (xv, theta)
        step = (hi - lo) / (count - 1)
        lo, hi = xv - step, xv + step
    if best is None:
        raise ValueError("no finite values in bracket")
    return best


def cmd_sweep(args) -> int:
    if not args.x0:
        raise UsageError("--x0 is required (use _ for swept components)")
    parts = [p.strip() for p in args.x0.split(",")]
    if len(parts) < 4:
        raise UsageError("--x0 needs at least 4 components")
    if not args.vary:
        raise UsageError("at least one --vary J=lo:hi:count is required")
    axes = [parse_axis(v) for v in args.vary]
    n = len(parts)
    for j, _ in axes:
        if not 1 <= j <= n:
            raise UsageError(f"axis index {j} outside 1..{n}")
    template = [0.0 if p in ("_", "") else parse_vector(p)[0] for p in parts]
    rows = sweep(template, axes, _config(args))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{j}" for j in range(1, n + 1)] + ["verdict", "theta", "case_id"])
    for r in rows:
        w.writerow([_fmt(v) for v in r["x0"]] + [
            r["verdict"],
            "" if r["theta"] is None else _fmt(r["theta"]),
            "" if r["case_id"] is None else str(r["case_id"]),
        ])
    _write(buf.getvalue(), args.out)
    if args.minima and len(axes) == 1:
        j, xs = axes[0]
        ys = [r["theta"] for r in rows]
        for i in local_minima(xs, ys):
            xv, th = refine_minimum(template, j, xs[i - 1], xs[i + 1], _config(args))
            print(f"local minimum: x{j} = {xv!r}, theta = {th!r}", file=sys.stderr)
    return EXIT_OK


def moments_summary(x0: Sequence[float], a: float, b: float, theta: float) -> dict:
    state = InitialState(x0)
    c = moments_unchecked(state, a, b, theta)
    shifted = {kind.value: [float(v) for v in shift_sequence(c, kind, a, b).c]
               for kind in (ShiftKind.A, ShiftKind.B, ShiftKind.AB)}
    return {"c": [float(v) for v in c.c], **shifted}


def case_equations_summary(x0: Sequence[float], case_id: int) -> dict:
    state = InitialState(x0)
    case = next((c for c in enumerate_cases(state.n) if c.id == case_id), None)
    if case is None:
        raise UsageError(f"case {case_id} does not occur for n = {state.n}")
    eqs = endpoint_equations(state, case)
    out = {"case_id": case.id, "type": case.type.value, "k": case.k, "equations": []}
    for d, eq in zip((d for d in case.d_range if d >= 1), eqs):
        terms = from_mpoly(eq).to_dict()
        out["equations"].append({
            "d": d,
            "terms": [{"a_power": i, "b_power": j, "coefficient": str(v), "value": float(v)}
                      for (i, j), v in sorted(terms.items(), key=lambda t: (-t[0][1], -t[0][0]))],
        })
    return out


def cmd_moments(args) -> int:
    x0 = _x0(args)
    out = {}
    if args.case is not None:
        out["case"] = case_equations_summary(x0, args.case)
    if args.a is not None or args.b is not None or args.theta is not None:
        a = 0.0 if args.a is None else args.a
        b = x0[0] if args.b is None else args.b
        theta = 0.0 if args.theta is None else args.theta
        out["moments"] = moments_summary(x0, a, b, theta)
    if not out:
        raise UsageError("give --case and/or --a/--b/--theta")
    _dump(out, args.out)
    return EXIT_OK


# -------------------------------------------------------------------- parser

def _common(p, tolerances: bool = True):
    _add(p, "--x0", help="initial state, comma separated")
    _add(p, "--json", action="store_true", help="JSON output")
    _add(p, "--out", help="output path (default stdout)")
    if tolerances:
        _add(p, "--tol-pd", type=float, default=TOL_PD)
        _add(p, "--tol-root", type=float, default=TOL_ROOT)
        _add(p, "--tol-sing", type=float, default=TOL_SING)
        _add(p, "--tol-sim", type=float, default=1e-8)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="moment-toc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="time-optimal control for an initial state")
    _common(p)
    _add(p, "--accepted-only", action="store_true", help="omit rejected candidates")
    _add(p, "--trajectory", help="also write the best trajectory as CSV here")
    _add(p, "--samples", type=int, default=1000)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="exact trajectory of a stair-step control")
    _common(p, tolerances=False)
    _add(p, "--control", help="level:duration pairs, e.g. 1:0.5,-1:2")
    _add(p, "--report", help="take the best control from a solve report ('-' for stdin)")
    _add(p, "--samples", type=int, default=1000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="compare the solver with the grid oracle (n <= 5)")
    _common(p)
    _add(p, "--report", help="check this solve report instead of solving ('-' for stdin)")
    _add(p, "--grid-points", type=int, default=160_000)
    _add(p, "--refinements", type=int, default=2)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="solve over a grid of initial states")
    _common(p)
    p.add_argument("--vary", action="append",
                   default=[v for v in os.environ.get(ENV_PREFIX + "VARY", "").split(";") if v],
                   help="J=lo:hi:count, one-based component index (repeatable)")
    _add(p, "--minima", action="store_true", help="refine local minima of a 1-D sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("moments", help="inspect moment sequences and case equations")
    _common(p, tolerances=False)
    _add(p, "--a", type=float)
    _add(p, "--b", type=float)
    _add(p, "--theta", type=float)
    _add(p, "--case", type=int)
    p.set_defaults(func=cmd_moments)
    return parser


_VALUE_FLAGS = ("--x0", "--control")


def _glue_negative_values(argv: list[str]) -> list[str]:
    """``--x0 -1,2,..`` would read as an unknown option; glue such values to
    their flag."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_negative_values(list(sys.argv[1:] if argv is None else argv)))
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        print(f"moment-toc {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
