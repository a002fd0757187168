"""Command-line front end: ``fdelab {check,solve,verify,sweep} --scenario FILE``.

Exit codes: 0 all requested checks and verifications pass, 1 usage or
scenario error, 2 a check or verification failed, 3 the solver failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import property_report
from .conditions import theorem_verdict
from .core import ModelError, Trajectory
from .models import raw_equation
from .scenario import Scenario, ScenarioError, load_scenario, with_override
from .solver import (BlowUpError, ConvergenceError, ShootingError, extend_forward, limit_scheme)

log = logging.getLogger("fdelab")

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_SOLVER = 0, 1, 2, 3
MAX_ROWS = 100_000


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_report(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_csv(traj: Trajectory, full_density: bool = False) -> str:
    """``t,u,du`` rows with 17 significant digits; thinned to ``MAX_ROWS`` unless ``full_density``."""
    idx = np.arange(len(traj))
    if not full_density and idx.size > MAX_ROWS:
        idx = np.unique(np.round(np.linspace(0, idx.size - 1, MAX_ROWS)).astype(int))
    buf = io.StringIO()
    buf.write("t,u,du\n")
    np.savetxt(buf, np.column_stack([traj.t[idx], traj.u[idx], traj.du[idx]]), fmt="%.17g", delimiter=",")
    return buf.getvalue()


def read_trajectory(path: str | Path) -> Trajectory:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        if header != "t,u,du":
            raise ScenarioError(f"{path}: expected header 't,u,du', found {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return Trajectory(data[:, 0], data[:, 1], data[:, 2])


# --------------------------------------------------------------------------
# runs
# --------------------------------------------------------------------------

def check_payload(scn: Scenario) -> tuple[dict, bool]:
    eq = scn.equation()
    records = []
    ok = True
    for which in scn.check.theorems:
        try:
            verdict = theorem_verdict(eq, which, scn.check.window, scn.check.grid_step,
                                      scn.check.sharpen, scn.check.forward)
        except ModelError as exc:
            raise ScenarioError(f"check.theorems: {which} does not apply to model {scn.model_id!r} ({exc})") from None
        ok = ok and verdict.passed
        records.append(verdict.to_dict())
    return {"scenario": scn.name, "kind": "check", "passed": ok, "theorems": records}, ok


def run_check(scn: Scenario, out_dir: Path) -> int:
    payload, ok = check_payload(scn)
    write_atomic(out_dir / scn.outputs.check_report, dumps_report(payload))
    return EXIT_OK if ok else EXIT_CHECK


def _solve_summary(result) -> dict:
    return {
        "n_used": result.n_used,
        "converged": result.converged,
        "truncations": list(result.truncations),
        "cauchy_trace": list(result.cauchy_trace),
        "clamp_active": result.clamp_active,
        "shoot_trace": [{k: v for k, v in s.items() if k != "scan"} for s in result.shoot_trace],
    }


def _reach(exc: BlowUpError, fallback: Trajectory | None):
    if exc.partial is not None:
        return exc.partial.b
    return fallback.b if fallback is not None else None


def solve_payload(scn: Scenario) -> tuple[dict, Trajectory | None, int]:
    """Construct, extend and verify; returns ``(report, trajectory, exit code)``."""
    eq = scn.equation()
    cfg = scn.solve
    report: dict = {"scenario": scn.name, "kind": "solve", "model": scn.model_id,
                    "anchor": {"t0": scn.t0, "c": scn.c}, "failure": None}
    traj = None
    result = None
    try:
        result = limit_scheme(eq, cfg)
    except ConvergenceError as exc:
        result = exc.result
        report["failure"] = {"stage": "limit", "message": str(exc)}
    except ShootingError as exc:
        report["failure"] = {"stage": "shoot", "message": str(exc),
                             "trace": {k: v for k, v in exc.trace.items() if k != "scan"}}
    except BlowUpError as exc:
        traj = exc.partial
        report["failure"] = {"stage": "shoot", "message": str(exc), "reach": _reach(exc, None)}
    if result is not None:
        report["solve"] = _solve_summary(result)
        traj = result.trajectory
        if report["failure"] is None and cfg.forward_horizon is not None:
            try:
                traj = extend_forward(result, raw_equation(eq), cfg.forward_horizon, cfg.h)
            except BlowUpError as exc:
                report["failure"] = {"stage": "extend", "message": str(exc), "reach": _reach(exc, traj)}
                traj = exc.partial if exc.partial is not None else traj
    if report["failure"] is not None:
        report["status"] = "failed"
        if traj is not None:
            report["partial_reach"] = [traj.a, traj.b]
        return report, traj, EXIT_SOLVER
    props = property_report(traj, raw_equation(eq), scn.verify.window, scn.verify.thresholds)
    flags = props.flags()
    report["properties"] = props.to_dict()
    required = {name: flags.get(name) for name in scn.verify.require}
    report["required"] = required
    ok = all(v is True for v in required.values())
    report["status"] = "pass" if ok else "fail"
    return report, traj, EXIT_OK if ok else EXIT_CHECK


def run_solve(scn: Scenario, out_dir: Path, full_density: bool = False) -> int:
    report, traj, code = solve_payload(scn)
    if traj is not None:
        write_atomic(out_dir / scn.outputs.trajectory, trajectory_csv(traj, full_density))
    write_atomic(out_dir / scn.outputs.report, dumps_report(report))
    return code


def run_verify(scn: Scenario, out_dir: Path, trajectory: Path | None = None) -> int:
    path = trajectory or (out_dir / scn.outputs.trajectory)
    traj = read_trajectory(path)
    eq = raw_equation(scn.equation())
    props = property_report(traj, eq, scn.verify.window, scn.verify.thresholds)
    flags = props.flags()
    required = {name: flags.get(name) for name in scn.verify.require}
    ok = all(v is True for v in required.values())
    payload = {"scenario": scn.name, "kind": "verify", "properties": props.to_dict(),
               "required": required, "status": "pass" if ok else "fail"}
    write_atomic(out_dir / scn.outputs.verify_report, dumps_report(payload))
    return EXIT_OK if ok else EXIT_CHECK


def _sweep_row(args) -> dict:
    scn, parameter, value, index, rows_dir = args
    row = {"index": index, "value": value, "check": "", "c_in_interval": "", "solve": "",
           "left_limit": "", "left_status": "", "right_end": "", "error": ""}
    payload: dict = {"index": index, "parameter": parameter, "value": value}
    try:
        sub = with_override(scn, parameter, value)
        chk, ok = check_payload(sub)
        payload["check"] = chk
        row["check"] = ("pass" if ok else "fail") if chk["theorems"] else "none"
        inside = [t["c_in_interval"] for t in chk["theorems"] if t["c_in_interval"] is not None]
        row["c_in_interval"] = str(all(inside)).lower() if inside else ""
        report, _, code = solve_payload(sub)
        payload["solve"] = report
        row["solve"] = report["status"]
        if "properties" in report:
            props = report["properties"]
            row["left_limit"] = repr(float(props["left_limit"]["value"]))
            row["left_status"] = props["left_limit"]["status"]
            if props["right_end"] is not None:
                row["right_end"] = props["right_end"]["kind"]
    except (ScenarioError, ModelError, ValueError) as exc:
        row["error"] = str(exc)
        payload["error"] = str(exc)
    write_atomic(rows_dir / f"row-{index:04d}.json", dumps_report(payload))
    return row


def run_sweep(scn: Scenario, out_dir: Path, parameter: str | None = None, values=None, jobs: int = 1) -> int:
    spec = scn.sweep or {}
    parameter = parameter or spec.get("parameter")
    values = list(spec.get("values", [])) if values is None else list(values)
    if not parameter:
        raise ScenarioError("sweep: no parameter given (use [sweep] or --param)")
    rows_dir = out_dir / "rows"
    tasks = [(scn, parameter, v, k, rows_dir) for k, v in enumerate(values)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    buf = io.StringIO()
    fields = ["index", "value", "check", "c_in_interval", "solve", "left_limit", "left_status",
              "right_end", "error"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    write_atomic(out_dir / scn.outputs.table, buf.getvalue())
    bad = [r for r in rows if r["error"] or r["solve"] == "failed"]
    failed = [r for r in rows if r["check"] == "fail" or r["solve"] == "fail"]
    if bad:
        return EXIT_SOLVER
    return EXIT_CHECK if failed else EXIT_OK


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------

def _parse_value(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdelab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("check", "evaluate theorem hypotheses"),
                            ("solve", "construct, extend and verify a solution"),
                            ("verify", "re-verify an existing trajectory file"),
                            ("sweep", "repeat check and solve over parameter values")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, help="scenario TOML file")
        p.add_argument("--out-dir", default=".", help="directory for output files")
        p.add_argument("--window", type=float, help="override check.window and verify.window")
        p.add_argument("--step", type=float, help="override solve.h")
        p.add_argument("--jobs", type=int, default=1, help="parallel sweep rows")
        p.add_argument("--full-density", action="store_true", help="write every trajectory knot")
        if name == "verify":
            p.add_argument("--trajectory", help="trajectory file (default: the scenario's output)")
        if name == "sweep":
            p.add_argument("--param", help="dotted scenario path, e.g. model.tau")
            p.add_argument("--values", nargs="*", help="values for --param")
    return parser


def _apply_overrides(scn: Scenario, args) -> Scenario:
    if args.window is not None:
        if not args.window > 0:
            raise ScenarioError("--window must be positive")
        scn.check = replace(scn.check, window=args.window)
        scn.verify = replace(scn.verify, window=args.window)
    if args.step is not None:
        if not args.step > 0:
            raise ScenarioError("--step must be positive")
        scn.solve = replace(scn.solve, h=args.step)
    return scn


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out_dir = Path(args.out_dir)
    try:
        scn = _apply_overrides(load_scenario(args.scenario), args)
        if args.command == "check":
            return run_check(scn, out_dir)
        if args.command == "solve":
            return run_solve(scn, out_dir, args.full_density)
        if args.command == "verify":
            return run_verify(scn, out_dir, Path(args.trajectory) if args.trajectory else None)
        values = [_parse_value(v) for v in args.values] if args.values is not None else None
        if args.jobs < 1:
            raise ScenarioError("--jobs must be at least 1")
        return run_sweep(scn, out_dir, args.param, values, args.jobs)
    except ScenarioError as exc:
        print(f"fdelab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fdelab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
