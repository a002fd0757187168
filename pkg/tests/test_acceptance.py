"""Acceptance criteria A1 to A9.

Every criterion records one PASS/FAIL line through the ``criterion`` fixture
(printed inline and again in the terminal summary) and then asserts.
Solutions for the four acceptance scenarios are computed once per module.
"""
import json
import math
from functools import lru_cache
from pathlib import Path

import mpmath
import numpy as np
import pytest

from fdelab import cli
from fdelab.analysis import classify_right_end, equilibrium_residual, estimate_left_limit, verify_monotone
from fdelab.conditions import (admissible_c_interval, check_one_over_e, compute_M_mu, lambda_fixed_point,
                               theorem_verdict)
from fdelab.core import IDENTITY, CoeffFunction, DelayTerm, Equation, Trajectory, ZeroNonlinearity, eval_rhs
from fdelab.models import make_delay_eq, make_power_monostable, make_wavefront, raw_equation
from fdelab.scenario import load_scenario
from fdelab.solver import extend_forward, integrate_forward, limit_scheme, reintegrate

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
A_SCENARIOS = {"A1": "a1_delay_p1.toml", "A2": "a2_delay_p05.toml", "A3": "a3_monotone.toml",
               "A4": "a4_logistic.toml"}
WINDOW = 40.0
FORWARD = 100.0


@lru_cache(maxsize=None)
def solved(tag):
    scn = load_scenario(SCENARIOS / A_SCENARIOS[tag])
    eq = scn.equation()
    result = limit_scheme(eq, scn.solve)
    return scn, eq, result


def left_values(traj, t0, window=WINDOW):
    return traj(traj.sample_points((t0 - window, t0)))


def summary(checks: dict) -> str:
    return ", ".join(f"{k}={'ok' if v else 'NO'}" for k, v in checks.items())


# -- A1 / A2 -----------------------------------------------------------------

def _delay_case(tag, strict_left):
    scn, eq, result = solved(tag)
    verdict = theorem_verdict(eq, "T6.1", WINDOW)
    top = math.exp(-0.25)
    iv = verdict.c_interval
    left = left_values(result.trajectory, scn.t0)
    ext = extend_forward(result, raw_equation(eq), FORWARD, scn.solve.h)
    right = ext(ext.sample_points((scn.t0, FORWARD)))
    lim = estimate_left_limit(result.trajectory)
    checks = {
        "anchor": scn.c == pytest.approx(0.5 * top, rel=1e-15),
        "T6.1": verdict.passed,
        "interval": (iv.lower == 0.0 and not iv.lower_closed and abs(iv.upper - top) <= 1e-12
                     and iv.upper_closed),
        "converged": result.converged and scn.solve.cauchy_tol == 1e-6 and scn.solve.compact_window == 10.0,
        "left-band": (left.min() > 0.0 if strict_left else left.min() >= 0.0) and left.max() <= 1.0,
        "right-positive": ext.b == FORWARD and right.min() > 0.0,
        "left-limit": lim.value < 1e-3 and lim.status == "converged",
    }
    detail = (f"{summary(checks)}; min u on left window {left.min():.3g}, "
              f"left limit {lim.value:.3g}, min u on [t0, {FORWARD:g}] {right.min():.3g}")
    return checks, detail


def test_A1_delay_equation_end_to_end(criterion):
    checks, detail = _delay_case("A1", strict_left=True)
    criterion("A1", all(checks.values()), detail)
    assert all(checks.values()), detail


def test_A2_degenerate_exponent(criterion):
    checks, detail = _delay_case("A2", strict_left=False)
    criterion("A2", all(checks.values()), detail)
    assert all(checks.values()), detail


# -- A3 ----------------------------------------------------------------------

def test_A3_monotone_case(criterion):
    scn, eq, result = solved("A3")
    verdict = theorem_verdict(eq, "T2.6", WINDOW)
    mono = verify_monotone(result.trajectory, 1e-10, (scn.t0 - WINDOW, scn.t0))
    checks = {
        "T2.6": verdict.passed,
        "p0-dominates-p1": verdict.condition("p0-dominates-p1").ok,
        "delay-order": verdict.condition("delay-order").ok,
        "monotone": mono.passed,
    }
    detail = f"{summary(checks)}; T2.6 status {verdict.status}, min slope {mono.min_slope:.3g}"
    criterion("A3", all(checks.values()), detail)
    assert all(checks.values()), detail


# -- A4 ----------------------------------------------------------------------

def test_A4_logistic_dichotomy(criterion):
    scn, eq, result = solved("A4")
    verdict = theorem_verdict(eq, "T6.2", WINDOW)
    traj = result.trajectory
    mono = verify_monotone(traj, 1e-10, (scn.t0 - WINDOW, scn.t0))
    lim = estimate_left_limit(traj)
    ext = extend_forward(result, raw_equation(eq), FORWARD, scn.solve.h)
    right = classify_right_end(ext, eq.kappa, span=(scn.t0, FORWARD))
    checks = {
        "T6.2": verdict.passed,
        "g0-diverges": verdict.condition("g0-diverges").ok,
        "kernel-mass": verdict.condition("kernel-mass-positive").ok,
        "monotone": mono.passed,
        "left-limit": lim.value < 1e-3,
        "right-end": ext.b == FORWARD and right.kind in ("limit-to-kappa", "oscillates-about-kappa"),
    }
    detail = f"{summary(checks)}; right end {right.kind} ({right.crossings} crossings), left limit {lim.value:.3g}"
    criterion("A4", all(checks.values()), detail)
    assert all(checks.values()), detail


# -- A5 ----------------------------------------------------------------------

def _bisection_oracle(p):
    mpmath.mp.dps = 40
    root = mpmath.findroot(lambda lam: lam - mpmath.exp(lam * p), (1, mpmath.e), solver="bisect")
    mpmath.mp.dps = 15
    return float(root)


def test_A5_hypothesis_calculus(criterion):
    shift1 = CoeffFunction.builtin("shift", delta=1.0)
    mid = 0.5 / math.e
    r = 0.3
    M = compute_M_mu(CoeffFunction.constant(1.0), CoeffFunction.builtin("shift", delta=r), IDENTITY, 0.0, WINDOW)
    expected = {
        "T2.5": (0.0, math.exp(-0.2), True, False),
        "T2.6": (0.0, 1.0, True, True),
        "T6.1": (0.0, math.exp(-0.2), False, True),
        "T6.2": (0.0, 1.0, False, False),
    }
    intervals_ok = True
    for thm, (lo, hi, lc, uc) in expected.items():
        iv = admissible_c_interval(thm, 1.0, 0.2)
        intervals_ok &= (iv.lower == lo and abs(iv.upper - hi) <= 1e-15 and iv.lower_closed == lc
                         and iv.upper_closed == uc)
    checks = {
        "one-over-e 0.3": check_one_over_e(CoeffFunction.constant(0.3), shift1, 0.0, WINDOW).ok,
        "one-over-e 0.5": not check_one_over_e(CoeffFunction.constant(0.5), shift1, 0.0, WINDOW).ok,
        "lambda(0)": lambda_fixed_point(0.0) == 1.0,
        "lambda(1/e)": abs(lambda_fixed_point(1 / math.e) - math.e) <= 1e-10,
        "lambda(mid)": abs(lambda_fixed_point(mid) - _bisection_oracle(mid)) <= 1e-10,
        "M_mu": abs(M - r) <= 1e-9,
        "intervals": intervals_ok,
    }
    detail = f"{summary(checks)}; lambda(1/(2e)) = {lambda_fixed_point(mid):.15g}, M_mu = {M:.12g}"
    criterion("A5", all(checks.values()), detail)
    assert all(checks.values()), detail


# -- A6 ----------------------------------------------------------------------

def test_A6_integrator_accuracy(criterion):
    decay = Equation((), (DelayTerm(1.0, IDENTITY),), ZeroNonlinearity(), 1.0)
    err = abs(integrate_forward(decay, 1.0, (0.0, 1.0), 1e-3)(1.0) - math.exp(-1.0))
    errs = [abs(integrate_forward(decay, 1.0, (0.0, 1.0), h)(1.0) - math.exp(-1.0)) for h in (1e-2, 5e-3, 2.5e-3)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    eq = make_delay_eq(make_power_monostable(1.0, 1.0), 1.0, 5.0, 0.0, 1.0)
    mos = abs(integrate_forward(eq, 0.2, (0.0, 1.0), 1e-3)(1.0) - (0.36 - 0.16 * math.exp(-1.0)))
    checks = {
        "error": err < 1e-10,
        "order": all(10.0 <= q <= 24.0 for q in ratios),
        "method-of-steps": mos <= 1e-9,
    }
    detail = (f"{summary(checks)}; error {err:.2e}, ratios {', '.join(f'{q:.2f}' for q in ratios)}, "
              f"first-interval error {mos:.2e}")
    criterion("A6", all(checks.values()), detail)
    assert all(checks.values()), detail


# -- A7 ----------------------------------------------------------------------

def test_A7_scheme_self_consistency(criterion):
    parts = []
    ok = True
    for tag in A_SCENARIOS:
        scn, eq, result = solved(tag)
        traj = result.trajectory
        free = reintegrate(eq, result.start, scn.t0, scn.solve.h, clamped=False)
        grid = np.linspace(traj.a, scn.t0, 20001)
        inert = float(np.max(np.abs(free(grid) - traj(grid))))
        redo = reintegrate(eq, result.start, scn.t0, scn.solve.h, clamped=True)
        anchor = abs(redo(scn.t0) - scn.c)
        good = inert < 1e-9 and anchor <= 1e-10
        ok &= good
        parts.append(f"{tag} clamp sup-diff {inert:.1e}, |u(t0)-c| {anchor:.1e}")
    detail = "; ".join(parts)
    criterion("A7", ok, detail)
    assert ok, detail


# -- A8 ----------------------------------------------------------------------

def _random_trajectory(rng):
    knots = np.unique(rng.uniform(-12.0, 12.0, 40))
    return Trajectory.from_samples(knots, rng.uniform(0.0, 1.0, len(knots)), np.zeros(len(knots)))


def test_A8_equilibria_and_reduction(criterion):
    delay = solved("A1")[1]
    logistic = raw_equation(solved("A4")[1])
    ts = np.linspace(-40.0, 40.0, 81)
    residuals = {f"{name}@{level:g}": equilibrium_residual(eq, level, ts)
                 for name, eq in (("delay", delay), ("logistic", logistic)) for level in (0.0, eq.kappa)}
    G = make_power_monostable(1.0, 1.0)
    eq = make_delay_eq(G, 0.25, 0.0, 0.3, 1.0)
    wave = make_wavefront(G, 1.0, 0.25)
    rng = np.random.default_rng(2024)
    red, cross = 0.0, 0.0
    for _ in range(100):
        traj = _random_trajectory(rng)
        for t in rng.uniform(-10.0, 10.0, 3):
            t = float(t)
            direct = -traj(t) + G(traj(t - 0.25))
            got = eval_rhs(eq, traj, t)
            red = max(red, abs(got - direct))
            cross = max(cross, abs(eval_rhs(wave, traj, t) - got))
    checks = {
        "equilibria": max(residuals.values()) <= 1e-12,
        "reduction": red <= 1e-12,
        "wave_speed=1": cross <= 1e-12,
    }
    detail = f"{summary(checks)}; max residual {max(residuals.values()):.1e}, reduction {red:.1e}, cross {cross:.1e}"
    criterion("A8", all(checks.values()), detail)
    assert all(checks.values()), detail


# -- A9 ----------------------------------------------------------------------

def test_A9_determinism_and_round_trip(criterion, tmp_path):
    parts = []
    ok = True
    for tag, name in A_SCENARIOS.items():
        path = str(SCENARIOS / name)
        runs = [tmp_path / tag / k for k in ("first", "second")]
        codes = [cli.main(["solve", "--scenario", path, "--out-dir", str(d)]) for d in runs]
        identical = all((runs[0] / f).read_bytes() == (runs[1] / f).read_bytes()
                        for f in ("trajectory.csv", "report.json"))
        vcode = cli.main(["verify", "--scenario", path, "--out-dir", str(runs[0])])
        solved_flags = json.loads((runs[0] / "report.json").read_text())["properties"]["flags"]
        verified_flags = json.loads((runs[0] / "verify.json").read_text())["properties"]["flags"]
        good = codes == [0, 0] and identical and vcode == 0 and solved_flags == verified_flags
        ok &= good
        parts.append(f"{tag} {'identical' if identical else 'DIFFERENT'}, "
                     f"round-trip {'same' if solved_flags == verified_flags else 'CHANGED'}")
    detail = "; ".join(parts)
    criterion("A9", ok, detail)
    assert ok, detail
