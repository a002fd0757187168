"""Qualitative checks on computed trajectories.

All checks sample the knots and segment midpoints of a trajectory, or the
stored knot derivatives for slopes, so a report is a deterministic function
of the trajectory and the thresholds.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .conditions import _rigidity_conditions
from .core import Equation, Trajectory, eval_rhs


@dataclass(frozen=True)
class VerifyThresholds:
    band_tol: float = 1e-12
    monotone_tol: float = 1e-10
    tail_fraction: float = 0.2
    window_fraction: float = 0.25
    spread_rel: float = 1e-3
    slope_tol: float = 1e-4
    limit_rel: float = 1e-2
    noise_rel: float = 1e-12


DEFAULT_THRESHOLDS = VerifyThresholds()


@dataclass
class BandResult:
    passed: bool
    min: float
    max: float
    lo: float
    hi: float
    tol: float


@dataclass
class MonotoneResult:
    passed: bool
    min_slope: float
    tol: float


@dataclass
class LimitEstimate:
    value: float
    spread: float
    slope: float
    status: str
    span: tuple[float, float]


@dataclass
class RightEnd:
    kind: str
    crossings: int
    estimate: float
    spread: float
    slope: float
    span: tuple[float, float]


def _span_points(traj: Trajectory, span):
    pts = traj.sample_points(span)
    if pts.size == 0:
        raise ValueError(f"no samples of the trajectory inside {span}")
    return pts


def verify_band(traj: Trajectory, lo: float, hi: float, tol: float = 1e-12, span=None) -> BandResult:
    """``lo - tol <= u <= hi + tol`` at every knot and midpoint (inside ``span``)."""
    vals = traj(_span_points(traj, span))
    vmin, vmax = float(np.min(vals)), float(np.max(vals))
    return BandResult(bool(vmin >= lo - tol and vmax <= hi + tol), vmin, vmax, lo, hi, tol)


def verify_positive(traj: Trajectory, span=None) -> BandResult:
    """Strict positivity: the sampled minimum must exceed zero."""
    vals = traj(_span_points(traj, span))
    vmin, vmax = float(np.min(vals)), float(np.max(vals))
    return BandResult(bool(vmin > 0.0), vmin, vmax, 0.0, float("inf"), 0.0)


def verify_monotone(traj: Trajectory, tol: float = 1e-10, span=None) -> MonotoneResult:
    """Every stored knot derivative (inside ``span``) is at least ``-tol``."""
    keep = np.ones(traj.t.size, dtype=bool)
    if span is not None:
        keep = (traj.t >= span[0]) & (traj.t <= span[1])
    du = traj.du[keep]
    if du.size == 0:
        raise ValueError(f"no knots inside {span}")
    m = float(np.min(du))
    return MonotoneResult(bool(m >= -tol), m, tol)


def _tail_stats(traj, lo, hi):
    pts = _span_points(traj, (lo, hi))
    vals = traj(pts)
    keep = (traj.t >= lo) & (traj.t <= hi)
    slope = float(np.max(np.abs(traj.du[keep]))) if keep.any() else 0.0
    return vals, slope


def estimate_left_limit(traj: Trajectory, tail_fraction: float = 0.2, span=None,
                        spread_rel: float = 1e-3, slope_tol: float = 1e-4) -> LimitEstimate:
    """Mean, spread and largest slope over the oldest ``tail_fraction`` of the domain."""
    if not 0 < tail_fraction < 1:
        raise ValueError("tail_fraction must lie in (0, 1)")
    a, b = (traj.a, traj.b) if span is None else span
    hi = a + tail_fraction * (b - a)
    vals, slope = _tail_stats(traj, a, hi)
    mean = float(np.mean(vals))
    spread = float(np.max(vals) - np.min(vals))
    ok = spread < spread_rel * (1.0 + abs(mean)) and slope < slope_tol
    return LimitEstimate(mean, spread, slope, "converged" if ok else "unresolved", (a, hi))


def count_crossings(values: np.ndarray, level: float, floor: float) -> int:
    """Strict sign changes of ``values - level``; samples within ``floor`` are skipped."""
    d = np.asarray(values, dtype=float) - level
    s = np.sign(d)
    s = s[np.abs(d) > floor]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def classify_right_end(traj: Trajectory, kappa: float, window_fraction: float = 0.25, span=None,
                       thresholds: VerifyThresholds = DEFAULT_THRESHOLDS) -> RightEnd:
    """Oscillation about ``kappa``, convergence to ``kappa``, or ``other`` on the newest part of the domain."""
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    a, b = (traj.a, traj.b) if span is None else span
    lo = b - window_fraction * (b - a)
    vals, slope = _tail_stats(traj, lo, b)
    crossings = count_crossings(vals, kappa, thresholds.noise_rel * kappa)
    mean = float(np.mean(vals))
    spread = float(np.max(vals) - np.min(vals))
    if crossings >= 2:
        kind = "oscillates-about-kappa"
    elif (spread < thresholds.spread_rel * (1.0 + abs(mean)) and slope < thresholds.slope_tol
          and abs(mean - kappa) < thresholds.limit_rel * kappa):
        kind = "limit-to-kappa"
    else:
        kind = "other"
    return RightEnd(kind, crossings, mean, spread, slope, (lo, b))


def equilibrium_residual(eq: Equation, level: float, t_samples) -> float:
    """Largest ``|RHS|`` on the constant trajectory ``u = level``."""
    flat = Trajectory.constant(level, 0.0)
    return float(max(abs(eval_rhs(eq, flat, float(t))) for t in np.atleast_1d(t_samples)))


def rigidity_check_r27(eq: Equation, traj: Trajectory, t0: float, T: float,
                       grid_step: float = 1e-2, trigger: float = 1e-6) -> dict:
    """Necessary conditions for ``u = kappa`` on the whole left half-line.

    Only evaluated when the trajectory sits within ``trigger`` of ``kappa`` on
    ``[t0 - T, t0]``; a violated condition then points to a numerical artifact.
    """
    vals = traj(_span_points(traj, (t0 - T, t0)))
    dev = float(np.max(np.abs(vals - eq.kappa)))
    if dev >= trigger:
        return {"triggered": False, "deviation": dev, "status": "not-triggered", "conditions": []}
    conds = _rigidity_conditions(eq, t0, T, grid_step)
    status = "consistent" if all(c.ok for c in conds) else "violated"
    return {"triggered": True, "deviation": dev, "status": status,
            "conditions": [c.to_dict() for c in conds]}


@dataclass
class PropertyReport:
    bounds: BandResult
    positivity_left: BandResult
    positivity_right: BandResult | None
    monotone: MonotoneResult
    left_limit: LimitEstimate
    right_end: RightEnd | None
    equilibrium_residuals: list = field(default_factory=list)

    def flags(self) -> dict:
        out = {
            "bounds": self.bounds.passed,
            "positivity_left": self.positivity_left.passed,
            "monotone": self.monotone.passed,
            "left_limit_converged": self.left_limit.status == "converged",
        }
        if self.positivity_right is not None:
            out["positivity_right"] = self.positivity_right.passed
        if self.right_end is not None:
            out["right_end_not_other"] = self.right_end.kind != "other"
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = self.flags()
        return d


def property_report(traj: Trajectory, eq: Equation, window: float = 40.0,
                    thresholds: VerifyThresholds = DEFAULT_THRESHOLDS) -> PropertyReport:
    """Run every verifier on ``traj`` for the left window ``[t0 - window, t0]`` and the part past ``t0``."""
    t0, kappa = eq.t0, eq.kappa
    left = (max(traj.a, t0 - window), t0)
    bounds = verify_band(traj, 0.0, kappa, thresholds.band_tol, left)
    pos_left = verify_positive(traj, left)
    mono = verify_monotone(traj, thresholds.monotone_tol, left)
    limit = estimate_left_limit(traj, thresholds.tail_fraction, (traj.a, t0),
                                thresholds.spread_rel, thresholds.slope_tol)
    pos_right = right = None
    if traj.b > t0:
        right_span = (t0, traj.b)
        pos_right = verify_positive(traj, right_span)
        right = classify_right_end(traj, kappa, thresholds.window_fraction, right_span, thresholds)
    samples = np.linspace(t0 - window, t0, 9)
    residuals = [{"level": lv, "residual": equilibrium_residual(eq, lv, samples)} for lv in (0.0, kappa)]
    return PropertyReport(bounds, pos_left, pos_right, mono, limit, right, residuals)
