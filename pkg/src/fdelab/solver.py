"""Method-of-steps integration, terminal-value shooting and the truncation limit.

Solutions on ``(-inf, t0]`` are built as limits of solutions on ``[a_n, t0]``
of the clamped equation (the nonlinearity sees its arguments projected onto
``[0, kappa]``), each pinned at ``u(t0) = c`` by shooting on the constant
history value ``u(a_n)``.
"""
from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .core import Equation, Trajectory

log = logging.getLogger(__name__)

SCAN_POINTS = 33
DENSE_SCAN_POINTS = 257


class BlowUpError(RuntimeError):
    """The right-hand side became non-finite during integration.

    ``partial`` ends at the last knot where the solution was still finite.
    """

    def __init__(self, t: float, partial: Trajectory | None = None):
        super().__init__(f"non-finite right-hand side at t={t!r}")
        self.t = t
        self.partial = partial


class ShootingError(RuntimeError):
    def __init__(self, message: str, trace: dict | None = None):
        super().__init__(message)
        self.trace = trace or {}


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, result: "SolveResult"):
        super().__init__(message)
        self.result = result


# --------------------------------------------------------------------------
# forward integration
# --------------------------------------------------------------------------

class _Run:
    """Uniform-grid storage for one (possibly batched) integration."""

    def __init__(self, t_a, t_b, h, v, prior):
        n = max(1, int(math.ceil((t_b - t_a) / h - 1e-9)))
        self.t_a, self.h, self.n = t_a, h, n
        T = t_a + h * np.arange(n + 1, dtype=float)
        T[-1] = t_b
        self.T = T
        self.Tl = T.tolist()
        self.scalar = v.size == 1
        if self.scalar:
            # plain floats are several times faster than length-1 arrays
            v = float(v[0])
            self.U = [0.0] * (n + 1)
            self.D = [0.0] * (n + 1)
        else:
            self.U = np.empty((n + 1, v.size))
            self.D = np.empty((n + 1, v.size))
        self.U[0] = v
        self.v = v
        self.prior = prior

    def column(self, arr, col: int, last: int) -> np.ndarray:
        if self.scalar:
            return np.array(arr[: last + 1], dtype=float)
        return arr[: last + 1, col]

    def terminal(self):
        return np.array([self.U[-1]]) if self.scalar else self.U[-1].copy()

    def value(self, s, i, ts, ys):
        """History value at ``s`` while stepping from knot ``i`` with stage state ``(ts, ys)``."""
        Tl = self.Tl
        if s >= ts:
            return ys
        ti = Tl[i]
        if s > ti:
            # inside the step being taken: chord to the current stage
            lam = (s - ti) / (ts - ti)
            return self.U[i] + lam * (ys - self.U[i])
        if s < self.t_a:
            if self.prior is None:
                return self.v
            return self.prior(s)
        j = int((s - self.t_a) / self.h)
        if j >= i:
            j = i - 1
        if j < 0:
            j = 0
        while j > 0 and Tl[j] > s:
            j -= 1
        if s == Tl[j]:
            return self.U[j]
        t0, t1 = Tl[j], Tl[j + 1]
        dt = t1 - t0
        th = (s - t0) / dt
        one = 1.0 - th
        h10 = th * one * one * dt
        h01 = th * th * (3.0 - 2.0 * th)
        h11 = th * th * (th - 1.0) * dt
        U, D = self.U, self.D
        return U[j] + h01 * (U[j + 1] - U[j]) + h10 * D[j] + h11 * D[j + 1]


def _integrate(eq: Equation, v, t_a: float, t_b: float, h: float, clamped: bool,
               prior: Trajectory | None = None) -> _Run:
    if not h > 0:
        raise ValueError("step h must be positive")
    if not t_b > t_a:
        raise ValueError("integration span must have positive length")
    v = np.atleast_1d(np.asarray(v, dtype=float))
    run = _Run(t_a, t_b, h, v, prior)
    # overflow is detected below and reported as BlowUpError
    with np.errstate(over="ignore", invalid="ignore"):
        _step_all(eq, run, clamped)
    return run


def _step_all(eq: Equation, run: _Run, clamped: bool):
    T, U, D = run.Tl, run.U, run.D
    rhs = eq.rhs
    value = run.value

    def f(i, ts, ys):
        return rhs(ts, ys, lambda s: value(s, i, ts, ys), clamped)

    finite = math.isfinite if run.scalar else (lambda a: bool(np.all(np.isfinite(a))))
    D[0] = f(0, T[0], U[0])
    if not finite(D[0]):
        raise BlowUpError(T[0])
    for i in range(run.n):
        t = T[i]
        dt = T[i + 1] - t
        y = U[i]
        k1 = D[i]
        k2 = f(i, t + 0.5 * dt, y + (0.5 * dt) * k1)
        k3 = f(i, t + 0.5 * dt, y + (0.5 * dt) * k2)
        k4 = f(i, t + dt, y + dt * k3)
        U[i + 1] = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        D[i + 1] = f(i + 1, T[i + 1], U[i + 1])
        if not (finite(U[i + 1]) and finite(D[i + 1])):
            raise BlowUpError(T[i + 1], _assemble(run, 0, i) if i > 0 else None)


def _assemble(run: _Run, col: int = 0, last: int | None = None) -> Trajectory:
    last = run.n if last is None else last
    T = run.T[: last + 1]
    U = run.column(run.U, col, last)
    D = run.column(run.D, col, last)
    prior = run.prior
    if prior is not None:
        keep = prior.t < T[0]
        if keep.any():
            # the junction knot keeps the history's slope: where the slope jumps
            # (the constant onset prior) a right-hand slope would make the long
            # history cell dip below the history value
            D = D.copy()
            D[0] = float(prior.derivative(T[0]))
            T = np.concatenate([prior.t[keep], T])
            U = np.concatenate([prior.u[keep], U])
            D = np.concatenate([prior.du[keep], D])
    return Trajectory(T, U, D)


def integrate_forward(eq: Equation, initial, span: tuple[float, float], h: float = 1e-3,
                      clamped: bool = False) -> Trajectory:
    """Classical RK4 with Hermite dense output for the retarded equation ``eq``.

    ``initial`` is either a number (the constant history on ``(-inf, t_a]``)
    or a :class:`Trajectory` covering ``t_a``; in the latter case the result
    keeps its knots left of ``t_a``. The last step is shortened to land on
    ``t_b`` exactly.
    """
    t_a, t_b = map(float, span)
    if isinstance(initial, Trajectory):
        if not initial.a <= t_a <= initial.b:
            raise ValueError("initial trajectory must cover the start of the span")
        run = _integrate(eq, initial(t_a), t_a, t_b, h, clamped, prior=initial)
    else:
        run = _integrate(eq, float(initial), t_a, t_b, h, clamped)
    return _assemble(run)


def terminal_values(eq: Equation, v, a: float, t_end: float, h: float, clamped: bool = True) -> np.ndarray:
    """``u(t_end)`` for every constant history value in ``v`` (one batched run)."""
    run = _integrate(eq, v, a, t_end, h, clamped)
    return run.terminal()


# --------------------------------------------------------------------------
# shooting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ShotStart:
    """How a shot trajectory is seeded.

    ``mode == "value"``: constant history ``v`` from ``a``. ``mode == "onset"``:
    the trajectory sits at the tiny seed ``v`` on ``[a, start]`` and is
    integrated from ``start``; used when the required history value is below
    floating-point range.
    """

    mode: str
    a: float
    start: float
    v: float

    def prior(self) -> Trajectory | None:
        if self.mode == "onset" and self.start > self.a:
            return Trajectory.constant(self.v, self.a, self.start)
        return None

    def integrate(self, eq: Equation, t_end: float, h: float, clamped: bool) -> Trajectory:
        prior = self.prior()
        if prior is not None:
            return integrate_forward(eq, prior, (self.start, t_end), h, clamped)
        return integrate_forward(eq, self.v, (self.start, t_end), h, clamped)


@dataclass(frozen=True)
class SolveConfig:
    h: float = 1e-3
    a_sequence: tuple[float, ...] | None = None
    compact_window: float = 10.0
    cauchy_tol: float = 1e-6
    shoot_tol: float = 1e-10
    shoot_max_iter: int = 200
    forward_horizon: float | None = None

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not (self.cauchy_tol > 0 and self.shoot_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.a_sequence is not None:
            seq = tuple(float(a) for a in self.a_sequence)
            if any(b >= a for a, b in zip(seq, seq[1:])):
                raise ValueError("a_sequence must be strictly decreasing")
            object.__setattr__(self, "a_sequence", seq)

    def truncations(self, t0: float) -> tuple[float, ...]:
        if self.a_sequence is None:
            return tuple(t0 - 10.0 * 2.0 ** (n - 1) for n in range(1, 7))
        if any(a >= t0 for a in self.a_sequence):
            raise ValueError("every truncation point must lie left of t0")
        return self.a_sequence


def _sign_changes(vs, F):
    brackets = []
    for k in range(len(vs) - 1):
        if F[k] == 0.0:
            continue
        if F[k] * F[k + 1] < 0.0:
            brackets.append((float(vs[k]), float(vs[k + 1])))
    return brackets


def _refine(fun, lo, hi, flo, fhi, tol, max_iter, log_space):
    """Brent root of ``fun`` between ``lo`` and ``hi`` (optionally in ``log v``)."""
    evals = []

    def g(x):
        val = fun(math.exp(x) if log_space else x)
        evals.append((x, val))
        return val

    xa, xb = (math.log(lo), math.log(hi)) if log_space else (lo, hi)
    root = brentq(g, xa, xb, xtol=1e-300 if not log_space else 1e-15, rtol=4 * sys.float_info.epsilon,
                  maxiter=max_iter)
    best = min(evals, key=lambda e: abs(e[1])) if evals else (root, fun(root))
    x = best[0]
    return (math.exp(x) if log_space else x), best[1], len(evals)


def shoot_terminal(eq: Equation, a: float, t0: float | None = None, c: float | None = None,
                   cfg: SolveConfig | None = None) -> tuple[Trajectory, dict]:
    """Solve the clamped equation on ``[a, t0]`` with ``u(t0) = c``.

    The unknown is the constant history value ``v = u(a)`` in ``[0, kappa]``.
    A 33-point scan brackets the root (smallest ``v`` wins when several
    brackets exist); a bracket touching ``v = 0`` is narrowed by one batched
    run over ``v * 2**-k``; Brent's method finishes in ``log v``. If even the
    smallest positive history overshoots ``c`` the shot switches to an onset
    time: the trajectory stays at the smallest normal float until ``start``
    and ``start`` is found by Brent's method.

    Returns the trajectory and a trace dictionary.
    """
    cfg = cfg or SolveConfig()
    t0 = eq.t0 if t0 is None else float(t0)
    c = eq.c if c is None else float(c)
    kappa = eq.kappa
    if not 0.0 <= c <= kappa:
        raise ShootingError(f"anchor value c={c!r} outside [0, kappa]")
    if not a < t0:
        raise ValueError("truncation point must lie left of t0")
    h, tol = cfg.h, cfg.shoot_tol
    trace: dict = {"a": a, "scan": None, "brackets": [], "mode": "value", "evaluations": 0}

    def shoot_batch(vs):
        trace["evaluations"] += 1
        return terminal_values(eq, vs, a, t0, h) - c

    def finish(start: ShotStart, residual):
        traj = start.integrate(eq, t0, h, clamped=True)
        trace.update(mode=start.mode, start=start.start, v=start.v, residual=float(traj(t0) - c))
        if abs(traj(t0) - c) > tol:
            raise ShootingError(f"terminal mismatch {traj(t0) - c:.3e} exceeds shoot_tol", trace)
        return traj, trace

    vs = np.linspace(0.0, kappa, SCAN_POINTS)
    F = shoot_batch(vs)
    trace["scan"] = {"v": vs.tolist(), "residual": F.tolist()}
    hits = np.flatnonzero(np.abs(F) <= tol)
    if hits.size:
        v = float(vs[hits[0]])
        return finish(ShotStart("value", a, a, v), F[hits[0]])

    brackets = _sign_changes(vs, F)
    if not brackets:
        vs = np.linspace(0.0, kappa, DENSE_SCAN_POINTS)
        F = shoot_batch(vs)
        hits = np.flatnonzero(np.abs(F) <= tol)
        if hits.size:
            return finish(ShotStart("value", a, a, float(vs[hits[0]])), F[hits[0]])
        brackets = _sign_changes(vs, F)
        if not brackets:
            trace["terminal_range"] = [float(F.min() + c), float(F.max() + c)]
            raise ShootingError(
                f"no bracket for c={c!r} in [0, kappa]; terminal values span "
                f"[{F.min() + c:.6g}, {F.max() + c:.6g}]", trace)
    trace["brackets"] = brackets
    lo, hi = brackets[0]
    if lo == 0.0:
        ks = np.arange(1, 1075)
        probes = hi * np.exp2(-ks.astype(float))
        probes = probes[probes > 0.0]
        Fp = shoot_batch(probes)
        below = np.flatnonzero(Fp < 0.0)
        exact = np.flatnonzero(np.abs(Fp) <= tol)
        if exact.size:
            return finish(ShotStart("value", a, a, float(probes[exact[0]])), Fp[exact[0]])
        if below.size == 0:
            return _onset_shot(eq, a, t0, c, cfg, trace, finish)
        k = below[0]
        lo = float(probes[k])
        hi = float(probes[k - 1]) if k > 0 else hi
        trace["geometric_bracket"] = [lo, hi]
        log_space = True
    else:
        log_space = hi / lo > 4.0

    def fun(v):
        trace["evaluations"] += 1
        return float(terminal_values(eq, [v], a, t0, h)[0] - c)

    flo, fhi = fun(lo), fun(hi)
    v, res, n_eval = _refine(fun, lo, hi, flo, fhi, tol, cfg.shoot_max_iter, log_space)
    trace["refine_evaluations"] = n_eval
    if abs(res) > tol:
        raise ShootingError(f"shooting did not reach shoot_tol (residual {res:.3e})", trace)
    return finish(ShotStart("value", a, a, v), res)


def _onset_shot(eq, a, t0, c, cfg, trace, finish):
    seed = sys.float_info.min
    h, tol = cfg.h, cfg.shoot_tol

    def fun(start):
        trace["evaluations"] += 1
        st = ShotStart("onset", a, start, seed)
        prior = st.prior()
        if prior is None:
            return float(terminal_values(eq, [seed], a, t0, h)[0] - c)
        run = _integrate(eq, seed, start, t0, h, True, prior=prior)
        return float(run.terminal()[0] - c)

    hi = t0 - min(cfg.h, 0.5 * (t0 - a))
    f_lo, f_hi = fun(a), fun(hi)
    if not (f_lo > 0.0 > f_hi):
        raise ShootingError("onset bracket failed", trace)
    evals = []

    def g(s):
        val = fun(s)
        evals.append((s, val))
        return val

    brentq(g, a, hi, xtol=1e-14, rtol=4 * sys.float_info.epsilon, maxiter=cfg.shoot_max_iter)
    start, res = min(evals, key=lambda e: abs(e[1]))
    trace["refine_evaluations"] = len(evals)
    if abs(res) > tol:
        raise ShootingError(f"onset shooting did not reach shoot_tol (residual {res:.3e})", trace)
    return finish(ShotStart("onset", a, start, seed), res)


def start_of(trace: dict) -> ShotStart:
    return ShotStart(trace["mode"], trace["a"], trace["start"], trace["v"])


# --------------------------------------------------------------------------
# truncation limit and forward extension
# --------------------------------------------------------------------------

@dataclass
class SolveResult:
    trajectory: Trajectory
    n_used: int
    cauchy_trace: list[float]
    shoot_trace: list[dict]
    clamp_active: bool
    converged: bool
    truncations: tuple[float, ...] = field(default_factory=tuple)

    @property
    def start(self) -> ShotStart:
        return start_of(self.shoot_trace[-1])


def _sup_diff(u: Trajectory, w: Trajectory, lo: float, hi: float, h: float) -> float:
    n = max(2, int(math.ceil((hi - lo) / (0.5 * h))) + 1)
    grid = np.linspace(lo, hi, n)
    return float(np.max(np.abs(u(grid) - w(grid))))


def clamp_fired(traj: Trajectory, kappa: float, span: tuple[float, float] | None = None) -> bool:
    pts = traj.sample_points(span)
    vals = traj(pts)
    return bool(np.any(vals < 0.0) or np.any(vals > kappa))


def limit_scheme(eq: Equation, cfg: SolveConfig | None = None) -> SolveResult:
    """Shoot on ``[a_n, t0]`` for decreasing ``a_n`` until the compact window stops moving.

    ``d_n`` is the sup distance between consecutive constant-extended shots on
    ``[t0 - compact_window, t0]``. Stops once ``d_n <= cauchy_tol`` (checked
    from ``n = 2``); raises :class:`ConvergenceError` carrying the partial
    result when the truncation points run out first.
    """
    cfg = cfg or SolveConfig()
    t0 = eq.t0
    seq = cfg.truncations(t0)
    lo = t0 - cfg.compact_window
    prev = None
    cauchy: list[float] = []
    shots: list[dict] = []
    traj = None
    for n, a in enumerate(seq, start=1):
        traj, trace = shoot_terminal(eq, a, t0, eq.c, cfg)
        shots.append(trace)
        log.debug("shot n=%d a=%g mode=%s evals=%d", n, a, trace["mode"], trace["evaluations"])
        if prev is not None:
            d = _sup_diff(traj, prev, lo, t0, cfg.h)
            cauchy.append(d)
            if d <= cfg.cauchy_tol:
                return SolveResult(traj, n, cauchy, shots,
                                   clamp_fired(traj, eq.kappa, (traj.a, t0)), True, seq[:n])
        prev = traj
    result = SolveResult(traj, len(seq), cauchy, shots,
                         clamp_fired(traj, eq.kappa, (traj.a, t0)), False, seq)
    raise ConvergenceError(f"no convergence within {len(seq)} truncations; d_n = {cauchy}", result)


def extend_forward(result: SolveResult | Trajectory, eq: Equation, b: float, h: float | None = None) -> Trajectory:
    """Continue the constructed solution past ``t0`` with the unclamped equation."""
    traj = result.trajectory if isinstance(result, SolveResult) else result
    if h is None:
        h = float(np.min(np.diff(traj.t[-3:]))) if len(traj) > 2 else 1e-3
    t0 = traj.b
    if not b > t0:
        raise ValueError("forward horizon must exceed the end of the trajectory")
    return integrate_forward(eq, traj, (t0, b), h, clamped=False)


def reintegrate(eq: Equation, start: ShotStart, t_end: float, h: float, clamped: bool) -> Trajectory:
    """Repeat a shot from its recorded start, e.g. without the clamp."""
    return start.integrate(eq, t_end, h, clamped)
