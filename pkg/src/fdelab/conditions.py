"""Sufficient conditions for existence and limit theorems, evaluated on a window.

Every "for almost every t <= t0" condition is sampled on a uniform grid over
``[t0 - T, t0]``. Conditions that involve a limit at minus or plus infinity
cannot be settled by sampling, so the best they can report is
``pass-on-window``. The window is recorded with every result.

Theorem identifiers follow the numbering used by the scenario files:
``T2.5, T2.6, T2.5r, T2.6r, T2.13, T2.14, C2.3, C2.4, C2.5, T6.1, T6.2, R2.7``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import (CoeffFunction, Equation, LogisticIntegral, ModelError,
                   PointwiseH, as_coeff, check_retarded, point_delay_form)
from .quadrature import adaptive_simpson

PASS = "pass"
PASS_ON_WINDOW = "pass-on-window"
FAIL = "fail"
INDETERMINATE = "indeterminate"

INEQ_TOL = 1e-12
QUAD_TOL = 1e-10
INV_E = math.exp(-1.0)

THEOREMS = ("T2.5", "T2.6", "T2.5r", "T2.6r", "T2.13", "T2.14",
            "C2.3", "C2.4", "C2.5", "T6.1", "T6.2", "R2.7")
EXISTENCE = ("T2.5", "T2.6", "T2.5r", "T2.6r", "T6.1", "T6.2")


class OmegaBracketError(ValueError):
    """The integral equation for omega has no root inside the searched range."""

    def __init__(self, message: str, needed_extension: float):
        super().__init__(message)
        self.needed_extension = needed_extension


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float
    lower_closed: bool
    upper_closed: bool

    @property
    def empty(self) -> bool:
        if self.lower < self.upper:
            return False
        return not (self.lower == self.upper and self.lower_closed and self.upper_closed)

    def contains(self, x: float) -> bool:
        lo_ok = x >= self.lower if self.lower_closed else x > self.lower
        hi_ok = x <= self.upper if self.upper_closed else x < self.upper
        return lo_ok and hi_ok

    def __str__(self) -> str:
        return (("[" if self.lower_closed else "(") + f"{self.lower:.12g}, {self.upper:.12g}"
                + ("]" if self.upper_closed else ")"))

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper,
                "lower_closed": self.lower_closed, "upper_closed": self.upper_closed}


@dataclass
class ConditionResult:
    id: str
    status: str
    value: float | None = None
    threshold: float | None = None
    window: tuple[float, float] | None = None
    note: str = ""
    trace: list | None = None

    @property
    def ok(self) -> bool:
        return self.status in (PASS, PASS_ON_WINDOW)

    def to_dict(self) -> dict:
        out = {"id": self.id, "status": self.status, "value": self.value,
               "threshold": self.threshold,
               "window": list(self.window) if self.window is not None else None}
        if self.note:
            out["note"] = self.note
        if self.trace is not None:
            out["trace"] = self.trace
        return out


def combine_status(statuses: Sequence[str]) -> str:
    """Fail beats indeterminate beats pass-on-window beats pass."""
    statuses = list(statuses)
    for s in (FAIL, INDETERMINATE, PASS_ON_WINDOW):
        if s in statuses:
            return s
    return PASS


@dataclass
class TheoremVerdict:
    theorem: str
    conditions: list[ConditionResult]
    derived: dict = field(default_factory=dict)
    c_interval: Interval | None = None
    c: float | None = None
    c_in_interval: bool | None = None
    caveat: str = ""

    @property
    def status(self) -> str:
        return combine_status([c.status for c in self.conditions])

    @property
    def passed(self) -> bool:
        return self.status in (PASS, PASS_ON_WINDOW) and self.c_in_interval is not False

    def condition(self, cid: str) -> ConditionResult:
        for c in self.conditions:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "status": self.status,
            "passed": self.passed,
            "conditions": [c.to_dict() for c in self.conditions],
            "derived": dict(self.derived),
            "c_interval": self.c_interval.to_dict() if self.c_interval is not None else None,
            "c": self.c,
            "c_in_interval": self.c_in_interval,
            "note": self.note,
            "caveat": self.caveat,
        }

    @property
    def note(self) -> str:
        if self.c_in_interval is False:
            return f"c = {self.c!r} lies outside the admissible interval {self.c_interval}"
        return ""


# --------------------------------------------------------------------------
# integrals on the window
# --------------------------------------------------------------------------

def window_grid(t0: float, T: float, grid_step: float) -> np.ndarray:
    if not (T > 0 and grid_step > 0):
        raise ValueError("window length and grid step must be positive")
    n = max(1, int(round(T / grid_step)))
    return np.linspace(t0 - T, t0, n + 1)


def integral(p: CoeffFunction, lo: float, hi: float, tol: float = QUAD_TOL) -> float:
    """``int_lo^hi p``; constants are integrated exactly."""
    if lo == hi:
        return 0.0
    if p.kind == "constant":
        return p.payload["value"] * (hi - lo)
    return adaptive_simpson(lambda s: float(p(s)), lo, hi, tol)


def _window_integrals(p, lower_map, ts) -> np.ndarray:
    p, lower_map = as_coeff(p), as_coeff(lower_map)
    return np.array([integral(p, check_retarded(lower_map, t), t) for t in ts])


def sup_window_integral(p, lower_map, t0: float, T: float, grid_step: float = 1e-2) -> float:
    """Maximum over the window grid of ``int_{lower_map(t)}^t p``."""
    return float(np.max(_window_integrals(p, lower_map, window_grid(t0, T, grid_step))))


def check_one_over_e(p1, mu1, t0: float, T: float, grid_step: float = 1e-2,
                     cid: str = "one-over-e", t_end: float | None = None) -> ConditionResult:
    """Memory of ``p1`` through ``mu1`` stays at or below ``1/e``.

    ``t_end`` past ``t0`` extends the sampled range forward (the whole-line
    variant).
    """
    if t_end is not None and t_end > t0:
        value = max(sup_window_integral(p1, mu1, t0, T, grid_step),
                    sup_window_integral(p1, mu1, t_end, t_end - t0, grid_step))
        window = (t0 - T, t_end)
    else:
        value = sup_window_integral(p1, mu1, t0, T, grid_step)
        window = (t0 - T, t0)
    status = PASS if value <= INV_E + INEQ_TOL else FAIL
    return ConditionResult(cid, status, value, INV_E, window)


def lambda_fixed_point(p_star: float) -> float:
    """Smallest ``lam`` in ``[1, e]`` with ``lam = exp(lam * p_star)``.

    ``g(lam) = lam - exp(lam p*)`` is concave, negative at 1 for ``p* > 0``
    and non-negative at ``e`` for ``p* <= 1/e``, so bisection on ``[1, e]``
    returns the smaller root. At ``p* = 1/e`` the root ``e`` is double and
    ``g(e)`` may round to a tiny negative number; ``e`` is returned then.
    """
    p_star = float(p_star)
    if not 0.0 <= p_star <= INV_E + INEQ_TOL:
        raise ValueError("p_star must lie in [0, 1/e]")
    if p_star == 0.0:
        return 1.0
    if p_star >= INV_E:
        # double root: bisection cannot resolve it better than sqrt(eps)
        return math.e

    def g(lam):
        return lam - math.exp(lam * p_star)

    lo, hi = 1.0, math.e
    if g(hi) < 0.0:
        if g(hi) > -1e-12:
            return math.e
        raise ValueError("no fixed point in [1, e]")  # unreachable for p* <= 1/e
    while hi - lo > 4 * np.finfo(float).eps * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def gamma_test(p1, t0: float, rate: float, T: float = 40.0, grid_step: float = 1e-2) -> CoeffFunction:
    """``t -> exp(rate * int_t^t0 p1)`` tabulated on ``[t0 - T, t0]``."""
    if not 1.0 - INEQ_TOL <= rate <= math.e + INEQ_TOL:
        raise ValueError("rate must lie in [1, e]")
    p1 = as_coeff(p1)
    ts = window_grid(t0, T, grid_step)
    cells = np.array([integral(p1, ts[k], ts[k + 1]) for k in range(ts.size - 1)])
    tail = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
    return CoeffFunction.table(ts, np.exp(rate * tail))


def check_comparison_217(p0, p1, mu1, t0: float, T: float, rate: float = math.e,
                         grid_step: float = 1e-2, cid: str = "comparison",
                         t_end: float | None = None) -> ConditionResult:
    """``p0(t) >= p1(t) * exp(rate * int_{mu1(t)}^t p1)`` on the grid."""
    p0, p1, mu1 = as_coeff(p0), as_coeff(p1), as_coeff(mu1)
    ts = window_grid(t0, T, grid_step)
    if t_end is not None and t_end > t0:
        ts = np.concatenate([ts, window_grid(t_end, t_end - t0, grid_step)[1:]])
    worst = math.inf
    for t in ts:
        q1 = p1(t)
        lhs = p0(t) - (q1 * math.exp(rate * integral(p1, check_retarded(mu1, t), t)) if q1 else 0.0)
        worst = min(worst, lhs)
    status = PASS if worst >= -INEQ_TOL else FAIL
    return ConditionResult(cid, status, float(worst), 0.0, (float(ts[0]), float(ts[-1])),
                           note=f"rate={rate:.12g}")


def weighted_p1(p1, mu1, rate: float) -> Callable[[float], float]:
    """``s -> p1(s) * exp(rate * int_{mu1(s)}^s p1)``."""
    p1, mu1 = as_coeff(p1), as_coeff(mu1)

    def w(s):
        q = p1(s)
        if q == 0:
            return 0.0
        return q * math.exp(rate * integral(p1, check_retarded(mu1, s), s))

    return w


def compute_M_mu(p1, mu0, mu1, t0: float, T: float, rate: float = math.e,
                 grid_step: float = 1e-2) -> float:
    """Supremum over the window of ``int_{mu0(t)}^t p1(s) exp(rate int_{mu1(s)}^s p1) ds``."""
    p1, mu0, mu1 = as_coeff(p1), as_coeff(mu0), as_coeff(mu1)
    if p1.kind == "constant" and p1.payload["value"] == 0.0:
        return 0.0
    w = weighted_p1(p1, mu1, rate)
    best = 0.0
    for t in window_grid(t0, T, grid_step):
        lo = check_retarded(mu0, t)
        if lo < t:
            best = max(best, adaptive_simpson(w, lo, t, QUAD_TOL))
    return float(best)


def compute_M_sigma(p1, mu1, sigma, t0: float, T: float, rate: float = math.e,
                    grid_step: float = 1e-2) -> float:
    """Supremum of ``int_{sigma(t)}^t p1(s) gamma(mu1(s)) / gamma(s) ds`` for the exponential gamma.

    With ``gamma(t) = exp(rate int_t^t0 p1)`` the ratio equals
    ``exp(rate int_{mu1(s)}^s p1)``, so this is :func:`compute_M_mu` with
    ``sigma`` in place of ``mu0``.
    """
    return compute_M_mu(p1, sigma, mu1, t0, T, rate, grid_step)


def admissible_c_interval(theorem: str, kappa: float, M: float = 0.0) -> Interval:
    """Anchor values covered by an existence theorem."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if M < 0:
        raise ValueError("M must be non-negative")
    top = kappa * math.exp(-M)
    table = {
        "T2.5": Interval(0.0, top, True, False),
        "T2.6": Interval(0.0, kappa, True, True),
        "T2.5r": Interval(0.0, top, False, False),
        "T2.6r": Interval(0.0, kappa, True, True),
        "T6.1": Interval(0.0, top, False, True),
        "T6.2": Interval(0.0, kappa, False, False),
    }
    if theorem in table:
        return table[theorem]
    if theorem in THEOREMS:
        raise ValueError(f"{theorem} is a property theorem without an anchor interval")
    raise ValueError(f"unknown theorem id {theorem!r}")


def check_monotone_conditions(p0, p1, mu0, mu1, t0: float, T: float, grid_step: float = 1e-2,
                              t_end: float | None = None, suffix: str = "") -> list[ConditionResult]:
    """``p0 >= p1`` and ``p1 * (mu0 - mu1) >= 0`` on the grid."""
    p0, p1, mu0, mu1 = map(as_coeff, (p0, p1, mu0, mu1))
    ts = window_grid(t0, T, grid_step)
    if t_end is not None and t_end > t0:
        ts = np.concatenate([ts, window_grid(t_end, t_end - t0, grid_step)[1:]])
    dom = min(p0(t) - p1(t) for t in ts)
    dev = min(p1(t) * (check_retarded(mu0, t) - check_retarded(mu1, t)) for t in ts)
    window = (float(ts[0]), float(ts[-1]))
    return [
        ConditionResult("p0-dominates-p1" + suffix, PASS if dom >= -INEQ_TOL else FAIL, float(dom), 0.0, window),
        ConditionResult("delay-order" + suffix, PASS if dev >= -INEQ_TOL else FAIL, float(dev), 0.0, window),
    ]


def check_growth_35(q: Callable, t0: float, b: float, x_sequence: Sequence[float] | None = None,
                    cid: str = "sublinear-growth") -> ConditionResult:
    """Heuristic certificate that ``(1/x) int_t0^b q(s, x) ds -> 0``.

    Passes (on window) when the ratios are nonincreasing over the second half
    of the sequence and the last is below ``1e-3`` times the first.
    """
    if not b > t0:
        raise ValueError("b must exceed t0")
    xs = [10.0 ** k for k in range(7)] if x_sequence is None else [float(x) for x in x_sequence]
    if any(y <= x for x, y in zip(xs, xs[1:])):
        raise ValueError("x_sequence must be increasing")
    r = [adaptive_simpson(lambda s, x=x: float(q(s, x)), t0, b, QUAD_TOL) / x for x in xs]
    tail = r[len(r) // 2:]
    eventually_down = all(y <= x * (1 + 1e-12) + 1e-300 for x, y in zip(tail, tail[1:]))
    if r[0] <= 0.0:
        ok = all(v <= 0.0 for v in r)
    else:
        ok = eventually_down and r[-1] < 1e-3 * r[0]
    return ConditionResult(cid, PASS_ON_WINDOW if ok else FAIL, float(r[-1]),
                           1e-3 * r[0], (t0, b), trace=[float(v) for v in r])


# --------------------------------------------------------------------------
# phi, omega and limits
# --------------------------------------------------------------------------

def build_phi(t0: float) -> CoeffFunction:
    """``1 / (t0 + 1 - t)**2``; its integral over ``(-inf, t0]`` is 1."""
    return CoeffFunction.builtin("phi", t0=float(t0))


def _phi_tail(w, t0, scale):
    # int_w^t0 scale / (t0 + 1 - s)^2 ds
    return scale * (1.0 - 1.0 / (t0 + 1.0 - w))


def build_omega(g, t0: float, T: float, level: float, grid_step: float = 1e-2,
                phi_scale: float = 1.0, max_extension: float | None = None) -> CoeffFunction:
    """Tabulate ``omega`` with ``int_omega^t0 (g + phi) = level + int_t^t0 (g + phi)``.

    ``phi`` is ``phi_scale / (t0 + 1 - t)**2``. The antiderivative is
    tabulated cell by cell left of ``t0`` (cells double in length beyond the
    window) and each root is polished with Brent's method inside its
    bracketing cell. Values right of ``t0`` equal ``omega(t0)``.

    Raises :class:`OmegaBracketError` when the accumulated integral does not
    reach the required level within ``max_extension`` (default ``1000 * T``)
    beyond the window.
    """
    if not level > 0:
        raise ValueError("level must be positive")
    g = as_coeff(g)
    max_extension = 1000.0 * T if max_extension is None else float(max_extension)
    ts = window_grid(t0, T, grid_step)[::-1]  # descending from t0
    edges = list(ts)
    G = [0.0]
    for k in range(ts.size - 1):
        G.append(G[-1] + integral(g, ts[k + 1], ts[k]))

    def A_idx(k):
        return G[k] + _phi_tail(edges[k], t0, phi_scale)

    target_max = level + A_idx(len(edges) - 1)
    width = grid_step
    while A_idx(len(edges) - 1) < target_max:
        reach = t0 - T - edges[-1]
        if reach >= max_extension:
            limit_phi = phi_scale - _phi_tail(edges[-1], t0, phi_scale)
            raise OmegaBracketError(
                f"window too short: omega(t0 - T) lies more than {max_extension:g} beyond the window "
                f"(accumulated {A_idx(len(edges) - 1):.6g} of {target_max:.6g}; remaining phi mass "
                f"{limit_phi:.3g})", math.inf)
        width *= 2.0
        lo = edges[-1] - width
        G.append(G[-1] + integral(g, lo, edges[-1]))
        edges.append(lo)
    A = np.array([A_idx(k) for k in range(len(edges))])
    E = np.array(edges)
    omega = np.empty(ts.size)
    for k, t in enumerate(ts):
        target = level + A[k]
        j = int(np.searchsorted(A, target, side="left"))
        if j < A.size and A[j] == target:
            omega[k] = E[j]
            continue
        hi_edge, lo_edge = E[j - 1], E[j]  # A[j-1] < target < A[j]
        base = A[j - 1] - _phi_tail(hi_edge, t0, phi_scale)

        def F(w, base=base, hi_edge=hi_edge, target=target):
            return base + integral(g, w, hi_edge) + _phi_tail(w, t0, phi_scale) - target

        omega[k] = brentq(F, lo_edge, hi_edge, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    order = np.argsort(ts)
    return CoeffFunction.table(ts[order], omega[order])


def build_sigma(p1, mu1, t0: float, T: float, c: float, kappa: float, M_mu: float,
                rate: float = math.e, grid_step: float = 1e-2) -> tuple[CoeffFunction, float]:
    """Memory map whose window integral of the weighted ``p1`` equals ``M_mu + eps``.

    ``eps`` takes half of the logarithmic slack in ``c <= kappa exp(-(M_mu + eps))``
    (at least ``1e-6``; ``1`` when ``c == 0``). Returns ``(sigma, eps)``.
    """
    if c > 0:
        slack = math.log(kappa / c) - M_mu
        if slack <= 0:
            raise ValueError("c leaves no room above M_mu")
        eps = max(1e-6, 0.5 * slack)
    else:
        eps = 1.0
    w = weighted_p1(p1, mu1, rate)
    P1 = CoeffFunction.wrap(w, "weighted-p1")
    sigma = build_omega(P1, t0, T, M_mu + eps, grid_step, phi_scale=eps)
    return sigma, eps


def check_limit_divergence(p, t0: float, T_sequence: Sequence[float] = (10, 20, 40, 80),
                           ratio: float = 4.0, floor: float = 1e-8,
                           contraction: float = 0.75, cid: str = "divergence") -> ConditionResult:
    """Classify ``int_t^t0 p`` as ``t -> -inf`` from its values on growing windows.

    ``diverges-on-window``: last/first ratio above ``ratio`` and every
    increment above ``floor``. ``bounded-on-window``: last increment below
    ``floor``, or increments contracting by at least ``contraction`` per
    step. Anything else is ``indeterminate``. The status field carries the
    label; ``value`` is the last integral.
    """
    p = as_coeff(p)
    Ts = [float(T) for T in T_sequence]
    if len(Ts) < 2 or any(b <= a for a, b in zip(Ts, Ts[1:])):
        raise ValueError("T_sequence must be increasing with at least two entries")
    I = []
    acc, prev = 0.0, 0.0
    for T in Ts:
        acc += integral(p, t0 - T, t0 - prev)
        prev = T
        I.append(acc)
    inc = [b - a for a, b in zip(I, I[1:])]
    if I[0] > 0 and I[-1] / I[0] > ratio and min(inc) > floor:
        label = "diverges-on-window"
    elif abs(inc[-1]) < floor:
        label = "bounded-on-window"
    elif len(inc) >= 2 and all(0 <= b <= contraction * a for a, b in zip(inc, inc[1:])):
        label = "bounded-on-window"
    else:
        label = INDETERMINATE
    return ConditionResult(cid, label, float(I[-1]), None, (t0 - Ts[-1], t0), trace=[float(v) for v in I])


def check_window_limsup(p, omega, t0: float, T: float, grid_step: float = 1e-2,
                        cid: str = "window-limsup") -> ConditionResult:
    """Largest ``int_{omega(t)}^t p`` over the oldest third of the window.

    Status ``positive`` above ``1e-9``, otherwise ``zero-on-window``; values
    below ``1e-3`` carry a near-zero note.
    """
    p, omega = as_coeff(p), as_coeff(omega)
    ts = window_grid(t0, T, grid_step)
    old = ts[ts <= t0 - 2.0 * T / 3.0 + 1e-12]
    vals = _window_integrals(p, omega, old)
    value = float(np.max(vals))
    status = "positive" if value > 1e-9 else "zero-on-window"
    note = "near zero" if 1e-9 < value < 1e-3 else ""
    return ConditionResult(cid, status, value, 1e-9, (float(old[0]), float(old[-1])), note=note)


# --------------------------------------------------------------------------
# conditions on h
# --------------------------------------------------------------------------

def _h_parts(eq: Equation) -> PointwiseH:
    if not isinstance(eq.f, PointwiseH):
        raise ModelError("this theorem needs a pointwise nonlinearity h(t, x, y)")
    return eq.f


def _sample_times(lo: float, hi: float, n: int = 41) -> np.ndarray:
    return np.linspace(lo, hi, n)


def _box(lo: float, hi: float, n: int = 17):
    v = np.linspace(lo, hi, n)
    return np.meshgrid(v, v, indexing="ij")


def _h_min(h, ts, X, Y):
    return min(float(np.min(np.asarray(h(t, X, Y), dtype=float) * np.ones_like(X))) for t in ts)


def check_h_nonneg(eq: Equation, lo: float, hi: float, cid: str, upper: float | None = None,
                   shift: Callable | None = None) -> ConditionResult:
    """``h >= 0`` for sampled ``t`` in ``[lo, hi]`` and ``x, y`` in ``[0, upper]``.

    ``shift(t, x, y)`` is added to ``h`` (used for the weakened forms that
    add ``p0 x`` or ``p0 y``).
    """
    f = _h_parts(eq)
    top = eq.kappa if upper is None else upper
    X, Y = _box(0.0, top)
    fn = f.h if shift is None else (lambda t, x, y: f.h(t, x, y) + shift(t, x, y))
    worst = _h_min(fn, _sample_times(lo, hi), X, Y)
    return ConditionResult(cid, PASS if worst >= -INEQ_TOL else FAIL, worst, 0.0, (lo, hi))


def check_h_origin(eq: Equation, t0: float, T: float) -> ConditionResult:
    f = _h_parts(eq)
    worst = max(abs(float(f.h(t, 0.0, 0.0))) for t in _sample_times(t0 - T, t0, 401))
    return ConditionResult("h-zero-at-origin", PASS if worst <= INEQ_TOL else FAIL, worst, INEQ_TOL,
                           (t0 - T, t0))


def check_majorant(eq: Equation, t0: float, b: float, signed: bool = True,
                   cid: str = "growth-majorant") -> ConditionResult:
    """``h sgn x <= q(t, max(|x|, |y|))`` on ``x, y`` in ``[-4 kappa, 4 kappa]`` (``signed``),
    or ``0 <= h <= q(t, max(x, y))`` on ``x, y`` in ``[0, 4 kappa]``.

    Times are cell midpoints of ``(t0, b)`` since the bound is only needed
    almost everywhere. Where ``nu(t) = t`` the second argument is ``u(t)``
    itself and only the diagonal ``y = x`` is sampled.
    """
    f = _h_parts(eq)
    if f.q is None:
        return ConditionResult(cid, INDETERMINATE, None, None, (t0, b), note="no majorant q supplied")
    span = 4.0 * eq.kappa
    X, Y = _box(-span if signed else 0.0, span, 25)
    edges = _sample_times(t0, b, 22)
    worst = math.inf
    for t in 0.5 * (edges[1:] + edges[:-1]):
        x, y = (X, X) if float(f.nu(t)) == t else (X, Y)
        H = np.asarray(f.h(t, x, y), dtype=float) * np.ones_like(x)
        Q = np.asarray(f.q(t, np.maximum(np.abs(x), np.abs(y))), dtype=float) * np.ones_like(x)
        if signed:
            worst = min(worst, float(np.min(Q - H * np.sign(x))))
        else:
            worst = min(worst, float(np.min(Q - H)), float(np.min(H)))
    return ConditionResult(cid, PASS if worst >= -INEQ_TOL else FAIL, worst, 0.0, (t0, b))


def check_retarded_maps(eq: Equation, lo: float, hi: float, cid: str = "retarded") -> ConditionResult:
    maps = [term.deviation for term in eq.ell0 + eq.ell1]
    if isinstance(eq.f, PointwiseH):
        maps.append(eq.f.nu)
    elif isinstance(eq.f, LogisticIntegral):
        maps.append(eq.f.term.lower)
    worst = -math.inf
    for t in _sample_times(lo, hi, 801):
        for m in maps:
            worst = max(worst, float(m(t)) - t)
    if not maps:
        worst = 0.0
    return ConditionResult(cid, PASS if worst <= INEQ_TOL * (1 + abs(hi)) else FAIL, worst, 0.0, (lo, hi))


def check_minorant(eq: Equation, t0: float, T: float) -> list[ConditionResult]:
    """``h1(x, x) > 0`` on ``(0, kappa)`` and ``h >= g h1`` on the window."""
    f = _h_parts(eq)
    window = (t0 - T, t0)
    if f.minorant is None:
        return [ConditionResult("minorant-positive", INDETERMINATE, None, 0.0, window, note="no minorant supplied"),
                ConditionResult("minorant-bound", INDETERMINATE, None, 0.0, window, note="no minorant supplied")]
    g, h1 = f.minorant
    g = as_coeff(g)
    k = eq.kappa
    inner = np.linspace(0.0, k, 66)[1:-1]
    diag = float(np.min(np.asarray(h1(inner, inner), dtype=float)))
    X, Y = np.meshgrid(inner[::4], inner[::4], indexing="ij")
    worst = math.inf
    for t in _sample_times(t0 - T, t0):
        worst = min(worst, float(np.min(np.asarray(f.h(t, X, Y)) - g(t) * np.asarray(h1(X, Y)))))
    return [ConditionResult("minorant-positive", PASS if diag > 0 else FAIL, diag, 0.0, window),
            ConditionResult("minorant-bound", PASS if worst >= -INEQ_TOL else FAIL, worst, 0.0, window)]


def _sup_finite(p, lower, t0, T, grid_step, cid) -> ConditionResult:
    value = sup_window_integral(p, lower, t0, T, grid_step)
    return ConditionResult(cid, PASS_ON_WINDOW if math.isfinite(value) else FAIL, value, math.inf,
                           (t0 - T, t0))


def _limit_cond(p, t0, T, want: str, cid: str, T_sequence=None) -> ConditionResult:
    seq = T_sequence or (T / 8.0, T / 4.0, T / 2.0, T)
    res = check_limit_divergence(p, t0, seq, cid=cid)
    label = res.status
    res.note = label
    if label == want:
        res.status = PASS_ON_WINDOW
    elif label == INDETERMINATE:
        res.status = INDETERMINATE
    else:
        res.status = FAIL
    return res


def _either(cid: str, *alternatives: ConditionResult) -> list[ConditionResult]:
    status = PASS_ON_WINDOW if any(a.ok for a in alternatives) else (
        INDETERMINATE if any(a.status == INDETERMINATE for a in alternatives) else FAIL)
    combined = ConditionResult(cid, status, None, None, alternatives[0].window,
                               note=" or ".join(f"{a.id}:{a.note or a.status}" for a in alternatives))
    return [combined] + [ConditionResult(a.id, "info", a.value, a.threshold, a.window, a.note, a.trace)
                         for a in alternatives]


def _difference(a: CoeffFunction, b: CoeffFunction) -> CoeffFunction:
    return CoeffFunction.wrap(lambda t: a(t) - b(t), "difference")


# --------------------------------------------------------------------------
# verdict assembly
# --------------------------------------------------------------------------

def theorem_verdict(eq: Equation, which: str, T: float = 40.0, grid_step: float = 1e-2,
                    sharpen: bool = False, forward: float | None = None) -> TheoremVerdict:
    """Evaluate every hypothesis of theorem ``which`` for ``eq`` on ``[t0 - T, t0]``.

    ``forward`` is the length of the sampled range right of ``t0`` for the
    conditions stated there (default ``T``). With ``sharpen`` the comparison
    exponent ``e`` is replaced by the fixed point ``lam*`` of
    ``lam = exp(lam p*)``, which can only enlarge the anchor interval.
    """
    if which not in THEOREMS:
        raise ValueError(f"unknown theorem id {which!r}")
    t0, kappa = eq.t0, eq.kappa
    fwd = T if forward is None else float(forward)
    b = t0 + fwd
    caveat = (f"sampled on [{t0 - T:g}, {t0:g}] with step {grid_step:g}"
              + (f" and [{t0:g}, {b:g}]" if which in ("T2.5", "T2.6", "T2.5r", "T2.6r", "T6.2") else "")
              + "; limits at infinity are judged on the window only")
    if which == "T6.1":
        return _verdict_61(eq, T, grid_step, b, caveat)
    if which == "T6.2":
        return _verdict_62(eq, T, grid_step, b, caveat)

    p0, mu0, p1, mu1 = point_delay_form(eq)
    conds: list[ConditionResult] = []
    derived: dict = {}

    def one_over_e(whole_line=False):
        cid = "one-over-e-whole-line" if whole_line else "one-over-e"
        return check_one_over_e(p1, mu1, t0, T, grid_step, cid, b if whole_line else None)

    def rates():
        p_star = sup_window_integral(p1, mu1, t0, T, grid_step)
        derived["p_star"] = p_star
        lam = lambda_fixed_point(p_star) if p_star <= INV_E + INEQ_TOL else None
        derived["lambda_star"] = lam
        rate = lam if (sharpen and lam is not None) else math.e
        derived["rate"] = rate
        return rate

    if which in ("T2.5", "T2.5r", "T2.14", "C2.5"):
        rate = rates()
        conds.append(one_over_e(which == "T2.5r"))
        if which == "T2.5r":
            conds.append(one_over_e(False))
        conds.append(check_comparison_217(p0, p1, mu1, t0, T, rate, grid_step))
        conds.append(_sup_finite(p1, mu0, t0, T, grid_step, "memory-bound"))
        if which in ("T2.5", "T2.5r"):
            M = compute_M_mu(p1, mu0, mu1, t0, T, rate, grid_step)
            derived["M_mu"] = M
    if which in ("T2.5", "T2.6", "T2.5r", "T2.6r"):
        conds.append(check_h_nonneg(eq, t0 - T, t0, "h-nonneg-left"))
        if which == "T2.6r":
            conds.append(check_majorant(eq, t0, b, signed=False, cid="growth-majorant-nonneg"))
        else:
            conds.append(check_majorant(eq, t0, b))
        q = _h_parts(eq).q
        conds.append(check_growth_35(q, t0, b) if q is not None else ConditionResult(
            "sublinear-growth", INDETERMINATE, None, None, (t0, b), note="no majorant q supplied"))
        conds.append(check_h_origin(eq, t0, T))
        conds.append(check_retarded_maps(eq, t0 - T, b, "retarded-whole-line"))
    if which == "T2.5r":
        conds.append(_forward_h_condition(eq, t0, b, p0, mu0))
    if which == "T2.6":
        conds.extend(check_monotone_conditions(p0, p1, mu0, mu1, t0, T, grid_step))
    if which == "T2.6r":
        conds.extend(check_monotone_conditions(p0, p1, mu0, mu1, t0, T, grid_step, t_end=b,
                                               suffix="-whole-line"))
    if which in ("T2.13", "T2.14", "C2.3", "C2.4", "C2.5"):
        conds.append(check_retarded_maps(eq, t0 - T, t0))
        conds.append(check_h_nonneg(eq, t0 - T, t0, "h-nonneg-left"))
    if which in ("T2.13", "C2.3", "C2.4"):
        conds.append(one_over_e())
        conds.append(_limit_cond(p1, t0, T, "bounded-on-window", "p1-integrable"))
    if which in ("C2.3", "C2.4", "C2.5"):
        conds.extend(check_minorant(eq, t0, T))
        f = _h_parts(eq)
        g = as_coeff(f.minorant[0]) if f.minorant is not None else None
    if which in ("C2.3", "C2.4"):
        alts = [_limit_cond(p0, t0, T, "diverges-on-window", "p0-diverges")]
        if g is not None:
            alts.append(_limit_cond(g, t0, T, "diverges-on-window", "g-diverges"))
        conds.extend(_either("divergence-alternative", *alts))
    if which == "C2.4":
        conds.append(check_monotone_conditions(p0, p1, mu0, mu1, t0, T, grid_step)[0])
    if which == "C2.5":
        lag1 = CoeffFunction.builtin("shift", delta=1.0)
        conds.append(_sup_finite(p1, lag1, t0, T, grid_step, "unit-memory-bound"))
        diff = check_window_limsup(_difference(p0, p1), lag1, t0, T, grid_step, "unit-limsup-p0-p1")
        alts = [diff]
        if g is not None:
            alts.append(check_window_limsup(g, lag1, t0, T, grid_step, "unit-limsup-g"))
        for a in alts:
            a.note = a.status
            a.status = PASS_ON_WINDOW if a.status == "positive" else FAIL
        conds.extend(_either("limsup-alternative", *alts))
    if which == "R2.7":
        conds.extend(_rigidity_conditions(eq, t0, T, grid_step))

    verdict = TheoremVerdict(which, conds, derived, caveat=caveat)
    if which in EXISTENCE:
        verdict.c_interval = admissible_c_interval(which, kappa, derived.get("M_mu", 0.0))
        verdict.c = eq.c
        verdict.c_in_interval = verdict.c_interval.contains(eq.c)
    return verdict


def _forward_h_condition(eq, t0, b, p0, mu0) -> ConditionResult:
    """``h >= 0`` right of ``t0`` on non-negative arguments, weakened when ``mu0`` is ``t`` or ``nu``."""
    f = _h_parts(eq)
    ts = _sample_times(t0, b, 81)[1:]
    same_nu = all(abs(mu0(t) - f.nu(t)) <= INEQ_TOL for t in ts)
    same_t = all(abs(mu0(t) - t) <= INEQ_TOL for t in ts)
    top = 4.0 * eq.kappa
    if same_nu:
        return check_h_nonneg(eq, ts[0], b, "h-nonneg-right", top, lambda t, x, y: p0(t) * y)
    if same_t:
        return check_h_nonneg(eq, ts[0], b, "h-nonneg-right", top, lambda t, x, y: p0(t) * x)
    return check_h_nonneg(eq, ts[0], b, "h-nonneg-right", top)


def _rigidity_conditions(eq: Equation, t0: float, T: float, grid_step: float) -> list[ConditionResult]:
    p0, mu0, p1, mu1 = point_delay_form(eq)
    f = _h_parts(eq)
    ts = window_grid(t0, T, grid_step)
    window = (t0 - T, t0)
    gap = max(abs(p0(t) - p1(t)) for t in ts)
    hk = max(abs(float(f.h(t, eq.kappa, eq.kappa))) for t in ts)
    mem = sup_window_integral(p1, mu1, t0, T, grid_step)
    return [
        ConditionResult("equal-coefficients", PASS if gap <= INEQ_TOL else FAIL, gap, INEQ_TOL, window),
        ConditionResult("h-zero-at-kappa", PASS if hk <= INEQ_TOL else FAIL, hk, INEQ_TOL, window),
        ConditionResult("no-p1-memory", PASS if mem <= INEQ_TOL else FAIL, mem, INEQ_TOL, window),
    ]


def _verdict_61(eq: Equation, T, grid_step, b, caveat) -> TheoremVerdict:
    if eq.model != "delay-G":
        raise ModelError("T6.1 applies to the delay equation u' = -u + G(u(t - tau))")
    t0, kappa = eq.t0, eq.kappa
    G, tau, q0 = eq.params["G"], as_coeff(eq.params["tau"]), eq.params["q0"]
    ts = window_grid(t0, T, grid_step)
    taus = np.array([tau(t) for t in ts])
    window = (t0 - T, t0)
    conds = [
        ConditionResult("delay-positive", PASS if np.min(taus) > 0 else FAIL, float(np.min(taus)), 0.0, window),
        ConditionResult("delay-bounded", PASS_ON_WINDOW if np.isfinite(np.max(taus)) else FAIL,
                        float(np.max(taus)), math.inf, window),
    ]
    s = np.linspace(0.0, kappa, 2001)
    Gs = np.asarray(G(s), dtype=float)
    conds.append(ConditionResult("G-zero-at-origin", PASS if abs(Gs[0]) <= INEQ_TOL else FAIL,
                                 float(abs(Gs[0])), INEQ_TOL))
    conds.append(ConditionResult("G-nonneg", PASS if np.min(Gs) >= -INEQ_TOL else FAIL, float(np.min(Gs)), 0.0))
    gap = float(np.min(Gs[1:-1] - s[1:-1]))
    conds.append(ConditionResult("G-above-diagonal", PASS if gap > 0 else FAIL, gap, 0.0))
    conds.append(check_growth_35(lambda t, x: q0(x), t0, t0 + 1.0, cid="G-sublinear"))
    M_tau = float(np.max(taus))
    verdict = TheoremVerdict("T6.1", conds, {"M_tau": M_tau}, caveat=caveat)
    verdict.c_interval = admissible_c_interval("T6.1", kappa, M_tau)
    verdict.c = eq.c
    verdict.c_in_interval = verdict.c_interval.contains(eq.c)
    return verdict


def _verdict_62(eq: Equation, T, grid_step, b, caveat) -> TheoremVerdict:
    if not isinstance(eq.f, LogisticIntegral) or eq.ell0 or eq.ell1:
        raise ModelError("T6.2 applies to the generalized logistic equation")
    t0, kappa = eq.t0, eq.kappa
    f = eq.f
    g0 = f.g0
    conds = [_limit_cond(g0, t0, T, "diverges-on-window", "g0-diverges")]
    ts = window_grid(t0, T, grid_step)
    K = np.array([f.term.total_mass(t) for t in ts])
    conds.append(ConditionResult("kernel-mass-positive", PASS_ON_WINDOW if np.min(K) > 0 else FAIL,
                                 float(np.min(K)), 0.0, (t0 - T, t0)))
    # forward conditions for the behaviour at +infinity
    fts = _sample_times(t0, b, 201)
    nus = np.array([check_retarded(f.term.lower, t) for t in fts])
    tail = nus[len(nus) // 2:]
    grows = bool(np.all(np.diff(tail) >= -INEQ_TOL) and tail[-1] - tail[0] >= 0.25 * (fts[-1] - fts[len(fts) // 2]))
    conds.append(ConditionResult("lower-limit-unbounded", PASS_ON_WINDOW if grows else INDETERMINATE,
                                 float(nus[-1]), None, (t0, b)))
    gK = CoeffFunction.wrap(lambda t: g0(t) * f.term.total_mass(t), "g0*K")
    lag1 = CoeffFunction.builtin("shift", delta=1.0)
    # limsup at +infinity: look at the newest third of the forward range
    vals = _window_integrals(gK, lag1, fts[fts >= b - (b - t0) / 3.0])
    val = float(np.max(vals))
    conds.append(ConditionResult("forward-limsup", PASS_ON_WINDOW if val > 1e-9 else FAIL, val, 1e-9, (t0, b)))
    verdict = TheoremVerdict("T6.2", conds, {"K_min": float(np.min(K))}, caveat=caveat)
    verdict.c_interval = admissible_c_interval("T6.2", kappa)
    verdict.c = eq.c
    verdict.c_in_interval = verdict.c_interval.contains(eq.c)
    return verdict
