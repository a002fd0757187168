"""Constructors for the model equations.

* ``delay-G``: ``u' = -u + G(u(t - tau(t)))`` written in deviating-argument
  form with ``p0`` switched off after ``t0``.
* ``wavefront``: the travelling-wave reduction ``c u' = -u + G(u(t - c r))``.
* ``logistic``: the generalized logistic equation with a discrete Stieltjes
  kernel, solved through the ceiling scaffold ``U``.
* ``deviating-general``: one ``p0``/``mu0`` term, one ``p1``/``mu1`` term and
  a pointwise ``h``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (IDENTITY, CoeffFunction, DelayTerm, DiscreteKernel, DistributedTerm,
                   Equation, LogisticIntegral, ModelError, PointwiseH, ZeroNonlinearity, as_coeff)
from .quadrature import adaptive_simpson

MODEL_IDS = ("delay-G", "wavefront", "logistic", "deviating-general")


# --------------------------------------------------------------------------
# nonlinearities G
# --------------------------------------------------------------------------

def make_power_monostable(p: float, kappa: float) -> Callable:
    """``G(s) = s**p (kappa - s) + s`` on ``[0, kappa]``, ``kappa`` above, 0 below.

    Accepts scalars and arrays.
    """
    if not (p > 0 and kappa > 0):
        raise ModelError("p and kappa must be positive")

    def G(s):
        if isinstance(s, float):
            if s <= 0.0:
                return 0.0
            return kappa if s > kappa else s ** p * (kappa - s) + s
        s_arr = np.asarray(s, dtype=float)
        inside = np.clip(s_arr, 0.0, kappa)
        out = np.where(s_arr > kappa, kappa, inside ** p * (kappa - inside) + inside)
        out = np.where(s_arr < 0.0, 0.0, out)
        return float(out) if np.ndim(s) == 0 else out

    G.kappa = kappa
    G.label = f"power-monostable(p={p:g}, kappa={kappa:g})"
    return G


def make_nicholson(beta: float) -> tuple[Callable, float]:
    """Normalised blowfly map ``G(s) = beta s exp(-s)``; returns ``(G, kappa = ln beta)``."""
    if not beta > 1:
        raise ModelError("beta must exceed 1 for a positive equilibrium")

    def G(s):
        s_arr = np.maximum(np.asarray(s, dtype=float), 0.0)
        out = beta * s_arr * np.exp(-s_arr)
        return float(out) if np.ndim(s) == 0 else out

    G.label = f"nicholson(beta={beta:g})"
    return G, math.log(beta)


def make_mackey_glass(beta: float, n: float) -> tuple[Callable, float]:
    """``G(s) = beta s / (1 + s**n)``; returns ``(G, kappa = (beta - 1)**(1/n))``."""
    if not (beta > 1 and n > 0):
        raise ModelError("need beta > 1 and n > 0")

    def G(s):
        s_arr = np.maximum(np.asarray(s, dtype=float), 0.0)
        out = beta * s_arr / (1.0 + s_arr ** n)
        return float(out) if np.ndim(s) == 0 else out

    G.label = f"mackey-glass(beta={beta:g}, n={n:g})"
    return G, (beta - 1.0) ** (1.0 / n)


def make_q0(G: Callable, reach: float, n: int = 4001) -> Callable:
    """Running maximum ``q0(s) = max G on [0, s]`` from a grid on ``[0, reach]``.

    Arguments past ``reach`` add a grid of ``[reach, s]``.
    """
    grid = np.linspace(0.0, reach, n)
    cm = np.maximum.accumulate(np.asarray(G(grid), dtype=float))

    def one(x):
        if x <= 0:
            return max(float(G(0.0)), 0.0) if x == 0 else 0.0
        if x <= reach:
            k = int(np.searchsorted(grid, x, side="right") - 1)
            return max(float(cm[k]), float(G(x)))
        extra = float(np.max(G(np.linspace(reach, x, 2001))))
        return max(float(cm[-1]), extra)

    def q0(x):
        if np.ndim(x) == 0:
            return one(float(x))
        x = np.asarray(x, dtype=float)
        return np.vectorize(one, otypes=[float])(x)

    return q0


# --------------------------------------------------------------------------
# equations
# --------------------------------------------------------------------------

def _sample_window(t0: float) -> np.ndarray:
    return np.linspace(t0 - 200.0, t0 + 200.0, 4001)


def make_delay_eq(G: Callable, tau, t0: float = 0.0, c: float = 0.0, kappa: float = 1.0,
                  q0: Callable | None = None) -> Equation:
    """``u' = -u + G(u(t - tau(t)))`` as ``p0 u(t - tau) - u(t) + h``.

    ``mu1(t) = t``, ``mu0 = nu = t - tau``, ``p1 = 1``, ``p0 = 1`` up to ``t0``
    and 0 after, ``h(t, x, y) = G(|y|) - p0(t) y`` and ``q(t, rho) = q0(rho)``.
    ``tau`` must be positive wherever it is sampled.
    """
    tau = as_coeff(tau)
    ts = _sample_window(t0)
    taus = np.array([tau(t) for t in ts])
    if np.any(taus <= 0):
        raise ModelError(f"delay tau must be positive; minimum sampled value {taus.min():g}")
    lag = CoeffFunction.builtin("lag", tau=tau)
    p0 = CoeffFunction.builtin("step", at=float(t0), left=1.0, right=0.0)
    p1 = CoeffFunction.constant(1.0)
    q0 = q0 or make_q0(G, 4.0 * kappa)

    def h(t, x, y):
        return G(abs(y)) - p0(t) * y

    f = PointwiseH(h, nu=lag, q=lambda t, rho: q0(rho),
                   minorant=(CoeffFunction.constant(1.0), lambda x, y: G(y) - y),
                   label="G(|y|) - p0 y")
    return Equation((DelayTerm(p0, lag),), (DelayTerm(p1, IDENTITY),), f, kappa, float(t0), float(c),
                    model="delay-G", params={"G": G, "tau": tau, "q0": q0})


def make_wavefront(G: Callable, wave_speed: float, r: float, t0: float = 0.0, c: float = 0.0,
                   kappa: float = 1.0, q0: Callable | None = None) -> Equation:
    """``wave_speed u' = -u + G(u(t - wave_speed r))``.

    ``p0 = p1 = 1/wave_speed``, ``mu0 = nu = t - wave_speed r``, ``mu1 = t`` and
    ``h = (G(y) - y) / wave_speed``. The anchor value ``c`` is unrelated to the
    wave speed.
    """
    if not (wave_speed > 0 and r > 0):
        raise ModelError("wave_speed and r must be positive")
    inv = 1.0 / wave_speed
    lag = CoeffFunction.builtin("shift", delta=wave_speed * r)
    p = CoeffFunction.constant(inv)
    q0 = q0 or make_q0(G, 4.0 * kappa)

    def h(t, x, y):
        return (G(y) - y) * inv

    f = PointwiseH(h, nu=lag, q=lambda t, rho: (q0(rho) + rho) * inv,
                   minorant=(CoeffFunction.constant(inv), lambda x, y: G(y) - y),
                   label="(G(y) - y) / wave_speed")
    return Equation((DelayTerm(p, lag),), (DelayTerm(p, IDENTITY),), f, kappa, float(t0), float(c),
                    model="wavefront", params={"G": G, "wave_speed": wave_speed, "r": r, "q0": q0})


def make_deviating(p0, mu0, p1, mu1, h: Callable | None, nu=IDENTITY, t0: float = 0.0, c: float = 0.0,
                   kappa: float = 1.0, q: Callable | None = None, minorant: tuple | None = None,
                   label: str = "callable", params: dict | None = None) -> Equation:
    """General single-term form ``p0 u(mu0) - p1 u(mu1) + h(t, u(t), u(nu(t)))``.

    ``h = None`` gives ``f = 0``.
    """
    f = ZeroNonlinearity() if h is None else PointwiseH(h, nu, q, minorant, label)
    return Equation((DelayTerm(p0, mu0),), (DelayTerm(p1, mu1),), f, kappa, float(t0), float(c),
                    model="deviating-general", params=dict(params or {}))


def G_reduction_h(G: Callable, p0) -> Callable:
    """``h(t, x, y) = G(|y|) - p0(t) y``, the nonlinearity of the delay reduction."""
    p0 = as_coeff(p0)
    return lambda t, x, y: G(np.abs(y)) - p0(t) * y


def ceiling_U(g0, term: DistributedTerm, kappa: float, t0: float, horizon: float = 200.0,
              step: float = 1e-2) -> CoeffFunction:
    """``U = kappa`` up to ``t0`` and ``kappa exp(int_t0^t g0 K)`` after, tabulated up to ``t0 + horizon``."""
    g0 = as_coeff(g0)
    n = max(1, int(round(horizon / step)))
    ts = np.linspace(t0, t0 + horizon, n + 1)

    def gK(s):
        return g0(s) * term.total_mass(s)

    cells = [adaptive_simpson(gK, ts[k], ts[k + 1], 1e-12) for k in range(n)]
    expo = np.concatenate([[0.0], np.cumsum(cells)])
    values = kappa * np.exp(np.minimum(expo, 700.0))
    return CoeffFunction.table(np.concatenate([[t0 - 1.0], ts]), np.concatenate([[kappa], values]))


def make_logistic(g0, nu, kernel: DiscreteKernel, kappa: float = 1.0, lam_exp: float = 1.0,
                  t0: float = 0.0, c: float = 0.0, scaffold: bool = True,
                  horizon: float = 200.0) -> Equation:
    """``u' = g0 u sum_j w_j |1 - u(s_j)/kappa|^lam_exp sgn(1 - u(s_j)/kappa)``.

    With ``scaffold`` the factor ``u(t)`` is replaced by ``chi(t, u(t))``
    (positive part below the ceiling ``U``, ``U`` above) as used for
    construction; ``params["raw"]`` holds the unscaffolded equation.
    The majorant is ``q(t, x) = g0(t) U(t) K(t)``.
    """
    g0 = as_coeff(g0)
    if kappa <= 0 or lam_exp <= 0:
        raise ModelError("kappa and lam_exp must be positive")
    for t in _sample_window(t0)[::10]:
        if g0(t) < 0:
            raise ModelError(f"g0 must be non-negative (g0({t:g}) = {g0(t):g})")
    term = DistributedTerm(nu, kernel, "logistic")
    U = ceiling_U(g0, term, kappa, t0, horizon)

    def q(t, x):
        return g0(t) * U(t) * term.total_mass(t) + 0.0 * np.asarray(x, dtype=float)

    gK = CoeffFunction.wrap(lambda t: g0(t) * term.total_mass(t), "g0*K")
    params = {"g0": g0, "U": U, "gK": gK, "lam_exp": float(lam_exp)}
    raw_f = LogisticIntegral(g0, term, lam_exp, None, q)
    raw = Equation((), (), raw_f, kappa, float(t0), float(c), model="logistic", params=dict(params))
    if not scaffold:
        params["raw"] = raw
        return Equation((), (), raw_f, kappa, float(t0), float(c), model="logistic", params=params)
    params["raw"] = raw
    f = LogisticIntegral(g0, term, lam_exp, U, q)
    return Equation((), (), f, kappa, float(t0), float(c), model="logistic", params=params)


def raw_equation(eq: Equation) -> Equation:
    """The equation without construction scaffolding (identity for non-logistic models)."""
    raw = eq.params.get("raw") if eq.params else None
    return eq if raw is None else raw.with_anchor(eq.c, eq.t0)


@dataclass
class ModelSpec:
    """A model id with its named parameters; ``build`` assembles the equation."""

    id: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.id not in MODEL_IDS:
            raise ModelError(f"unknown model id {self.id!r}; expected one of {', '.join(MODEL_IDS)}")

    def build(self, t0: float = 0.0, c: float = 0.0) -> Equation:
        from .scenario import build_equation

        return build_equation({"id": self.id, **self.params}, t0, c)
