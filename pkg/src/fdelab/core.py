"""Operator building blocks for scalar retarded functional differential equations.

The equations handled here have the form

    u'(t) = sum_i p0_i(t) u(mu0_i(t)) - sum_j p1_j(t) u(mu1_j(t)) + f(u)(t)

where every deviating argument looks into the past (``mu(t) <= t``) and ``f``
is either a pointwise map ``h(t, u(t), u(nu(t)))`` or a distributed
logistic-type integral against a discrete Stieltjes kernel.

Functions on a bounded interval are always read through the constant
extension: values left of the first knot equal the first value, values right
of the last knot equal the last value.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

# slack for deviating arguments that land a hair above t from round-off
RETARD_TOL = 1e-12


class ModelError(ValueError):
    """An equation ingredient violates its structural requirements."""


def _retard_slack(t: float) -> float:
    return RETARD_TOL * (1.0 + abs(t))


# --------------------------------------------------------------------------
# coefficient functions
# --------------------------------------------------------------------------

def _const_fn(value: float):
    def fn(t):
        if isinstance(t, float) or np.ndim(t) == 0:
            return value
        return np.full(np.shape(t), value)

    return fn


def _builtin_identity():
    return lambda t: t


def _builtin_shift(delta: float):
    return lambda t: t - delta


def _builtin_lag(tau: "CoeffFunction"):
    return lambda t: t - tau(t)


def _builtin_step(at: float, left: float, right: float):
    def fn(t):
        if isinstance(t, float) or np.ndim(t) == 0:
            return left if t <= at else right
        return np.where(np.asarray(t) <= at, left, right)

    return fn


def _builtin_phi(t0: float):
    # 1/(t0 + 1 - t)^2 on t <= t0, continued by its value 1 at t0
    def fn(t):
        if np.ndim(t) == 0:
            return 1.0 / (t0 + 1.0 - t) ** 2 if t <= t0 else 1.0
        t = np.asarray(t, dtype=float)
        d = t0 + 1.0 - np.minimum(t, t0)
        return 1.0 / d**2

    return fn


def _builtin_inverse_linear(t0: float):
    def fn(t):
        if np.ndim(t) == 0:
            return 1.0 / (1.0 + abs(t - t0))
        return 1.0 / (1.0 + np.abs(np.asarray(t, dtype=float) - t0))

    return fn


def _builtin_scaled(base: "CoeffFunction", factor: float):
    return lambda t: factor * base(t)


BUILTINS: dict[str, Callable[..., Callable]] = {
    "identity": _builtin_identity,
    "shift": _builtin_shift,
    "lag": _builtin_lag,
    "step": _builtin_step,
    "phi": _builtin_phi,
    "inverse-linear": _builtin_inverse_linear,
    "scaled": _builtin_scaled,
}


class CoeffFunction:
    """A scalar function of time.

    Three kinds are representable: ``constant``, ``table`` (samples with
    piecewise-linear or step interpolation, extended constantly past the
    sampled range) and ``builtin`` (a named closed form from ``BUILTINS``).
    ``callable`` wraps an arbitrary Python function and cannot be written to
    a scenario file.

    Instances are evaluable on scalars and on numpy arrays.
    """

    __slots__ = ("kind", "payload", "_fn")

    def __init__(self, kind: str, payload: Mapping, fn: Callable):
        self.kind = kind
        self.payload = dict(payload)
        self._fn = fn

    def __call__(self, t):
        return self._fn(t)

    def __repr__(self) -> str:
        return f"CoeffFunction({self.kind!r}, {self.payload!r})"

    @classmethod
    def constant(cls, value: float) -> "CoeffFunction":
        value = float(value)
        return cls("constant", {"value": value}, _const_fn(value))

    @classmethod
    def table(cls, t: Sequence[float], values: Sequence[float], rule: str = "linear") -> "CoeffFunction":
        t = np.array(t, dtype=float)
        v = np.array(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size == 0:
            raise ModelError("table needs matching one-dimensional t and value arrays")
        if np.any(np.diff(t) <= 0):
            raise ModelError("table abscissae must be strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        tl, vl = t.tolist(), v.tolist()
        if rule == "linear":
            def fn(s):
                if isinstance(s, float):
                    if s <= tl[0]:
                        return vl[0]
                    if s >= tl[-1]:
                        return vl[-1]
                    k = bisect.bisect_right(tl, s) - 1
                    lam = (s - tl[k]) / (tl[k + 1] - tl[k])
                    return vl[k] + lam * (vl[k + 1] - vl[k])
                out = np.interp(s, t, v)
                return float(out) if np.ndim(s) == 0 else out
        elif rule == "step":
            def fn(s):
                idx = np.clip(np.searchsorted(t, s, side="right") - 1, 0, t.size - 1)
                out = v[idx]
                return float(out) if np.ndim(s) == 0 else out
        else:
            raise ModelError(f"unknown interpolation rule {rule!r}")
        return cls("table", {"t": t, "values": v, "rule": rule}, fn)

    @classmethod
    def builtin(cls, name: str, **params) -> "CoeffFunction":
        try:
            factory = BUILTINS[name]
        except KeyError:
            raise ModelError(f"unknown builtin coefficient {name!r}") from None
        return cls("builtin", {"name": name, **params}, factory(**params))

    @classmethod
    def wrap(cls, fn: Callable, label: str = "callable") -> "CoeffFunction":
        return cls("callable", {"label": label}, fn)

    def is_identity(self) -> bool:
        return self.kind == "builtin" and self.payload["name"] == "identity"


def as_coeff(obj) -> CoeffFunction:
    """Coerce numbers and callables to :class:`CoeffFunction`."""
    if isinstance(obj, CoeffFunction):
        return obj
    if isinstance(obj, (int, float, np.floating, np.integer)):
        return CoeffFunction.constant(float(obj))
    if callable(obj):
        return CoeffFunction.wrap(obj)
    raise TypeError(f"cannot interpret {obj!r} as a coefficient function")


IDENTITY = CoeffFunction.builtin("identity")


def check_retarded(deviation: CoeffFunction, t: float) -> float:
    s = deviation(t)
    if s > t + _retard_slack(t):
        raise ModelError(f"deviating argument {s!r} lies ahead of t={t!r}")
    return s


# --------------------------------------------------------------------------
# trajectories
# --------------------------------------------------------------------------

def _hermite(theta, dt, u0, u1, d0, d1):
    # written around u0 so that constant data reproduce exactly
    one = 1.0 - theta
    h10 = theta * one * one
    h01 = theta * theta * (3.0 - 2.0 * theta)
    h11 = theta * theta * (theta - 1.0)
    return u0 + h01 * (u1 - u0) + dt * (h10 * d0 + h11 * d1)


def _hermite_slope(theta, dt, u0, u1, d0, d1):
    g00 = 6.0 * theta * (theta - 1.0)
    g10 = (1.0 - theta) * (1.0 - 3.0 * theta)
    g01 = -g00
    g11 = theta * (3.0 * theta - 2.0)
    return (g00 * u0 + g01 * u1) / dt + g10 * d0 + g11 * d1


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Piecewise cubic Hermite function through ``(t, u, du)`` knots.

    Evaluation outside ``[a, b]`` returns the nearest endpoint value. The
    derivative at a knot is the stored knot derivative (the right segment's
    slope there); outside the domain it is zero.
    """

    t: np.ndarray
    u: np.ndarray
    du: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float).ravel()
        u = np.array(self.u, dtype=float).ravel()
        du = np.array(self.du, dtype=float).ravel()
        if t.size == 0:
            raise ValueError("trajectory needs at least one knot")
        if not (t.shape == u.shape == du.shape):
            raise ValueError("t, u and du must have equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("knots must be strictly increasing")
        for arr in (t, u, du):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "du", du)

    @classmethod
    def constant(cls, value: float, a: float, b: float | None = None) -> "Trajectory":
        if b is None or b == a:
            return cls([a], [value], [0.0])
        return cls([a, b], [value, value], [0.0, 0.0])

    @classmethod
    def from_samples(cls, t, u, du=None) -> "Trajectory":
        """Build from samples; missing derivatives come from second-order differences."""
        t = np.asarray(t, dtype=float)
        u = np.asarray(u, dtype=float)
        if du is None:
            du = np.gradient(u, t, edge_order=2) if t.size > 2 else np.zeros_like(u)
        return cls(t, u, du)

    @classmethod
    def from_function(cls, fn, dfn, t) -> "Trajectory":
        t = np.asarray(t, dtype=float)
        return cls(t, fn(t), dfn(t))

    @property
    def a(self) -> float:
        return float(self.t[0])

    @property
    def b(self) -> float:
        return float(self.t[-1])

    def __len__(self) -> int:
        return self.t.size

    def _locate(self, s):
        idx = np.searchsorted(self.t, s, side="right") - 1
        return np.clip(idx, 0, self.t.size - 2)

    def __call__(self, s):
        t, u, du = self.t, self.u, self.du
        if np.ndim(s) == 0:
            s = float(s)
            if s <= t[0]:
                return float(u[0])
            if s >= t[-1]:
                return float(u[-1])
            j = int(self._locate(s))
            dt = t[j + 1] - t[j]
            return float(_hermite((s - t[j]) / dt, dt, u[j], u[j + 1], du[j], du[j + 1]))
        s = np.asarray(s, dtype=float)
        if t.size == 1:
            return np.full(s.shape, u[0])
        sc = np.clip(s, t[0], t[-1])
        j = self._locate(sc)
        dt = t[j + 1] - t[j]
        out = _hermite((sc - t[j]) / dt, dt, u[j], u[j + 1], du[j], du[j + 1])
        return np.where(sc >= t[-1], u[-1], out)

    def derivative(self, s):
        t, u, du = self.t, self.u, self.du
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros_like(s)
        inside = (s >= t[0]) & (s <= t[-1])
        if t.size > 1 and inside.any():
            si = s[inside]
            j = self._locate(si)
            dt = t[j + 1] - t[j]
            theta = (si - t[j]) / dt
            val = _hermite_slope(theta, dt, u[j], u[j + 1], du[j], du[j + 1])
            at_knot = t[j] == si
            out[inside] = np.where(at_knot, du[j], val)
            # the last knot has no right segment
            out[inside & (s == t[-1])] = du[-1]
        elif t.size == 1:
            out[s == t[0]] = du[0]
        return float(out[0]) if scalar else out

    def sample_points(self, span: tuple[float, float] | None = None) -> np.ndarray:
        """Knots and segment midpoints, optionally restricted to ``span``."""
        t = self.t
        if t.size == 1:
            pts = t.copy()
        else:
            pts = np.empty(2 * t.size - 1)
            pts[0::2] = t
            pts[1::2] = 0.5 * (t[:-1] + t[1:])
        if span is not None:
            lo, hi = span
            pts = pts[(pts >= lo) & (pts <= hi)]
        return pts

    def restrict(self, lo: float, hi: float) -> "Trajectory":
        keep = (self.t >= lo) & (self.t <= hi)
        return Trajectory(self.t[keep], self.u[keep], self.du[keep])


def theta_eval(traj: Trajectory, t: float) -> float:
    """Value of the constant extension of ``traj`` at ``t``."""
    return traj(t)


def psi_clamp(x, kappa: float):
    """Project ``x`` onto ``[0, kappa]``."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if isinstance(x, float) or np.ndim(x) == 0:
        x = float(x)
        return kappa if x > kappa else (0.0 if x < 0.0 else x)
    return np.clip(x, 0.0, kappa)


# --------------------------------------------------------------------------
# operator terms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DelayTerm:
    """``p(t) * u(mu(t))`` with ``p >= 0`` and ``mu(t) <= t``."""

    coefficient: CoeffFunction
    deviation: CoeffFunction

    def __post_init__(self):
        object.__setattr__(self, "coefficient", as_coeff(self.coefficient))
        object.__setattr__(self, "deviation", as_coeff(self.deviation))

    def __call__(self, t: float, u_at: Callable):
        p = self.coefficient(t)
        if p < 0:
            raise ModelError(f"negative coefficient {p!r} at t={t!r}")
        if p == 0:
            return 0.0
        return p * u_at(check_retarded(self.deviation, t))


class DiscreteKernel:
    """Discrete Stieltjes measure ``sum_j w_j(t) delta_{t - offset_j}``.

    Masses are given on time slices and interpolated linearly between them,
    constant beyond the first and last slice. ``accuracy`` is the declared
    error of the total mass against the measure it approximates (zero for
    genuinely discrete kernels).
    """

    def __init__(self, offsets, masses, slice_times=None, accuracy: float = 0.0):
        offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
        masses = np.asarray(masses, dtype=float)
        if masses.ndim == 1:
            masses = masses[None, :]
        if slice_times is None:
            slice_times = np.zeros(masses.shape[0])
        slice_times = np.atleast_1d(np.asarray(slice_times, dtype=float))
        if masses.shape != (slice_times.size, offsets.size):
            raise ModelError("masses must have shape (n_slices, n_nodes)")
        if np.any(offsets < 0):
            raise ModelError("kernel nodes must not lie in the future")
        if np.any(masses < 0):
            raise ModelError("kernel masses must be non-negative")
        if slice_times.size > 1 and np.any(np.diff(slice_times) <= 0):
            raise ModelError("slice times must be strictly increasing")
        self.offsets = offsets
        self.masses = masses
        self.slice_times = slice_times
        self.accuracy = float(accuracy)
        self.max_offset = float(np.max(offsets)) if offsets.size else 0.0
        self._offset_list = offsets.tolist()
        self._mass_list = masses[0].tolist() if slice_times.size == 1 else None

    @classmethod
    def point(cls, offset: float, mass: float = 1.0) -> "DiscreteKernel":
        return cls([offset], [mass])

    @classmethod
    def from_density(cls, density: Callable, max_offset: float, n_intervals: int = 64) -> "DiscreteKernel":
        """Composite Simpson discretisation of ``density(theta) d theta`` on ``[0, max_offset]``."""
        if n_intervals % 2:
            n_intervals += 1
        theta = np.linspace(0.0, max_offset, n_intervals + 1)
        w = np.ones_like(theta)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= (max_offset / n_intervals) / 3.0
        vals = np.asarray(density(theta), dtype=float)
        coarse = cls._simpson_total(density, max_offset, n_intervals // 2)
        fine = float(np.sum(w * vals))
        return cls(theta, w * vals, accuracy=abs(fine - coarse) / 15.0)

    @staticmethod
    def _simpson_total(density, max_offset, n):
        if n % 2:
            n += 1
        theta = np.linspace(0.0, max_offset, n + 1)
        w = np.ones_like(theta)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return float(np.sum(w * np.asarray(density(theta), dtype=float)) * (max_offset / n) / 3.0)

    def masses_at(self, t: float) -> np.ndarray:
        if self.slice_times.size == 1:
            return self.masses[0]
        st = self.slice_times
        if t <= st[0]:
            return self.masses[0]
        if t >= st[-1]:
            return self.masses[-1]
        k = int(np.searchsorted(st, t, side="right") - 1)
        lam = (t - st[k]) / (st[k + 1] - st[k])
        return (1.0 - lam) * self.masses[k] + lam * self.masses[k + 1]

    def lists_at(self, t: float) -> tuple[list, list]:
        """Offsets and masses at ``t`` as plain lists (hot path of the integrator)."""
        if self._mass_list is not None:
            return self._offset_list, self._mass_list
        return self._offset_list, self.masses_at(t).tolist()

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        return t - self.offsets, self.masses_at(t)

    def total_mass(self, t):
        if np.ndim(t) == 0:
            return float(np.sum(self.masses_at(float(t))))
        return np.array([np.sum(self.masses_at(float(s))) for s in np.ravel(t)]).reshape(np.shape(t))


def logistic_transform(x, kappa: float, lam_exp: float):
    """``|1 - x/kappa|^lam_exp * sgn(1 - x/kappa)``, zero at ``x == kappa``."""
    if isinstance(x, float):
        z = 1.0 - x / kappa
        return 0.0 if z == 0.0 else math.copysign(abs(z) ** lam_exp, z)
    z = 1.0 - np.asarray(x, dtype=float) / kappa
    return np.sign(z) * np.abs(z) ** lam_exp


INTEGRANDS = {
    "logistic": logistic_transform,
    "identity": lambda x, kappa, lam_exp: x if isinstance(x, float) else np.asarray(x, dtype=float),
}


@dataclass(frozen=True)
class DistributedTerm:
    """Weighted sum over kernel nodes inside ``[nu(t), t]`` of a transform of ``u``."""

    lower: CoeffFunction
    kernel: DiscreteKernel
    integrand: str = "logistic"

    def __post_init__(self):
        object.__setattr__(self, "lower", as_coeff(self.lower))
        if self.integrand not in INTEGRANDS:
            raise ModelError(f"unknown integrand {self.integrand!r}")

    def nodes(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        s, w = self.kernel.at(t)
        lo = check_retarded(self.lower, t)
        slack = _retard_slack(t)
        if np.any(s < lo - slack) or np.any(s > t + slack):
            raise ModelError(f"kernel nodes leave [nu(t), t] at t={t!r}")
        if np.any(w < 0):
            raise ModelError("negative kernel mass")
        return s, w

    def total_mass(self, t):
        return self.kernel.total_mass(t)

    def __call__(self, t: float, u_at: Callable, kappa: float, lam_exp: float):
        offsets, w = self.kernel.lists_at(t)
        # offsets >= 0 and masses >= 0 are enforced by the kernel; only the
        # lower limit needs checking here
        if t - self.kernel.max_offset < check_retarded(self.lower, t) - _retard_slack(t):
            raise ModelError(f"kernel nodes leave [nu(t), t] at t={t!r}")
        transform = INTEGRANDS[self.integrand]
        total = 0.0
        for off, wj in zip(offsets, w):
            if wj:
                total = total + wj * transform(u_at(t - off), kappa, lam_exp)
        return total


def eval_distributed(term: DistributedTerm, traj: Trajectory, t: float,
                     kappa: float, lam_exp: float) -> float:
    """Evaluate a distributed term on the constant extension of ``traj``."""
    if not kappa > 0 or not lam_exp > 0:
        raise ValueError("kappa and lam_exp must be positive")
    return float(term(t, traj, kappa, lam_exp))


# --------------------------------------------------------------------------
# nonlinearities
# --------------------------------------------------------------------------

class Nonlinearity:
    """Base class for the ``f`` part of the right-hand side.

    ``q`` is an optional growth majorant ``q(t, x)`` (non-negative, nondecreasing
    in ``x``); ``minorant`` is an optional pair ``(g, h1)`` with
    ``f >= g(t) * h1(x, y)`` on the left half-line.
    """

    kind = "abstract"
    q: Callable | None = None
    minorant: tuple | None = None

    def __call__(self, t, x, u_at, kappa, clamped=False):
        raise NotImplementedError


class ZeroNonlinearity(Nonlinearity):
    kind = "zero"

    def __init__(self):
        self.q = lambda t, x: 0.0 * np.asarray(x, dtype=float)
        self.minorant = None

    def __call__(self, t, x, u_at, kappa, clamped=False):
        return 0.0 * x


class PointwiseH(Nonlinearity):
    """``h(t, u(t), u(nu(t)))``; ``h`` must accept numpy arrays in ``x`` and ``y``."""

    kind = "pointwise-h"

    def __init__(self, h: Callable, nu: CoeffFunction = IDENTITY, q: Callable | None = None,
                 minorant: tuple | None = None, label: str = "callable"):
        self.h = h
        self.nu = as_coeff(nu)
        self.q = q
        self.minorant = minorant
        self.label = label

    def __call__(self, t, x, u_at, kappa, clamped=False):
        y = u_at(check_retarded(self.nu, t))
        if clamped:
            x = psi_clamp(x, kappa)
            y = psi_clamp(y, kappa)
        return self.h(t, x, y)


class LogisticIntegral(Nonlinearity):
    """``g0(t) * chi(t, u(t)) * sum_j w_j T(u(s_j))`` with the logistic transform ``T``.

    Without a ceiling ``U`` the factor ``chi`` is the identity. With a
    ceiling, ``chi(t, x) = max(x, 0)`` below ``U(t)`` and ``U(t)`` above.
    """

    kind = "logistic-integral"

    def __init__(self, g0: CoeffFunction, term: DistributedTerm, lam_exp: float,
                 ceiling: CoeffFunction | None = None, q: Callable | None = None,
                 minorant: tuple | None = None):
        if not lam_exp > 0:
            raise ModelError("lam_exp must be positive")
        self.g0 = as_coeff(g0)
        self.term = term
        self.lam_exp = float(lam_exp)
        self.ceiling = ceiling
        self.q = q
        self.minorant = minorant

    def chi(self, t, x):
        if self.ceiling is None:
            return x
        cap = self.ceiling(t)
        if isinstance(x, float) or np.ndim(x) == 0:
            return cap if x >= cap else max(x, 0.0)
        return np.where(x >= cap, cap, np.maximum(x, 0.0))

    def without_ceiling(self) -> "LogisticIntegral":
        return LogisticIntegral(self.g0, self.term, self.lam_exp, None, self.q, self.minorant)

    def __call__(self, t, x, u_at, kappa, clamped=False):
        g = self.g0(t)
        if g < 0:
            raise ModelError(f"negative growth rate {g!r} at t={t!r}")
        if clamped:
            x = psi_clamp(x, kappa)
            inner = self.term(t, lambda s: psi_clamp(u_at(s), kappa), kappa, self.lam_exp)
        else:
            inner = self.term(t, u_at, kappa, self.lam_exp)
        return g * self.chi(t, x) * inner


# --------------------------------------------------------------------------
# equations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Equation:
    """Assembled right-hand side with its anchor condition ``u(t0) = c``.

    ``model`` names the constructor that produced the equation and ``params``
    keeps the ingredients the condition checks need (``G``, ``tau``, ...).
    """

    ell0: tuple[DelayTerm, ...]
    ell1: tuple[DelayTerm, ...]
    f: Nonlinearity
    kappa: float
    t0: float = 0.0
    c: float = 0.0
    model: str | None = None
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "ell0", tuple(self.ell0))
        object.__setattr__(self, "ell1", tuple(self.ell1))
        if not self.kappa > 0:
            raise ModelError("kappa must be positive")
        if self.c < 0:
            raise ModelError("anchor value c must be non-negative")

    def with_anchor(self, c: float | None = None, t0: float | None = None) -> "Equation":
        return replace(self, c=self.c if c is None else float(c),
                       t0=self.t0 if t0 is None else float(t0))

    def rhs(self, t: float, x, u_at: Callable, clamped: bool = False):
        total = 0.0
        for term in self.ell0:
            total = total + term(t, u_at)
        for term in self.ell1:
            total = total - term(t, u_at)
        return total + self.f(t, x, u_at, self.kappa, clamped)


def _current_value_lookup(traj: Trajectory, t: float, x: float):
    def u_at(s):
        return x if s >= t else traj(s)

    return u_at


def eval_rhs(eq: Equation, traj: Trajectory, t: float, clamped: bool = False) -> float:
    """Right-hand side at ``t`` with every argument read from ``traj`` (constant-extended)."""
    x = traj(t)
    return float(eq.rhs(t, x, _current_value_lookup(traj, t, x), clamped))


def point_delay_form(eq: Equation):
    """Return ``(p0, mu0, p1, mu1)`` for a single-term equation; empty sides give ``p = 0``."""
    if len(eq.ell0) > 1 or len(eq.ell1) > 1:
        raise ModelError("condition checks need at most one term in each linear part")
    zero = CoeffFunction.constant(0.0)
    p0, mu0 = (eq.ell0[0].coefficient, eq.ell0[0].deviation) if eq.ell0 else (zero, IDENTITY)
    p1, mu1 = (eq.ell1[0].coefficient, eq.ell1[0].deviation) if eq.ell1 else (zero, IDENTITY)
    return p0, mu0, p1, mu1

