"""Scenario files: TOML with a fixed schema; unknown keys are errors.

Sections: ``[model]`` (with nested tables for ``G``, coefficient functions
and the kernel), ``[anchor]``, ``[solve]``, ``[check]``, ``[verify]``,
``[outputs]`` and ``[sweep]``. See ``docs/scenario.md`` for the schema.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .analysis import VerifyThresholds
from .conditions import THEOREMS
from .core import CoeffFunction, DiscreteKernel, Equation, ModelError
from .models import (MODEL_IDS, G_reduction_h, make_deviating, make_delay_eq, make_logistic,
                     make_mackey_glass, make_nicholson, make_power_monostable, make_q0, make_wavefront)
from .solver import SolveConfig

PROPERTY_FLAGS = ("bounds", "positivity_left", "positivity_right", "monotone",
                  "left_limit_converged", "right_end_not_other")


class ScenarioError(ValueError):
    """Malformed scenario; the message names the file and the offending field."""


def _err(where: str, msg: str) -> ScenarioError:
    return ScenarioError(f"{where}: {msg}")


def _check_keys(table: dict, allowed, where: str):
    if not isinstance(table, dict):
        raise _err(where, "expected a table")
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise _err(where, f"unknown key(s) {', '.join(map(repr, unknown))}; allowed: {', '.join(sorted(allowed))}")


def _num(table: dict, key: str, where: str, default=None, positive=False, nonneg=False):
    if key not in table:
        if default is None:
            raise _err(where, f"missing required key {key!r}")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _err(f"{where}.{key}", f"expected a number, got {v!r}")
    v = float(v)
    if positive and not v > 0:
        raise _err(f"{where}.{key}", "must be positive")
    if nonneg and not v >= 0:
        raise _err(f"{where}.{key}", "must be non-negative")
    return v


# --------------------------------------------------------------------------
# building blocks
# --------------------------------------------------------------------------

def parse_coeff(spec: Any, where: str) -> CoeffFunction:
    """Number, ``{t, values, rule}`` table, or ``{builtin = name, ...}``."""
    if isinstance(spec, bool):
        raise _err(where, "expected a number or a table")
    if isinstance(spec, (int, float)):
        return CoeffFunction.constant(float(spec))
    if not isinstance(spec, dict):
        raise _err(where, f"expected a number or a table, got {spec!r}")
    if "builtin" in spec:
        name = spec["builtin"]
        allowed = {"identity": set(), "shift": {"delta"}, "lag": {"tau"}, "step": {"at", "left", "right"},
                   "phi": {"t0"}, "inverse-linear": {"t0"}, "scaled": {"base", "factor"}}
        if name not in allowed:
            raise _err(f"{where}.builtin", f"unknown builtin {name!r}; allowed: {', '.join(allowed)}")
        _check_keys(spec, allowed[name] | {"builtin"}, where)
        params = {}
        for key in sorted(allowed[name]):
            if key == "tau" or key == "base":
                if key not in spec:
                    raise _err(where, f"missing required key {key!r}")
                params[key] = parse_coeff(spec[key], f"{where}.{key}")
            else:
                params[key] = _num(spec, key, where)
        return CoeffFunction.builtin(name, **params)
    if "t" in spec or "values" in spec:
        _check_keys(spec, {"t", "values", "rule"}, where)
        try:
            return CoeffFunction.table(spec.get("t", []), spec.get("values", []), spec.get("rule", "linear"))
        except (ModelError, ValueError, TypeError) as exc:
            raise _err(where, str(exc)) from None
    raise _err(where, "a coefficient table needs either 'builtin' or 't'/'values'")


def parse_G(spec: Any, kappa: float | None, where: str):
    """Returns ``(G, kappa)``; the power family takes ``kappa`` from the model."""
    _check_keys(spec, {"kind", "p", "beta", "n", "slope"}, where)
    kind = spec.get("kind", "power")
    if kind == "power":
        _check_keys(spec, {"kind", "p"}, where)
        if kappa is None:
            raise _err(where, "the power family needs model.kappa")
        return make_power_monostable(_num(spec, "p", where, positive=True), kappa), kappa
    if kind == "nicholson":
        _check_keys(spec, {"kind", "beta"}, where)
        return make_nicholson(_num(spec, "beta", where))
    if kind == "mackey-glass":
        _check_keys(spec, {"kind", "beta", "n"}, where)
        return make_mackey_glass(_num(spec, "beta", where), _num(spec, "n", where))
    if kind == "linear":
        _check_keys(spec, {"kind", "slope"}, where)
        slope = _num(spec, "slope", where, positive=True)

        def G(s):
            return slope * abs(s)

        G.label = f"linear(slope={slope:g})"
        if kappa is None:
            raise _err(where, "the linear family needs model.kappa")
        return G, kappa
    raise _err(f"{where}.kind", f"unknown G family {kind!r}; allowed: power, nicholson, mackey-glass, linear")


def parse_kernel(spec: Any, where: str) -> DiscreteKernel:
    _check_keys(spec, {"offsets", "masses", "slice_times"}, where)
    if "offsets" not in spec or "masses" not in spec:
        raise _err(where, "kernel needs 'offsets' and 'masses'")
    try:
        return DiscreteKernel(spec["offsets"], spec["masses"], spec.get("slice_times"))
    except (ModelError, ValueError, TypeError) as exc:
        raise _err(where, str(exc)) from None


# --------------------------------------------------------------------------
# scenario
# --------------------------------------------------------------------------

MODEL_KEYS = {
    "delay-G": {"id", "kappa", "G", "tau"},
    "wavefront": {"id", "kappa", "G", "wave_speed", "r"},
    "logistic": {"id", "kappa", "g0", "nu", "kernel", "lam_exp", "horizon"},
    "deviating-general": {"id", "kappa", "p0", "mu0", "p1", "mu1", "nu", "h", "G"},
}
SOLVE_KEYS = {"h", "a_sequence", "compact_window", "cauchy_tol", "shoot_tol", "shoot_max_iter",
              "forward_horizon"}
CHECK_KEYS = {"theorems", "window", "grid_step", "sharpen", "forward"}
VERIFY_KEYS = {"window", "require", "band_tol", "monotone_tol", "tail_fraction", "window_fraction",
               "spread_rel", "slope_tol", "limit_rel", "noise_rel"}
OUTPUT_KEYS = {"trajectory", "report", "check_report", "verify_report", "table"}
SWEEP_KEYS = {"parameter", "values"}


@dataclass
class CheckSpec:
    theorems: list[str] = field(default_factory=list)
    window: float = 40.0
    grid_step: float = 1e-2
    sharpen: bool = False
    forward: float | None = None


@dataclass
class VerifySpec:
    window: float = 40.0
    require: list[str] = field(default_factory=lambda: ["bounds"])
    thresholds: VerifyThresholds = field(default_factory=VerifyThresholds)


@dataclass
class Outputs:
    trajectory: str = "trajectory.csv"
    report: str = "report.json"
    check_report: str = "check.json"
    verify_report: str = "verify.json"
    table: str = "sweep.csv"


@dataclass
class Scenario:
    name: str
    raw: dict
    model_id: str
    t0: float
    c: float
    solve: SolveConfig
    check: CheckSpec
    verify: VerifySpec
    outputs: Outputs
    sweep: dict | None = None

    def equation(self) -> Equation:
        return build_equation(self.raw["model"], self.t0, self.c, "model")


def build_equation(model: dict, t0: float, c: float, where: str = "model") -> Equation:
    mid = model.get("id")
    if mid not in MODEL_IDS:
        raise _err(f"{where}.id", f"unknown model id {mid!r}; expected one of {', '.join(MODEL_IDS)}")
    _check_keys(model, MODEL_KEYS[mid], where)
    kappa = _num(model, "kappa", where, positive=True)
    if not 0 <= c <= kappa:
        raise _err("anchor.c", f"c={c:g} must lie in [0, kappa={kappa:g}]")
    try:
        if mid == "delay-G":
            G, kappa = parse_G(model.get("G", {}), kappa, f"{where}.G")
            if "tau" not in model:
                raise _err(where, "missing required key 'tau'")
            tau = parse_coeff(model["tau"], f"{where}.tau")
            return make_delay_eq(G, tau, t0, c, kappa)
        if mid == "wavefront":
            G, kappa = parse_G(model.get("G", {}), kappa, f"{where}.G")
            return make_wavefront(G, _num(model, "wave_speed", where, positive=True),
                                  _num(model, "r", where, positive=True), t0, c, kappa)
        if mid == "logistic":
            for key in ("g0", "nu", "kernel"):
                if key not in model:
                    raise _err(where, f"missing required key {key!r}")
            return make_logistic(parse_coeff(model["g0"], f"{where}.g0"), parse_coeff(model["nu"], f"{where}.nu"),
                                 parse_kernel(model["kernel"], f"{where}.kernel"), kappa,
                                 _num(model, "lam_exp", where, 1.0, positive=True), t0, c,
                                 horizon=_num(model, "horizon", where, 200.0, positive=True))
        # deviating-general
        coeffs = {}
        for key in ("p0", "mu0", "p1", "mu1"):
            if key not in model:
                raise _err(where, f"missing required key {key!r}")
            coeffs[key] = parse_coeff(model[key], f"{where}.{key}")
        nu = parse_coeff(model.get("nu", {"builtin": "identity"}), f"{where}.nu")
        h_kind = model.get("h", "zero")
        if h_kind == "zero":
            if "G" in model:
                raise _err(f"{where}.G", "G is only used with h = 'G-reduction'")
            return make_deviating(coeffs["p0"], coeffs["mu0"], coeffs["p1"], coeffs["mu1"], None, nu, t0, c, kappa)
        if h_kind == "G-reduction":
            G, kappa = parse_G(model.get("G", {}), kappa, f"{where}.G")
            q0 = make_q0(G, 4.0 * kappa)
            return make_deviating(coeffs["p0"], coeffs["mu0"], coeffs["p1"], coeffs["mu1"],
                                  G_reduction_h(G, coeffs["p0"]), nu, t0, c, kappa,
                                  q=lambda t, rho: q0(rho),
                                  minorant=(CoeffFunction.constant(1.0), lambda x, y: G(y) - y),
                                  label="G(|y|) - p0 y", params={"G": G, "q0": q0})
        raise _err(f"{where}.h", f"unknown h family {h_kind!r}; allowed: zero, G-reduction")
    except ModelError as exc:
        raise _err(where, str(exc)) from None


def _parse_solve(table: dict, t0: float) -> SolveConfig:
    _check_keys(table, SOLVE_KEYS, "solve")
    kw = {}
    for key in ("h", "compact_window", "cauchy_tol", "shoot_tol"):
        if key in table:
            v = table[key]
            if isinstance(v, str) and v.lower() == "inf":
                v = math.inf
            kw[key] = _num({key: v}, key, "solve", positive=True)
    if "shoot_max_iter" in table:
        kw["shoot_max_iter"] = int(_num(table, "shoot_max_iter", "solve", positive=True))
    if "forward_horizon" in table:
        b = _num(table, "forward_horizon", "solve")
        if not b > t0:
            raise _err("solve.forward_horizon", "must exceed anchor.t0")
        kw["forward_horizon"] = b
    if "a_sequence" in table:
        seq = table["a_sequence"]
        if not isinstance(seq, list) or not seq:
            raise _err("solve.a_sequence", "expected a non-empty list of numbers")
        kw["a_sequence"] = tuple(_num({"a": a}, "a", "solve.a_sequence") for a in seq)
        if any(a >= t0 for a in kw["a_sequence"]):
            raise _err("solve.a_sequence", "every truncation point must lie left of anchor.t0")
    try:
        return SolveConfig(**kw)
    except ValueError as exc:
        raise _err("solve", str(exc)) from None


def parse_scenario(raw: dict, name: str = "scenario") -> Scenario:
    """Validate a parsed TOML document and build a :class:`Scenario`."""
    _check_keys(raw, {"model", "anchor", "solve", "check", "verify", "outputs", "sweep"}, name)
    if "model" not in raw:
        raise _err(name, "missing [model] section")
    anchor = raw.get("anchor", {})
    _check_keys(anchor, {"t0", "c"}, "anchor")
    t0 = _num(anchor, "t0", "anchor", 0.0)
    c = _num(anchor, "c", "anchor", nonneg=True)
    build_equation(raw["model"], t0, c)  # validates the model section
    solve = _parse_solve(raw.get("solve", {}), t0)

    chk = raw.get("check", {})
    _check_keys(chk, CHECK_KEYS, "check")
    theorems = chk.get("theorems", [])
    if not isinstance(theorems, list) or any(t not in THEOREMS for t in theorems):
        raise _err("check.theorems", f"expected a list drawn from {', '.join(THEOREMS)}")
    check = CheckSpec(list(theorems), _num(chk, "window", "check", 40.0, positive=True),
                      _num(chk, "grid_step", "check", 1e-2, positive=True), bool(chk.get("sharpen", False)),
                      _num(chk, "forward", "check", positive=True) if "forward" in chk else None)

    ver = raw.get("verify", {})
    _check_keys(ver, VERIFY_KEYS, "verify")
    require = ver.get("require", ["bounds"])
    if not isinstance(require, list) or any(r not in PROPERTY_FLAGS for r in require):
        raise _err("verify.require", f"expected a list drawn from {', '.join(PROPERTY_FLAGS)}")
    defaults = VerifyThresholds()
    thr = VerifyThresholds(**{k: _num(ver, k, "verify", getattr(defaults, k), positive=True)
                              for k in defaults.__dataclass_fields__})
    verify = VerifySpec(_num(ver, "window", "verify", 40.0, positive=True), list(require), thr)

    out = raw.get("outputs", {})
    _check_keys(out, OUTPUT_KEYS, "outputs")
    for k, v in out.items():
        if not isinstance(v, str) or not v or "/" in v or "\\" in v:
            raise _err(f"outputs.{k}", "expected a plain file name")
    outputs = Outputs(**out)

    sweep = raw.get("sweep")
    if sweep is not None:
        _check_keys(sweep, SWEEP_KEYS, "sweep")
        if "parameter" not in sweep or not isinstance(sweep.get("values", []), list):
            raise _err("sweep", "needs 'parameter' (dotted path) and a 'values' list")
    return Scenario(name, raw, raw["model"]["id"], t0, c, solve, check, verify, outputs, sweep)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario ({exc.strerror})") from None
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    try:
        return parse_scenario(raw, path.stem)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def with_override(scn: Scenario, dotted: str, value) -> Scenario:
    """Copy of ``scn`` with the scalar at ``dotted`` (e.g. ``model.tau``) replaced."""
    raw = copy.deepcopy(scn.raw)
    raw.pop("sweep", None)
    node = raw
    keys = dotted.split(".")
    for k in keys[:-1]:
        if not isinstance(node, dict) or k not in node:
            raise ScenarioError(f"sweep.parameter: {dotted!r} does not address a scenario field")
        node = node[k]
    leaf = keys[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ScenarioError(f"sweep.parameter: {dotted!r} does not address a scenario field")
    if isinstance(node[leaf], (dict, list)) or isinstance(node[leaf], bool):
        raise ScenarioError(f"sweep.parameter: {dotted!r} is not a scalar")
    node[leaf] = value
    return parse_scenario(raw, scn.name)
