import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdelab.core import (IDENTITY, CoeffFunction, DelayTerm, DiscreteKernel, DistributedTerm, Equation,
                         ModelError, PointwiseH, Trajectory, ZeroNonlinearity, eval_distributed, eval_rhs,
                         logistic_transform, psi_clamp, theta_eval)
from fdelab.models import make_delay_eq, make_power_monostable

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


# -- CoeffFunction -----------------------------------------------------------

def test_constant_coefficient_scalar_and_array():
    c = CoeffFunction.constant(2.5)
    assert c(-7.0) == 2.5
    assert np.array_equal(c(np.array([0.0, 1.0])), [2.5, 2.5])


def test_table_extends_constantly():
    f = CoeffFunction.table([0.0, 1.0, 2.0], [1.0, 3.0, 2.0])
    assert f(-10.0) == 1.0
    assert f(10.0) == 2.0
    assert f(0.5) == pytest.approx(2.0)
    assert np.allclose(f(np.array([-1.0, 0.5, 1.5, 9.0])), [1.0, 2.0, 2.5, 2.0])


def test_table_step_rule():
    f = CoeffFunction.table([0.0, 1.0], [1.0, 3.0], rule="step")
    assert f(0.999) == 1.0
    assert f(1.0) == 3.0
    assert f(-4.0) == 1.0


@pytest.mark.parametrize("t, v", [([0.0, 0.0], [1.0, 2.0]), ([1.0, 0.0], [1.0, 2.0]), ([0.0], [1.0, 2.0])])
def test_table_rejects_bad_abscissae(t, v):
    with pytest.raises(ModelError):
        CoeffFunction.table(t, v)


def test_unknown_builtin():
    with pytest.raises(ModelError):
        CoeffFunction.builtin("nope")


@given(finite)
def test_scalar_and_array_table_paths_agree(s):
    f = CoeffFunction.table([-3.0, 0.0, 2.0, 5.0], [0.5, -1.0, 4.0, 4.5])
    assert f(s) == pytest.approx(float(f(np.array([s]))[0]), abs=1e-12)


# -- Trajectory and theta ----------------------------------------------------

def test_theta_constant_extension_left():
    assert theta_eval(Trajectory.constant(5.0, 0.0, 1.0), -3.0) == 5.0


def test_theta_identity_right_end():
    t = np.linspace(0.0, 1.0, 11)
    traj = Trajectory(t, t, np.ones_like(t))
    assert theta_eval(traj, 2.0) == 1.0


def test_theta_dense_output_sin():
    t = np.linspace(0.0, math.pi, 401)
    traj = Trajectory(t, np.sin(t), np.cos(t))
    off = np.linspace(0.003, math.pi - 0.003, 97)
    assert theta_eval(traj, math.pi / 2) == pytest.approx(1.0, abs=1e-6)
    assert np.max(np.abs(traj(off) - np.sin(off))) < 1e-6


def test_trajectory_knots_exact_and_derivative_convention():
    t = np.array([0.0, 0.5, 1.0])
    traj = Trajectory(t, [1.0, 2.0, 0.0], [3.0, -1.0, 4.0])
    assert np.array_equal(traj(t), [1.0, 2.0, 0.0])
    assert traj.derivative(0.5) == -1.0
    assert traj.derivative(7.0) == 0.0


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0], [1.0, 1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        Trajectory([], [], [])


@given(st.lists(finite, min_size=1, max_size=5), st.floats(min_value=1e-3, max_value=1e3))
def test_theta_idempotent_beyond_domain(values, gap):
    t = np.arange(len(values), dtype=float)
    traj = Trajectory(t, values, np.zeros(len(values)))
    assert theta_eval(traj, traj.a - gap) == values[0]
    assert theta_eval(traj, traj.b + gap) == values[-1]
    assert theta_eval(traj, traj.a - 2 * gap) == theta_eval(traj, traj.a - gap)


# -- psi ---------------------------------------------------------------------

@pytest.mark.parametrize("x, expected", [(1.5, 1.0), (-0.2, 0.0), (0.37, 0.37)])
def test_psi_examples(x, expected):
    assert psi_clamp(x, 1.0) == expected


def test_psi_rejects_nonpositive_kappa():
    with pytest.raises(ValueError):
        psi_clamp(0.5, 0.0)


@given(finite, st.floats(min_value=1e-6, max_value=1e6))
def test_psi_band_and_identity_inside(x, kappa):
    y = psi_clamp(x, kappa)
    assert 0.0 <= y <= kappa
    if 0.0 <= x <= kappa:
        assert y == x
    assert psi_clamp(np.array([x]), kappa)[0] == y


# -- right-hand side ---------------------------------------------------------

def _balanced(c=0.0):
    return Equation((DelayTerm(1.0, CoeffFunction.builtin("shift", delta=1.0)),), (DelayTerm(1.0, IDENTITY),),
                    ZeroNonlinearity(), 1.0, 0.0, c)


@given(st.floats(min_value=0.0, max_value=10.0), st.floats(min_value=-50, max_value=50))
def test_balanced_terms_vanish_on_constants(c, t):
    assert eval_rhs(_balanced(), Trajectory.constant(c, -100.0, 100.0), t) == 0.0


def test_delay_model_rhs_examples():
    G = make_power_monostable(1.0, 1.0)
    eq = make_delay_eq(G, 0.25)
    assert eval_rhs(eq, Trajectory.constant(1.0, -10.0, 10.0), -1.0) == pytest.approx(0.0, abs=1e-15)
    assert eval_rhs(eq, Trajectory.constant(0.5, -10.0, 10.0), -1.0) == pytest.approx(0.25, abs=1e-15)


def test_forward_deviation_is_a_model_error():
    eq = Equation((DelayTerm(1.0, CoeffFunction.builtin("shift", delta=-0.5)),), (), ZeroNonlinearity(), 1.0)
    with pytest.raises(ModelError):
        eval_rhs(eq, Trajectory.constant(1.0, 0.0, 1.0), 0.0)


def test_negative_coefficient_is_rejected():
    eq = Equation((DelayTerm(-1.0, IDENTITY),), (), ZeroNonlinearity(), 1.0)
    with pytest.raises(ModelError):
        eval_rhs(eq, Trajectory.constant(1.0, 0.0, 1.0), 0.0)


def test_clamp_applies_to_f_only():
    # u' = u(t) + h with h(t, x, y) = x: clamping changes only the h part
    f = PointwiseH(lambda t, x, y: x)
    eq = Equation((DelayTerm(1.0, IDENTITY),), (), f, 1.0)
    traj = Trajectory.constant(3.0, -1.0, 1.0)
    assert eval_rhs(eq, traj, 0.0) == 6.0
    assert eval_rhs(eq, traj, 0.0, clamped=True) == 4.0


# -- distributed terms -------------------------------------------------------

def _term(kernel, delta=2.0):
    return DistributedTerm(CoeffFunction.builtin("shift", delta=delta), kernel)


@given(st.floats(min_value=0.1, max_value=10.0), st.floats(min_value=0.1, max_value=5.0))
def test_distributed_vanishes_at_kappa(kappa, lam):
    kern = DiscreteKernel([0.0, 0.5, 1.5], [0.2, 1.0, 0.3])
    traj = Trajectory.constant(kappa, -10.0, 10.0)
    assert eval_distributed(_term(kern), traj, 1.0, kappa, lam) == 0.0


def test_distributed_zero_trajectory_gives_total_mass():
    kern = DiscreteKernel([0.0, 1.0], [1.5, 0.5])
    assert eval_distributed(_term(kern), Trajectory.constant(0.0, -5.0, 5.0), 0.0, 1.0, 3.7) == 2.0


def test_distributed_half_kappa_squared():
    kern = DiscreteKernel.point(1.0)
    assert eval_distributed(_term(kern), Trajectory.constant(0.5, -5.0, 5.0), 0.0, 1.0, 2.0) == 0.25


def test_kernel_rejects_negative_mass_and_future_nodes():
    with pytest.raises(ModelError):
        DiscreteKernel([1.0], [-0.1])
    with pytest.raises(ModelError):
        DiscreteKernel([-1.0], [0.1])


def test_kernel_nodes_must_stay_above_lower_limit():
    term = _term(DiscreteKernel.point(3.0), delta=2.0)
    with pytest.raises(ModelError):
        eval_distributed(term, Trajectory.constant(0.5, -5.0, 5.0), 0.0, 1.0, 1.0)
    with pytest.raises(ModelError):
        term.nodes(0.0)


def test_kernel_slices_interpolate():
    kern = DiscreteKernel([0.5], [[1.0], [3.0]], slice_times=[0.0, 2.0])
    assert kern.total_mass(1.0) == pytest.approx(2.0)
    assert kern.total_mass(-5.0) == 1.0
    assert kern.total_mass(5.0) == 3.0


def test_density_kernel_mass_within_declared_accuracy():
    kern = DiscreteKernel.from_density(lambda th: np.exp(-th), 2.0, 32)
    exact = 1.0 - math.exp(-2.0)
    assert abs(kern.total_mass(0.0) - exact) <= max(kern.accuracy * 10, 1e-12)
    term = DistributedTerm(CoeffFunction.builtin("shift", delta=2.0), kern, "identity")
    ones = eval_distributed(term, Trajectory.constant(1.0, -5.0, 5.0), 0.0, 1.0, 1.0)
    assert ones == pytest.approx(kern.total_mass(0.0), abs=1e-14)


@given(st.floats(min_value=-3.0, max_value=5.0), st.floats(min_value=0.2, max_value=3.0))
def test_logistic_transform_scalar_matches_array(x, lam):
    assert logistic_transform(x, 2.0, lam) == pytest.approx(float(logistic_transform(np.array([x]), 2.0, lam)[0]))


@settings(max_examples=50)
@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=3, max_size=12), st.floats(min_value=-5, max_value=5))
def test_linear_terms_nonnegative_on_nonnegative_trajectories(vals, t):
    knots = np.linspace(-10.0, 10.0, len(vals))
    traj = Trajectory.from_samples(knots, vals, np.zeros(len(vals)))
    term = DelayTerm(CoeffFunction.constant(0.7), CoeffFunction.builtin("shift", delta=0.3))
    assert term(t, traj) >= 0.0
    G = make_power_monostable(1.0, 1.0)
    eq = make_delay_eq(G, 0.25)
    lookup = lambda s: traj(s)  # noqa: E731
    assert eq.f(min(t, 0.0), traj(min(t, 0.0)), lookup, 1.0) >= -1e-15
