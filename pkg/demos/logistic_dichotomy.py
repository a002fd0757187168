"""Hutchinson's equation u' = u (1 - u(t - r)) from the left half-line.

Written as the generalized logistic equation with a unit point mass r time
units in the past. For each delay r we construct the solution with
u(-inf) = 0 and u(0) = 0.3, follow it to t = 100 and classify the right end:
it either settles at 1 or keeps oscillating around it. For delays above
1/e the approach to 1 is oscillatory, so the last quarter of the run still
crosses 1; beyond r = pi / 2 the oscillation no longer decays.

Run with ``python demos/logistic_dichotomy.py``.
"""
from fdelab import SolveConfig, extend_forward, limit_scheme, make_logistic
from fdelab.analysis import classify_right_end, verify_monotone
from fdelab.core import CoeffFunction, DiscreteKernel
from fdelab.models import raw_equation

cfg = SolveConfig(h=0.01, a_sequence=(-40.0, -60.0, -80.0), cauchy_tol=1e-6)

print(" delay  left monotone  right end               crossings  tail mean")
for r in (0.3, 1.0, 1.4, 1.8):
    eq = make_logistic(1.0, CoeffFunction.builtin("shift", delta=r), DiscreteKernel.point(r),
                       kappa=1.0, lam_exp=1.0, t0=0.0, c=0.3)
    res = limit_scheme(eq, cfg)
    traj = extend_forward(res, raw_equation(eq), 100.0)
    mono = verify_monotone(traj, span=(-40.0, 0.0))
    end = classify_right_end(traj, 1.0, span=(0.0, 100.0))
    print(f"  {r:4.1f}  {str(mono.passed):<13}  {end.kind:<22}  {end.crossings:9d}  {end.estimate:.6f}")
