"""How far the admissible anchor interval reaches, and what sharpening buys.

For the delay equation the anchor value must not exceed kappa exp(-M), and
M grows with the delay. For the general comparison argument the exponent
e in exp(e * int p1) can be replaced by the smaller fixed point of
lam = exp(lam p*), which shrinks M and widens the interval.

Run with ``python demos/anchor_interval.py``.
"""
import math

from fdelab import admissible_c_interval, lambda_fixed_point, make_delay_eq, make_power_monostable
from fdelab.conditions import compute_M_mu, theorem_verdict
from fdelab.core import CoeffFunction

G = make_power_monostable(1.0, 1.0)
print("delay tau -> admissible c for the delay equation")
for tau in (0.05, 0.1, 0.25, 0.5, 1.0):
    verdict = theorem_verdict(make_delay_eq(G, tau, c=0.1), "T6.1", 40.0)
    print(f"  tau = {tau:4.2f}: {verdict.c_interval}   (exp(-tau) = {math.exp(-tau):.6f})")

print("\nmemory p* -> comparison exponent")
for p in (0.0, 0.05, 0.1, 0.2, 0.3, 1 / math.e):
    print(f"  p* = {p:.4f}: lambda* = {lambda_fixed_point(p):.12f}")

# p1 = 0.2 with memory t - 1, mu0 = t - 0.5: compare M with e and with lambda*
p1 = CoeffFunction.constant(0.2)
mu0, mu1 = CoeffFunction.builtin("shift", delta=0.5), CoeffFunction.builtin("shift", delta=1.0)
lam = lambda_fixed_point(0.2)
print()
for name, rate in (("e", math.e), ("lambda*", lam)):
    M = compute_M_mu(p1, mu0, mu1, 0.0, 10.0, rate, 0.05)
    print(f"exponent {name:<8}: M = {M:.6f}, interval {admissible_c_interval('T2.5', 1.0, M)}")
