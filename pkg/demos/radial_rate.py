"""Attraction rate of the radial flow towards the sphere rho = 2.

The radial vector field rho' = -(1 - rho^2)^3 (2 - rho) rho has
equilibria 0, 1 and 2.  Linearising at rho = 2 gives the multiplier
f'(2) = -54, so orbits starting outside the sphere should approach it at
least as fast as e^(-54 t).  This script iterates the time-h map from
rho = 3, compares the distance to the envelope and then checks the
hyperbolicity report of the three equilibria.
"""
import numpy as np

from shadowlab import find_fixed_point, hyperbolicity_check, make_system

h = 0.005
F = make_system("radial", {"dimension": 1, "h": h})

rho = F.iterate(np.array([3.0]), 100)[:, 0]
t = h * np.arange(rho.size)
ratio = (rho - 2.0) / np.exp(-54.0 * t)
print(f"max (rho - 2) e^(54 t) over t <= 0.5: {ratio.max():.6f}  (envelope allows 1)")
for k in (0, 10, 20, 50, 100):
    print(f"  t = {t[k]:.3f}   rho - 2 = {rho[k] - 2:.3e}   envelope = {np.exp(-54 * t[k]):.3e}")

print("\nequilibria of the time-0.1 map")
G = make_system("radial", {"dimension": 1, "h": 0.1})
for seed in (0.0, 1.0, 2.0):
    x = find_fixed_point(G, np.array([seed]))
    rep = hyperbolicity_check(G, x)
    mult = np.abs(rep.jacobian_spectrum).max()
    print(f"  rho* = {x[0]:.6f}  hyperbolic = {rep.hyperbolic}  |multiplier| = {mult:.6g}")
print(f"expected multiplier at rho* = 2: e^(-54 h) = {np.exp(-5.4):.6g}")
