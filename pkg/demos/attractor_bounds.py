"""Distance from noisy orbits to the double-well attractor.

The attractor of the double-well flow is the unstable manifold of the
saddle joined to the two wells.  We trace it, fit the exponential
attraction profile dist(F^n(U), A) <= C e^(-gamma n) on the working
region, and turn (C, gamma, L1) into the Hoelder bound C2 d^alpha on how
far a d-pseudo-orbit can stray from the attractor.  Noisy iterations
started on the attractor are then measured against the bound.
"""
import numpy as np

from shadowlab import distance_bound, exp_attraction_estimate, make_system
from shadowlab.orbits import distance_to_polyline, noisy_iteration, unstable_manifold_curve

F = make_system("double_well_gradient", {"dimension": 2, "h": 0.5, "bend": 0.5, "tol": 1e-11})
curve = unstable_manifold_curve(F)
profile = exp_attraction_estimate(F, curve)
print(f"attraction profile: C = {profile.C:.3f}, gamma = {profile.gamma:.3f}, "
      f"L1 = {profile.L1:.3f} (fit residual {profile.fit_residual:.2f})")

rng = np.random.default_rng(0)
for d in (1e-3, 1e-4, 1e-5):
    hb = distance_bound(profile, d)
    worst = 0.0
    for seed in range(10):
        x0 = curve[rng.integers(curve.shape[0])]
        orbit = noisy_iteration(F, x0, 60, d, seed=seed)
        worst = max(worst, float(np.max(distance_to_polyline(orbit.states, curve))))
    print(f"d = {d:g}: regime {hb.regime}, alpha = {hb.alpha:.4f}, C2 = {hb.C2:.2f}, "
          f"bound {hb.value:.3e}, worst measured distance {worst:.3e}")
