"""Shadowing a noisy orbit that passes the saddle of a double well.

The double-well gradient flow has two stable wells and a saddle between
them.  A true orbit enters the saddle along its stable manifold and leaves
along the unstable one; we perturb it by d = 1e-6, build the
stable/unstable frame along the window, and refine the pseudo-orbit into a
true orbit.  The certificate reports the distance bound L* d next to the
measured error.  Larger defects are rejected with the certified radius d0.
"""
from shadowlab import make_system, shadow_pseudo_orbit
from shadowlab.errors import HypothesisError
from shadowlab.orbits import generate_noisy, saddle_crossing

F = make_system("double_well_gradient", {"dimension": 2, "h": 0.5, "bend": 0.5, "tol": 1e-11})
base = saddle_crossing(F, 64)

for d in (1e-6, 1e-5, 1e-4):
    orbit = generate_noisy(F, base, d, seed=0)
    try:
        cert = shadow_pseudo_orbit(F, orbit, unstable_dim=1, mu=0.3)
    except HypothesisError as exc:
        print(f"d = {d:g}: rejected, {exc}")
        continue
    c = cert.constants
    print(f"d = {orbit.defect:.3e}: power N = {c.N}, M = {c.M:.3g}, N1 = {c.N1:.3g}, "
          f"d0 = {cert.d0:.3e}")
    print(f"    measured sup error {cert.measured_sup_error:.3e} <= L* d = {cert.bound:.3e}"
          f"   residual {cert.orbit_residual:.1e}, {cert.iterations} contraction steps")
