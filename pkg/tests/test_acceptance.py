"""Acceptance criteria, one test per criterion.

Each test records a one-line PASS/FAIL summary before asserting; the lines
are printed in the "acceptance criteria" section of the pytest summary.
"""
import math
import time

import numpy as np
import pytest

from shadowlab import (PseudoOrbit, SmoothMap, Subspace, assemble_constants, build_splitting,
                       contraction_solve, distance_bound, exp_attraction_estimate,
                       holder_exponent, lift_constant, linear_map, make_system,
                       neighborhood_shadowing_constants, shadow_pseudo_orbit,
                       subsample_constants, verify_splitting)
from shadowlab.bounds import holder_alpha
from shadowlab.core import AttractionProfile, Box
from shadowlab.errors import HypothesisError
from shadowlab.experiment import ExperimentConfig, run_experiment
from shadowlab.orbits import (distance_to_polyline, generate_noisy, noisy_iteration,
                              saddle_crossing, unstable_manifold_curve)
from shadowlab.subspace import (composition_identity, oblique_matrix, orthogonal_projector,
                                projection_norm_bound, projector_composition_norm,
                                random_subspace, splitting_inclination, subspace_gap)

from conftest import newton_shadow, record_criterion

D_VALUES = [1e-3, 1e-4, 1e-5, 1e-6]


# ---------------------------------------------------------------- 1

def test_criterion_1_radial_rate():
    t0 = time.perf_counter()
    h = 0.005
    F = make_system("radial", {"dimension": 1, "h": h})
    rho = F.iterate(np.array([3.0]), 100)[:, 0]
    t = h * np.arange(rho.size)
    envelope = (3.0 - 2.0) * np.exp(-54.0 * t)
    violations = int(np.sum(rho - 2.0 > envelope * (1 + 1e-12)))
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 1.0
    record_criterion(1, ok, f"{violations} violations of rho-2 <= e^(-54t) on t <= 0.5, "
                            f"{elapsed:.2f} s")
    assert violations == 0
    assert elapsed < 1.0


# ---------------------------------------------------------------- 2

def _scaling_runs(F, base, u, mu):
    rows = []
    for d in D_VALUES:
        orbit = generate_noisy(F, base, d, seed=0)
        cert = shadow_pseudo_orbit(F, orbit, u, mu)
        rows.append((orbit.defect, cert.measured_sup_error, cert.L_star * orbit.defect))
    slope = float(np.polyfit(np.log([r[0] for r in rows]), np.log([r[1] for r in rows]), 1)[0])
    return slope, rows


_scaling_state = {}


def _record_scaling():
    parts, ok = [], True
    for name in ("linear_diag", "double_well"):
        if name in _scaling_state:
            good, text = _scaling_state[name]
            ok &= good
            parts.append(text)
    if len(parts) == 2:
        record_criterion(2, ok, "; ".join(parts))


def test_criterion_2_lipschitz_scaling_linear():
    t0 = time.perf_counter()
    F = make_system("linear_diag", {"diag": [0.5, 2.0]})
    slope, rows = _scaling_runs(F, np.zeros((60, 2)), 1, 0.5)
    elapsed = time.perf_counter() - t0
    bounded = all(err <= bound for _, err, bound in rows)
    ok = 0.9 <= slope <= 1.1 and bounded and elapsed < 30
    _scaling_state["linear_diag"] = (ok, f"linear_diag slope {slope:.4f}, "
                                         f"errors within L*d: {bounded}, {elapsed:.1f} s")
    _record_scaling()
    assert 0.9 <= slope <= 1.1
    assert bounded
    assert elapsed < 30


@pytest.mark.xfail(strict=True, raises=HypothesisError,
                   reason="certified radius d0 of the double-well crossing is about 1.3e-5, "
                          "so d = 1e-3 and 1e-4 are rejected by the d <= d0 gate")
def test_criterion_2_lipschitz_scaling_double_well(double_well, crossing):
    t0 = time.perf_counter()
    try:
        slope, rows = _scaling_runs(double_well, crossing, 1, 0.3)
    except HypothesisError as exc:
        _scaling_state["double_well"] = (False, f"double-well rejected: {exc}")
        _record_scaling()
        raise
    elapsed = time.perf_counter() - t0
    bounded = all(err <= bound for _, err, bound in rows)
    ok = 0.9 <= slope <= 1.1 and bounded and elapsed < 30
    _scaling_state["double_well"] = (ok, f"double-well slope {slope:.4f}, "
                                         f"errors within L*d: {bounded}, {elapsed:.1f} s")
    _record_scaling()
    assert 0.9 <= slope <= 1.1
    assert bounded
    assert elapsed < 30


# ---------------------------------------------------------------- 3

def _quadratic_instance(seed, n=4, u=2):
    rng = np.random.default_rng(seed)
    lam = np.concatenate([rng.uniform(0.2, 0.6, n - u), rng.uniform(1.7, 3.0, u)])
    lam *= rng.choice([-1.0, 1.0], n)
    Q = np.eye(n) + 0.3 * rng.standard_normal((n, n))
    A = Q @ np.diag(lam) @ np.linalg.inv(Q)
    B = 0.2 * rng.standard_normal((n, n, n))

    def evaluate(x):
        return A @ x + np.einsum("ijk,j,k->i", B, x, x)

    def jacobian(x):
        return A + np.einsum("ijk,k->ij", B, x) + np.einsum("ijk,j->ik", B, x)

    F = SmoothMap(n, evaluate, jacobian, Box.cube(n, 2.0), "quadratic")
    eta = rng.standard_normal((50, n))
    eta /= np.linalg.norm(eta, axis=1)[:, None]
    return F, PseudoOrbit.from_states(F, 1e-6 * eta)


def test_criterion_3_contraction_matches_newton():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        F, orbit = _quadratic_instance(seed)
        frame = build_splitting(F, orbit, 2, 10)
        c = assemble_constants(frame, F, orbit, 0.5, N=1, power_frame=frame, F_N=F,
                               orbit_N=orbit)
        v, _ = contraction_solve(F, orbit, frame, c)
        w = newton_shadow(F, orbit, frame)
        worst = max(worst, float(np.max(np.abs(v - w))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 60
    record_criterion(3, ok, f"worst sup difference {worst:.2e} over 20 instances, "
                            f"{elapsed:.1f} s")
    assert worst <= 1e-10
    assert elapsed < 60


# ---------------------------------------------------------------- 4

def test_criterion_4_constant_formulas():
    profile = AttractionProfile(2.0, math.log(2.0), 2.0, None)
    checks = {
        "distance_bound": (distance_bound(profile, 1e-4).value, 0.05),
        "subsample_constants": (subsample_constants(2, 3), 7.0),
        "lift_constant": (lift_constant(2, 2, 10), 70.0),
    }
    C3, _, C2 = neighborhood_shadowing_constants(5, 2, 10, 0.5, 1.0)
    checks["C2"] = (C2, 16.0)
    checks["C3"] = (C3, 176.0)
    errors = {k: abs(a - b) for k, (a, b) in checks.items()}
    ok = all(e <= 1e-12 for e in errors.values())
    record_criterion(4, ok, "max abs error " + f"{max(errors.values()):.1e}")
    for name, (got, want) in checks.items():
        assert got == pytest.approx(want, abs=1e-12), name


# ---------------------------------------------------------------- 5

def test_criterion_5_holder_exponent_maximality():
    rng = np.random.default_rng(5)
    grid = np.linspace(0.0, 1.0, 10001)
    worst_gap = worst_arg = 0.0
    for _ in range(100):
        gamma = float(rng.uniform(0.01, 5.0))
        L1 = float(rng.uniform(1.01, 10.0))
        beta_star, alpha = holder_exponent(AttractionProfile(1.0, gamma, L1, None))
        values = np.minimum(grid, gamma * (1.0 - grid) / math.log(L1))
        best = int(np.argmax(values))
        worst_gap = max(worst_gap, float(values[best]) - holder_alpha(beta_star, gamma, L1))
        worst_arg = max(worst_arg, abs(float(grid[best]) - beta_star))
        assert alpha == pytest.approx(holder_alpha(beta_star, gamma, L1), rel=1e-12)
    ok = worst_gap <= 1e-12 and worst_arg <= 1e-4
    record_criterion(5, ok, f"grid max exceeds beta* value by {worst_gap:.1e}, "
                            f"argmax within {worst_arg:.1e} of beta*")
    assert worst_gap <= 1e-12
    assert worst_arg <= 1e-4


# ---------------------------------------------------------------- 6

def test_criterion_6_attractor_distance_soundness(double_well):
    t0 = time.perf_counter()
    curve = unstable_manifold_curve(double_well)
    profile = exp_attraction_estimate(double_well, curve)
    rng = np.random.default_rng(6)
    violations, parts = 0, []
    for d in (1e-3, 1e-4, 1e-5):
        bound = distance_bound(profile, d).value
        worst = 0.0
        for seed in range(50):
            x0 = curve[rng.integers(curve.shape[0])]
            orbit = noisy_iteration(double_well, x0, 60, d, seed=seed)
            dist = float(np.max(distance_to_polyline(orbit.states, curve)))
            worst = max(worst, dist)
            violations += dist > bound
        parts.append(f"d={d:g}: worst {worst:.2e} <= bound {bound:.2e}")
    elapsed = time.perf_counter() - t0
    record_criterion(6, violations == 0,
                     f"{violations} violations in 150 runs; " + "; ".join(parts)
                     + f"; {elapsed:.0f} s")
    assert violations == 0


# ---------------------------------------------------------------- 7

def test_criterion_7_projection_calculus():
    rng = np.random.default_rng(7)
    worst_identity = worst_ratio = 0.0
    composition_ok = True
    for i in range(100):
        n = 2 + i % 7
        k = int(rng.integers(1, n))
        S, U = random_subspace(rng, n, k), random_subspace(rng, n, n - k)
        P = oblique_matrix(S, U)
        alt = composition_identity(S, U)
        worst_identity = max(worst_identity,
                             float(np.linalg.norm(P - alt, 2)) / max(1.0, np.linalg.norm(P, 2)))
        comp = float(np.linalg.norm(orthogonal_projector(S) @ orthogonal_projector(U), 2))
        pus = float(np.linalg.norm(np.eye(n) - P, 2))
        composition_ok &= comp < 1 and comp <= math.sqrt(1 - pus**-2) + 1e-8
        assert projector_composition_norm(S, U) == pytest.approx(comp, abs=1e-12)
        M = splitting_inclination(S, U)
        worst_ratio = max(worst_ratio, float(np.linalg.norm(P, 2)) / projection_norm_bound(M))
    ok = worst_identity <= 1e-8 and composition_ok and worst_ratio <= 1 + 1e-8
    record_criterion(7, ok, f"identity error {worst_identity:.1e}, composition bound "
                            f"{'holds' if composition_ok else 'fails'}, "
                            f"max |P_SU| / 2(M+1)^2 = {worst_ratio:.3f}")
    assert worst_identity <= 1e-8
    assert composition_ok
    assert worst_ratio <= 1 + 1e-8


# ---------------------------------------------------------------- 8

def _normal_systems():
    yield np.diag([0.5, 2.0]), 0.5
    yield np.diag([0.3, 0.6, 4.0]), 0.6
    c, s = math.cos(0.7), math.sin(0.7)
    R = np.array([[c, -s], [s, c]])
    yield R @ np.diag([0.25, 3.0]) @ R.T, 1 / 3


def _covariant_oracle(J, k):
    """Unstable direction: a generic vector pushed forward from index 0.
    Stable direction: least-expanded right singular vector of the product
    from index k to the end of the orbit."""
    v = np.random.default_rng(0).standard_normal(J[0].shape[0])
    for A in J[:k]:
        v = A @ v
        v /= np.linalg.norm(v)
    P = np.eye(J[0].shape[0])
    for A in J[k:]:
        P = A @ P
        P /= np.linalg.norm(P, 2)
    _, _, vt = np.linalg.svd(P)
    return vt[-1], v


def test_criterion_8_splitting_verification(double_well):
    exact_err = 0.0
    for A, rate in _normal_systems():
        F = linear_map(A)
        orbit = PseudoOrbit.from_states(F, np.zeros((40, A.shape[0])))
        u = int(np.sum(np.abs(np.linalg.eigvalsh(A)) > 1))
        frame = build_splitting(F, orbit, u, 10)
        rep = verify_splitting(F, orbit, frame)
        exact_err = max(exact_err, abs(rep["C_tilde"] - 1), abs(rep["lambda1"] - rate),
                        abs(rep["M"] - 2))

    window, warmup = slice(192, 256), 10
    X = saddle_crossing(double_well, 320, x1_start=1e-57)
    J = [double_well.jacobian(x) for x in X[:-1]]
    orbit = PseudoOrbit.from_states(double_well, X[window])
    frame = build_splitting(double_well, orbit, 1, warmup, jacobians=J[192:255])
    gaps = []
    for j in range(warmup, orbit.length - warmup):
        s, w = _covariant_oracle(J, 192 + j)
        gaps.append(max(subspace_gap(frame.stable[j], Subspace.span(s)),
                        subspace_gap(frame.unstable[j], Subspace.span(w))))
    gap = max(gaps)
    ok = exact_err <= 1e-9 and gap <= 1e-4
    record_criterion(8, ok, f"normal systems max error {exact_err:.1e}; heteroclinic "
                            f"frame gap {gap:.1e} on indices {warmup}..{orbit.length - warmup - 1}")
    assert exact_err <= 1e-9
    assert gap <= 1e-4


# ---------------------------------------------------------------- 9

def test_criterion_9_determinism(tmp_path):
    reports = []
    for preset, d in (("linear_diag", 1e-4), ("radial", 1e-5)):
        cfg = ExperimentConfig(preset=preset, noise_level=d, seed=2024,
                               output_dir=str(tmp_path / preset))
        first = run_experiment(cfg).deterministic_json()
        second = run_experiment(cfg).deterministic_json()
        reports.append(first == second)
    ok = all(reports)
    record_criterion(9, ok, "two consecutive runs byte-identical (timing excluded) for "
                            "linear_diag and radial")
    assert ok
