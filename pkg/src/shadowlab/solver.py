"""Fixed-point shadowing solver.

A pseudo-orbit z_k of a map psi = F^N is corrected to a true orbit
y_k = z_k + v_k by solving phi_k(v_k) = v_{k+1} with
phi_k(v) = psi(z_k + v) - z_{k+1}.  Writing phi_k = A_k + w_{k+1} with
A_k = D psi(z_k), the correction is the fixed point of
v = G(w(v)) where G is the Green operator of the linear difference
equation v_{k+1} = A_k v_k + g_{k+1} under the exponential dichotomy
given by a stable/unstable frame.
"""
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import lift_constant, subsample_constants
from .core import LIPSCHITZ_SAFETY, SmoothMap, power_map
from .errors import (DivergenceError, HyperbolicityTooWeakError, HypothesisError,
                     NonConvergenceError, NonlinearityTooStrongError, SingularBlockError)
from .splitting import (PseudoOrbit, SplittingFrame, build_splitting, choose_power,
                        orbit_jacobians, subsample)
from .subspace import oblique_matrix

log = logging.getLogger(__name__)

CONTRACTION_TOL = 1e-13
MAX_ITERATIONS = 200
RESIDUAL_TOL = 1e-11
VERIFY_RESIDUAL_TOL = 1e-10
K1_BUDGET = 0.9
SINGULAR_BLOCK = 1e-12


@dataclass(frozen=True)
class SolverConstants:
    mu: float
    nu0: float
    lam: float
    M: float
    K: float
    nu: float
    k1: float
    N1: float
    Delta: float
    d1: float
    L: float
    N: int = 1
    nu_measured: float = 0.0

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ShadowingCertificate:
    refined_states: np.ndarray
    input_defect: float
    bound: float
    measured_sup_error: float
    orbit_residual: float
    iterations: int
    constants: SolverConstants
    valid: bool = True
    L_star: float = 0.0
    C1: float = 1.0
    L1: float = 0.0
    d0: float = 0.0
    subsampled_defect: float = 0.0
    contraction_ratios: tuple = ()
    errors: np.ndarray = field(default=None, repr=False)

    def summary(self):
        return {"valid": self.valid, "input_defect": self.input_defect, "bound": self.bound,
                "measured_sup_error": self.measured_sup_error,
                "orbit_residual": self.orbit_residual, "iterations": self.iterations,
                "L_star": self.L_star, "C1": self.C1, "L1": self.L1, "d0": self.d0,
                "subsampled_defect": self.subsampled_defect}


# ------------------------------------------------------------ constants

def _nu0_for(mu):
    nu0 = 0.5
    while (1 + nu0) * mu >= 1:
        nu0 /= 2
        if nu0 < 1e-15:
            raise HyperbolicityTooWeakError(f"no admissible nu0 for mu={mu}")
    return nu0


def remainder_radius(F_N: SmoothMap, points, jacobians, budget, radius_cap,
                     max_points=8, floor=1e-12):
    """Largest radius r on the grid radius_cap / 2^j such that
    |D psi(z + v) - D psi(z)| <= budget for every probe |v| in {r, r/2}.

    On a ball this bounds the Lipschitz constant of the nonlinear remainder
    psi(z + v) - psi(z) - D psi(z) v by ``budget``.  The search starts at a
    grid radius a few times above a curvature-based guess.
    """
    n = points.shape[1]
    idx = np.unique(np.linspace(0, len(points) - 1, min(max_points, len(points))).astype(int))
    dirs = np.vstack([np.eye(n), -np.eye(n)])

    def passes(r):
        for i in idx:
            z, J = points[i], jacobians[i]
            for scale in (1.0, 0.5):
                for e in dirs:
                    if np.linalg.norm(F_N.jacobian(z + scale * r * e) - J, 2) > budget:
                        return False
        return True

    # curvature guess from a single small probe per point
    probe = min(1e-3, radius_cap / 4)
    curv = max(np.linalg.norm(F_N.jacobian(points[i] + probe * dirs[0]) - jacobians[i], 2)
               for i in idx) / probe
    r = float(radius_cap)
    if curv > 0:
        while r > 8 * budget / curv and r >= floor:
            r /= 2
    while r >= floor:
        if passes(r):
            return r
        r /= 2
    return 0.0


def projector_bound(frame: SplittingFrame) -> float:
    """max_k max(|P_k|, |I - P_k|) for the stable projectors of a frame."""
    n = frame.stable[0].ambient_dim
    P = frame.stable_projectors
    if P is None:
        P = [oblique_matrix(S, U) for S, U in zip(frame.stable, frame.unstable)]
    return float(max(max(np.linalg.norm(p, 2), np.linalg.norm(np.eye(n) - p, 2)) for p in P))


def assemble_constants(frame: SplittingFrame, F: SmoothMap, orbit: PseudoOrbit, mu: float,
                       N=None, power_frame=None, F_N=None, orbit_N=None,
                       jacobians_N=None, seed=0) -> SolverConstants:
    """Constants of the fixed-point argument for the power map F^N.

    ``frame``/``orbit`` describe F on the full window; N defaults to
    ``choose_power``.  The power-map frame and subsampled orbit are built
    here unless supplied.
    """
    if not 0 < mu < 1:
        raise ValueError("mu must lie in (0, 1)")
    if N is None:
        N = choose_power(frame.C_tilde, frame.lambda1, mu)
    if F_N is None:
        F_N = power_map(F, N)
    if orbit_N is None:
        orbit_N = subsample(orbit, F_N, N)
    if jacobians_N is None:
        jacobians_N = [F_N.jacobian(z) for z in orbit_N.states]
    M = max(projector_bound(frame),
            projector_bound(power_frame) if power_frame is not None else 1.0)
    K = max(M, max(np.linalg.norm(J, 2) for J in jacobians_N))
    nu0 = _nu0_for(mu)
    lam = (1 + nu0) * mu
    N1 = M * (1 + lam) / (1 - lam)
    k1 = min(K1_BUDGET / N1, K1_BUDGET * nu0)
    if not k1 > 0 or k1 * N1 >= 1:
        raise HyperbolicityTooWeakError(f"no admissible k1 (N1={N1:.4g})")
    nu = K1_BUDGET * k1 / (2 * K * (2 * K + 1))
    Delta = remainder_radius(F_N, orbit_N.states, jacobians_N, k1 / 2, F.region.radius)
    if Delta < 1e-12:
        raise NonlinearityTooStrongError(f"remainder radius {Delta:.3e} below 1e-12")
    L = N1 / (1 - k1 * N1)
    d1 = Delta / L
    inv = power_frame.invariance_defect if power_frame is not None else frame.invariance_defect
    return SolverConstants(mu, nu0, lam, M, float(K), nu, k1, N1, Delta, d1, L, int(N),
                           float(inv))


# ------------------------------------------------------------ linear solve

def _block_data(A, frame):
    """Restricted matrices and projected forcing maps for the Green sweep."""
    T = len(A)
    npts = frame.length
    n = A[0].shape[0]
    P = frame.stable_projectors
    if P is None:
        P = np.array([oblique_matrix(S, U) for S, U in zip(frame.stable, frame.unstable)])
    Rs, Ru = [], []
    for k in range(T):
        j = (k + 1) % npts
        Bs0, Bu0 = frame.stable[k].basis, frame.unstable[k].basis
        Bs1, Bu1 = frame.stable[j].basis, frame.unstable[j].basis
        Rs.append(Bs1.T @ (P[j] @ (A[k] @ Bs0)))
        Ru.append(Bu1.T @ ((np.eye(n) - P[j]) @ (A[k] @ Bu0)))
    return P, Rs, Ru


def _sweep(A, frame, g, periodic, data):
    P, Rs, Ru = data
    T = len(A)
    npts = frame.length
    n = A[0].shape[0]
    ds = frame.stable[0].dim
    du = n - ds
    cs = [None] * npts
    cu = [None] * npts
    bs = [frame.stable[(k + 1) % npts].basis.T @ (P[(k + 1) % npts] @ g[k]) for k in range(T)]
    bu = [frame.unstable[(k + 1) % npts].basis.T @ (g[k] - P[(k + 1) % npts] @ g[k])
          for k in range(T)]

    # stable part: forward from zero (free) or periodic closure
    c = np.zeros(ds)
    if periodic and ds:
        Phi, p = np.eye(ds), np.zeros(ds)
        for k in range(T):
            Phi, p = Rs[k] @ Phi, Rs[k] @ p + bs[k]
        c = np.linalg.solve(np.eye(ds) - Phi, p)
    cs[0] = c
    for k in range(T if not periodic else T - 1):
        c = Rs[k] @ c + bs[k]
        cs[k + 1] = c

    # unstable part: backward from zero at the right end, or periodic closure
    inv = []
    for k in range(T):
        if du:
            sv = np.linalg.svd(Ru[k], compute_uv=False)
            if sv[-1] < SINGULAR_BLOCK * max(1.0, sv[0]):
                raise SingularBlockError("unstable block is singular", k)
            inv.append(np.linalg.inv(Ru[k]))
        else:
            inv.append(np.zeros((0, 0)))
    c = np.zeros(du)
    if periodic and du:
        Psi, q = np.eye(du), np.zeros(du)
        for k in range(T - 1, -1, -1):
            Psi, q = inv[k] @ Psi, inv[k] @ (q - bu[k])
        c = np.linalg.solve(np.eye(du) - Psi, q)
        cu[0] = c
        for k in range(T - 1, 0, -1):
            c = inv[k] @ (c - bu[k])
            cu[k] = c
    else:
        cu[npts - 1] = c
        for k in range(T - 1, -1, -1):
            c = inv[k] @ (c - bu[k])
            cu[k] = c
    v = np.empty((npts, n))
    for k in range(npts):
        v[k] = frame.stable[k].basis @ cs[k] + frame.unstable[k].basis @ cu[k]
    return v


def _residual(A, v, g, periodic):
    T = len(A)
    npts = v.shape[0]
    return np.array([v[(k + 1) % npts] - A[k] @ v[k] - g[k] for k in range(T)])


def linear_green_solve(A, frame: SplittingFrame, g, boundary_mode="free", refine=3,
                       _data=None):
    """Bounded solution of v_{k+1} = A_k v_k + g_{k+1} on a finite window.

    Free mode fixes the stable component of v_0 and the unstable component of
    v_K to zero; periodic mode closes the loop.  ``g[k]`` is the forcing of
    transition k.  Iterative refinement removes the effect of rounding in
    the invariance of the frame.
    """
    A = [np.asarray(a, dtype=float) for a in A]
    g = np.asarray(g, dtype=float)
    periodic = boundary_mode == "periodic"
    if len(A) != g.shape[0]:
        raise ValueError("need one forcing term per transition")
    data = _block_data(A, frame) if _data is None else _data
    v = _sweep(A, frame, g, periodic, data)
    scale = max(1.0, float(np.max(np.abs(g))) if g.size else 1.0)
    for _ in range(refine):
        r = _residual(A, v, g, periodic)
        if np.max(np.abs(r)) <= 1e-15 * scale:
            break
        v = v - _sweep(A, frame, r, periodic, data)
    return v


# ------------------------------------------------------------ nonlinear solve

def contraction_solve(F_N: SmoothMap, orbit_N: PseudoOrbit, frame: SplittingFrame,
                      constants: SolverConstants, jacobians=None, tol=CONTRACTION_TOL,
                      max_iter=MAX_ITERATIONS, check_defect=True):
    """Corrections v_k with F_N(z_k + v_k) = z_{k+1} + v_{k+1}.

    Iterates v <- G(phi(v) - A v) with G from :func:`linear_green_solve`.

    Returns
    -------
    v : ndarray (K+1, n)
    info : dict with ``iterations`` and the successive contraction ratios.
    """
    if check_defect and orbit_N.defect > constants.d1:
        raise HypothesisError("contraction", "d > d1", d=orbit_N.defect, d1=constants.d1)
    Z = orbit_N.states
    npts = Z.shape[0]
    T = orbit_N.transitions
    A = orbit_jacobians(F_N, orbit_N) if jacobians is None else list(jacobians)[:T]
    data = _block_data(A, frame)
    v = np.zeros_like(Z)
    prev_change = None
    ratios = []
    for it in range(1, max_iter + 1):
        g = np.empty((T, Z.shape[1]))
        for k in range(T):
            j = (k + 1) % npts
            g[k] = F_N.evaluate(Z[k] + v[k]) - Z[j] - A[k] @ v[k]
        v_new = linear_green_solve(A, frame, g, orbit_N.boundary_mode, _data=data)
        size = float(np.max(np.linalg.norm(v_new, axis=1)))
        if size > constants.Delta:
            raise DivergenceError(
                f"iterate left the ball of radius Delta={constants.Delta:.3e} "
                f"(sup |v|={size:.3e}) at iteration {it}")
        change = float(np.max(np.linalg.norm(v_new - v, axis=1)))
        if prev_change is not None and prev_change > 0:
            ratios.append(change / prev_change)
        v = v_new
        if change <= tol:
            return v, {"iterations": max(1, it - 1), "ratios": tuple(ratios)}
        prev_change = change
    raise NonConvergenceError(f"no convergence in {max_iter} iterations", change)


def orbit_residual(F: SmoothMap, states, boundary_mode="free"):
    K = len(states)
    T = K if boundary_mode == "periodic" else K - 1
    if T <= 0:
        return 0.0
    return float(max(np.linalg.norm(F.evaluate(states[k]) - states[(k + 1) % K])
                     for k in range(T)))


def _period_power(length, N):
    """Smallest divisor of the period that is at least N."""
    for m in range(N, length + 1):
        if length % m == 0:
            return m
    return length


def shadow_pseudo_orbit(F: SmoothMap, orbit: PseudoOrbit, unstable_dim: int, mu: float = 0.5,
                        warmup: int = 10, L1=None, seed=0, tol=CONTRACTION_TOL):
    """Refine a pseudo-orbit of F into a true orbit and certify the distance.

    The window is reduced to the power map F^N on x_0, x_N, x_2N, ...; the
    corrected states are expanded back by iterating F.

    Parameters
    ----------
    F : SmoothMap
    orbit : PseudoOrbit
    unstable_dim : int
    mu : float
        Target contraction of the power map on the stable directions.
    warmup : int
        Filtration warmup for the splitting of F.
    L1 : float, optional
        Lipschitz constant of F; by default 1.05 times the largest Jacobian
        norm along the orbit.

    Returns
    -------
    ShadowingCertificate
    """
    d = orbit.defect
    if d == 0.0:
        C = SolverConstants(mu, _nu0_for(mu), (1 + _nu0_for(mu)) * mu, 1.0, 1.0, 0.0, 0.0,
                            1.0, 0.0, 0.0, 1.0)
        return ShadowingCertificate(np.array(orbit.states), 0.0, 0.0, 0.0,
                                    orbit_residual(F, orbit.states, orbit.boundary_mode), 0,
                                    C, errors=np.zeros(orbit.length))
    jacs = orbit_jacobians(F, orbit)
    if L1 is None:
        L1 = LIPSCHITZ_SAFETY * max(np.linalg.norm(J, 2) for J in jacs)
    frame = build_splitting(F, orbit, unstable_dim, warmup, jacobians=jacs, seed=seed)
    N = choose_power(frame.C_tilde, frame.lambda1, mu)
    if orbit.boundary_mode == "periodic":
        N = _period_power(orbit.length, N)
    F_N = power_map(F, N)
    orbit_N = subsample(orbit, F_N, N)
    C1 = subsample_constants(L1, N)
    if orbit_N.defect > C1 * d * (1 + 1e-9):
        raise HypothesisError("power reduction", "subsampled defect > C1 d",
                              defect=orbit_N.defect, C1d=C1 * d)
    jacs_N = orbit_jacobians(F_N, orbit_N)
    if orbit.boundary_mode == "free":
        jacs_N = jacs_N + [F_N.jacobian(orbit_N.states[-1])]
    warm_N = max(1, min(warmup // N, (orbit_N.length - 10) // 2))
    power_frame = build_splitting(F_N, orbit_N, unstable_dim, warm_N,
                                  jacobians=jacs_N[:orbit_N.transitions], seed=seed)
    const = assemble_constants(frame, F, orbit, mu, N=N, power_frame=power_frame, F_N=F_N,
                               orbit_N=orbit_N, jacobians_N=jacs_N, seed=seed)
    d0 = min(const.Delta, const.d1) / C1
    if d > d0:
        raise HypothesisError("shadow", "d > d0", d=d, d0=d0)
    v, info = contraction_solve(F_N, orbit_N, power_frame, const,
                                jacobians=jacs_N[:orbit_N.transitions], tol=tol)
    Y = _expand(F, orbit, orbit_N.states + v, N)
    errs = np.linalg.norm(Y - orbit.states, axis=1)
    sup_err = float(np.max(errs))
    res = orbit_residual(F, Y, orbit.boundary_mode)
    L_star = lift_constant(L1, N, const.L)
    bound = L_star * d
    valid = sup_err <= bound and res <= RESIDUAL_TOL
    return ShadowingCertificate(Y, d, bound, sup_err, res, info["iterations"], const, valid,
                                L_star, C1, float(L1), d0, orbit_N.defect, info["ratios"],
                                errs)


def _expand(F, orbit, Y_N, N):
    K = orbit.length
    Y = np.empty_like(orbit.states)
    for m, y in enumerate(Y_N):
        start = m * N
        Y[start] = y
        stop = min(start + N, K) if orbit.boundary_mode == "free" else start + N
        for j in range(start + 1, min(stop, K)):
            Y[j] = F.evaluate(Y[j - 1])
    if orbit.boundary_mode == "free":
        last = (len(Y_N) - 1) * N
        for j in range(last + 1, K):
            Y[j] = F.evaluate(Y[j - 1])
    return Y


def verify_certificate(F: SmoothMap, x: PseudoOrbit, cert: ShadowingCertificate, eps: float,
                       residual_tol=VERIFY_RESIDUAL_TOL) -> bool:
    """Recompute the orbit residual of the refined states and their distance
    to the pseudo-orbit; true iff both are within tolerance."""
    Y = np.asarray(cert.refined_states, dtype=float)
    if Y.shape != x.states.shape:
        return False
    res = orbit_residual(F, Y, x.boundary_mode)
    dist = float(np.max(np.linalg.norm(Y - x.states, axis=1)))
    return bool(res <= residual_tol and dist <= eps)
