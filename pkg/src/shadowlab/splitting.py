"""Stable/unstable splittings along finite pseudo-orbits.

The unstable subspaces come from a forward QR filtration of the Jacobian
cocycle, the stable ones from the orthogonal complement of the dominant
subspaces of the transposed cocycle run backward.  Both families are
propagated with the actual Jacobians, so invariance holds up to rounding.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .core import SmoothMap
from .errors import DegenerateSplittingError, NotUniformlyHyperbolicError
from .subspace import (Subspace, _canonical_signs, direct_sum_check, map_subspace,
                       oblique_matrix, subspace_gap)

SPECTRAL_GAP_MIN = 1e-6
RATE_WINDOW = 10
MAX_LAPS = 200


@dataclass(frozen=True, eq=False)
class PseudoOrbit:
    """States x_0..x_K with defect max_k |F(x_k) - x_{k+1}|.

    In periodic mode the wrap-around transition x_K -> x_0 is part of the
    orbit and enters the defect.
    """

    states: np.ndarray
    defect: float
    boundary_mode: str = "free"
    step_defects: np.ndarray = None

    def __post_init__(self):
        if self.boundary_mode not in ("free", "periodic"):
            raise ValueError(f"unknown boundary mode {self.boundary_mode!r}")
        s = np.array(self.states, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    @classmethod
    def from_states(cls, F: SmoothMap, states, boundary_mode="free"):
        states = np.array(states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        steps = orbit_step_defects(F, states, boundary_mode)
        d = float(np.max(steps)) if steps.size else 0.0
        return cls(states, d, boundary_mode, steps)

    @property
    def length(self):
        return self.states.shape[0]

    @property
    def dimension(self):
        return self.states.shape[1]

    @property
    def transitions(self):
        return self.length if self.boundary_mode == "periodic" else self.length - 1

    def successor(self, k):
        return (k + 1) % self.length

    def recompute_defect(self, F):
        return float(np.max(orbit_step_defects(F, self.states, self.boundary_mode)))


def orbit_step_defects(F, states, boundary_mode="free"):
    K = states.shape[0]
    images = [F.evaluate(states[k]) for k in range(K if boundary_mode == "periodic" else K - 1)]
    nxt = [states[(k + 1) % K] for k in range(len(images))]
    return np.array([np.linalg.norm(a - b) for a, b in zip(images, nxt)])


def orbit_jacobians(F: SmoothMap, orbit: PseudoOrbit):
    """Jacobian of F at each transition's source state."""
    return [F.jacobian(orbit.states[k]) for k in range(orbit.transitions)]


@dataclass(frozen=True, eq=False)
class SplittingFrame:
    stable: list
    unstable: list
    C_tilde: float
    lambda1: float
    M: float
    invariance_defect: float
    boundary_mode: str = "free"
    exponents: tuple = ()
    stable_projectors: np.ndarray = field(default=None, repr=False)

    @property
    def length(self):
        return len(self.stable)

    @property
    def unstable_dim(self):
        return self.unstable[0].dim

    def report(self):
        return {"C_tilde": self.C_tilde, "lambda1": self.lambda1, "M": self.M,
                "invariance_defect": self.invariance_defect}

    def to_dict(self):
        return {**self.report(), "boundary_mode": self.boundary_mode,
                "exponents": list(self.exponents),
                "stable": [s.basis.tolist() for s in self.stable],
                "unstable": [u.basis.tolist() for u in self.unstable]}


def _qr_step(A, Q):
    q, r = np.linalg.qr(A @ Q)
    s = np.sign(np.diag(r))
    s[s == 0] = 1.0
    return q * s, np.abs(np.diag(r))


def _seed_matrix(n, k, seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q[:, :k]


def _forward_pass(jacs, Q0, periodic, laps):
    """QR filtration; returns per-point bases and log |R_ii| per transition."""
    P = len(jacs)
    Q = Q0
    if periodic:
        for _ in range(laps - 1):
            for A in jacs:
                Q, _ = _qr_step(A, Q)
    bases = [None] * (P if periodic else P + 1)
    bases[0] = Q
    logs = []
    for k, A in enumerate(jacs):
        Q, d = _qr_step(A, Q)
        logs.append(np.log(np.maximum(d, 1e-300)))
        bases[(k + 1) % len(bases)] = Q
    return bases, np.array(logs)


def _backward_pass(jacs, W_end, periodic, laps):
    P = len(jacs)
    W = W_end
    if periodic:
        for _ in range(laps - 1):
            for A in reversed(jacs):
                W, _ = _qr_step(A.T, W)
    bases = [None] * (P if periodic else P + 1)
    bases[-1] = W
    for k in range(P - 1, -1, -1):
        W, _ = _qr_step(jacs[k].T, W)
        bases[k] = W
    return bases


def _periodic_laps(P, warmup):
    return max(2, int(np.ceil(warmup / max(P, 1))) + 2)


def splitting_from_cocycle(jacobians, unstable_dim, boundary_mode="free", warmup=20,
                           seed=0):
    """Stable and unstable subspaces for a cocycle A_0, A_1, ... .

    Free mode: the cocycle has K transitions for K+1 points.  Periodic mode:
    K+1 transitions, the last one closing the loop.

    Returns ``(stable, unstable, exponents)``.
    """
    jacs = [np.asarray(A, dtype=float) for A in jacobians]
    n = jacs[0].shape[0]
    u = int(unstable_dim)
    if not 0 <= u < n:
        raise ValueError("unstable_dim must satisfy 0 <= unstable_dim < n")
    periodic = boundary_mode == "periodic"
    npts = len(jacs) if periodic else len(jacs) + 1
    laps = _periodic_laps(len(jacs), warmup)

    # full filtration: exponents and the first guess of U
    full, logs = _forward_pass(jacs, _seed_matrix(n, n, seed), periodic, laps)
    exponents = tuple(float(v) for v in logs.mean(axis=0))
    if u == 0:
        zero = Subspace.zero(n)
        return [Subspace.full(n)] * npts, [zero] * npts, exponents
    if exponents[u - 1] - exponents[u] < SPECTRAL_GAP_MIN:
        local = logs[:, u - 1] - logs[:, u]
        raise DegenerateSplittingError(
            f"spectral gap {exponents[u - 1] - exponents[u]:.3e} below {SPECTRAL_GAP_MIN}",
            int(np.argmin(local)))

    # stable complements from the adjoint cocycle, seeded with the first U guess
    W = _backward_pass(jacs, full[-1][:, :u], periodic, laps)
    stable = [Subspace(_canonical_signs(_complement(w))) for w in W]
    # unstable family, seeded orthogonal to the stable space at the left end
    if periodic:
        U_bases, _ = _forward_pass(jacs, full[0][:, :u], periodic, laps)
    else:
        U_bases, _ = _forward_pass(jacs, W[0], periodic, 1)
    unstable = [Subspace(_canonical_signs(q)) for q in U_bases]

    for k, (S, U) in enumerate(zip(stable, unstable)):
        ok, gap = direct_sum_check(S, U)
        if not ok or gap < SPECTRAL_GAP_MIN:
            raise DegenerateSplittingError(
                f"stable and unstable subspaces nearly coincide (gap {gap:.3e})", k)
    return stable, unstable, exponents


def _complement(w):
    n, k = w.shape
    q, _ = np.linalg.qr(w, mode="complete")
    return q[:, k:]


def build_splitting(F: SmoothMap, orbit: PseudoOrbit, unstable_dim: int, warmup: int = 10,
                    jacobians=None, strict=True, seed=0) -> SplittingFrame:
    """Stable/unstable frame along ``orbit`` with measured constants.

    Parameters
    ----------
    F : SmoothMap
    orbit : PseudoOrbit
        Needs at least ``2 * warmup + 10`` states.
    unstable_dim : int
        Dimension of the unstable subspaces, constant along the window.
    warmup : int
        Number of steps the filtrations need to forget their seeds; in
        periodic mode it sets how many laps are run.
    jacobians : list of arrays, optional
        Precomputed Jacobians along the orbit.

    Returns
    -------
    SplittingFrame
    """
    if orbit.length < 2 * warmup + 10:
        raise ValueError(f"orbit has {orbit.length} states, needs >= {2 * warmup + 10}")
    if unstable_dim >= F.dimension:
        raise ValueError("unstable_dim must be smaller than the dimension")
    jacs = orbit_jacobians(F, orbit) if jacobians is None else jacobians
    stable, unstable, exps = splitting_from_cocycle(jacs, unstable_dim, orbit.boundary_mode,
                                                    warmup, seed)
    frame = SplittingFrame(stable, unstable, 1.0, 0.0, 0.0, 0.0, orbit.boundary_mode, exps)
    rep = verify_splitting(F, orbit, frame, jacobians=jacs, strict=strict)
    return replace(frame, **rep, stable_projectors=_projectors(stable, unstable))


def _projectors(stable, unstable):
    return np.array([oblique_matrix(S, U) for S, U in zip(stable, unstable)])


def _restricted(jacs, frame, periodic):
    """Matrices of A_k restricted to S_k -> S_{k+1} and U_k -> U_{k+1} in the
    orthonormal bases, after projecting the image along the complementary
    subspace (removes rounding drift)."""
    P = len(jacs)
    npts = frame.length
    Rs, Ru = [], []
    for k in range(P):
        j = (k + 1) % npts
        S0, U0 = frame.stable[k], frame.unstable[k]
        S1, U1 = frame.stable[j], frame.unstable[j]
        Ps = oblique_matrix(S1, U1)
        Rs.append(S1.basis.T @ (Ps @ (jacs[k] @ S0.basis)))
        Ru.append(U1.basis.T @ ((np.eye(Ps.shape[0]) - Ps) @ (jacs[k] @ U0.basis)))
    return Rs, Ru


def _decay_factors(Rs, Ru):
    """factor[k][t-1] = max(|S-product over [k, k+t)|, |inverse U-product|)."""
    P = len(Rs)
    out = []
    for k in range(P):
        row = []
        Ms = np.eye(Rs[0].shape[1])
        Mu = np.eye(Ru[0].shape[1])
        for t in range(P - k):
            Ms = Rs[k + t] @ Ms
            Mu = Mu @ np.linalg.inv(Ru[k + t]) if Mu.size else Mu
            vs = np.linalg.norm(Ms, 2) if Ms.size else 0.0
            vu = np.linalg.norm(Mu, 2) if Mu.size else 0.0
            row.append(max(vs, vu))
        out.append(np.array(row))
    return out


def verify_splitting(F: SmoothMap, orbit: PseudoOrbit, frame: SplittingFrame,
                     jacobians=None, strict=True, window=RATE_WINDOW):
    """Measure (C_tilde, lambda1, M, invariance_defect) for a frame.

    lambda1 is the worst per-step rate over windows of ``window`` steps,
    for stable contraction and inverse unstable expansion alike; C_tilde is
    the smallest prefactor with |product over t steps| <= C_tilde lambda1^t
    on every sub-window; M = max_k |P_SU(k)| + |P_US(k)|.

    With ``strict`` a rate of at least one raises
    :class:`NotUniformlyHyperbolicError`.
    """
    if frame.length != orbit.length:
        raise ValueError("frame does not cover the orbit")
    jacs = orbit_jacobians(F, orbit) if jacobians is None else jacobians
    periodic = orbit.boundary_mode == "periodic"
    npts = orbit.length

    M = 0.0
    for S, U in zip(frame.stable, frame.unstable):
        P = oblique_matrix(S, U)
        n = P.shape[0]
        M = max(M, np.linalg.norm(P, 2) + np.linalg.norm(np.eye(n) - P, 2))

    inv = 0.0
    for k, A in enumerate(jacs):
        j = (k + 1) % npts
        for fam in (frame.stable, frame.unstable):
            if 0 < fam[k].dim:
                inv = max(inv, subspace_gap(map_subspace(A, fam[k]), fam[j]))

    Rs, Ru = _restricted(jacs, frame, periodic)
    factors = _decay_factors(Rs, Ru)
    T = len(jacs)
    w = min(window, T)
    lam = max(factors[k][w - 1] ** (1.0 / w) for k in range(T - w + 1))
    lam = float(lam)
    whole = float(factors[0][-1])
    if strict and (lam >= 1.0 or whole >= 1.0):
        raise NotUniformlyHyperbolicError(
            f"window rate {lam:.6g} or full-window factor {whole:.6g} is not below 1")
    C = 1.0
    if lam > 0:
        # log space: products and lam^t both underflow on strongly contracting orbits
        with np.errstate(divide="ignore"):
            for row in factors:
                t = np.arange(1, row.size + 1)
                C = max(C, float(np.exp(np.max(np.log(row) - t * np.log(lam)))))
    return {"C_tilde": float(C), "lambda1": lam, "M": float(M),
            "invariance_defect": float(inv)}


def choose_power(C_tilde: float, lambda1: float, mu: float) -> int:
    """Smallest N >= 1 with C_tilde * lambda1^(N-1) <= mu."""
    if not 0 < mu < 1 or not 0 < lambda1 < 1 or C_tilde < 1:
        raise ValueError("need 0 < mu < 1, 0 < lambda1 < 1, C_tilde >= 1")
    N = max(1, int(np.ceil(np.log(mu / C_tilde) / np.log(lambda1))) + 1)
    while N > 1 and C_tilde * lambda1 ** (N - 2) <= mu:
        N -= 1
    while C_tilde * lambda1 ** (N - 1) > mu:
        N += 1
    return N


def subsample(orbit: PseudoOrbit, F_N: SmoothMap, N: int) -> PseudoOrbit:
    """States x_0, x_N, x_2N, ... as a pseudo-orbit of F^N."""
    if orbit.boundary_mode == "periodic":
        if orbit.length % N:
            raise ValueError("period must be a multiple of N")
        states = orbit.states[::N]
    else:
        states = orbit.states[: (orbit.length - 1) // N * N + 1: N]
    return PseudoOrbit.from_states(F_N, states, orbit.boundary_mode)
