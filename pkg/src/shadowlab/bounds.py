"""Closed-form constants: distance of pseudo-orbits to an attractor,
power-map bookkeeping, neighbourhood shadowing and attractor continuity.
"""
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConditionNotMetError, HypothesisError, ShadowlabError

UNIT_L1_TOL = 1e-9
NEAR_UNIT_WARN = 1e-3


@dataclass(frozen=True)
class HolderBound:
    alpha: float
    C2: float
    regime: str
    beta_star: float = None
    value: float = None
    d: float = None
    N: int = None
    K_d: float = None
    L: float = None
    formula: str = ""

    def to_dict(self):
        return asdict(self)


def regime_of(L1):
    if abs(L1 - 1.0) <= UNIT_L1_TOL:
        return "logarithm"
    return "lipschitz" if L1 < 1.0 else "holder"


def holder_alpha(beta, gamma, L1):
    """min{beta, gamma (1 - beta) / ln L1}, the exponent obtained for a given beta."""
    return min(beta, gamma * (1.0 - beta) / math.log(L1))


def holder_exponent(profile):
    """(beta_star, alpha) with beta_star = gamma / (gamma + ln L1) = alpha."""
    L1, gamma = profile.L1, profile.gamma
    if L1 <= 1.0 + UNIT_L1_TOL:
        raise ValueError("holder exponent needs L1 > 1; use distance_bound for the "
                         "Lipschitz and logarithm regimes")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    beta = gamma / (gamma + math.log(L1))
    return beta, beta


def holder_constant(C, gamma, L1):
    """C2 = L1^(1 + ln C / gamma) / (L1 - 1) + 1."""
    return L1 ** (1.0 + math.log(C) / gamma) / (L1 - 1.0) + 1.0


def window_length(C, gamma, K):
    """Smallest N with C exp(-gamma N) <= K; then also K <= C exp(-gamma (N-1))."""
    N = max(0, math.ceil((math.log(C) - math.log(K)) / gamma))
    while N > 0 and C * math.exp(-gamma * (N - 1)) <= K:
        N -= 1
    while C * math.exp(-gamma * N) > K:
        N += 1
    return N


def distance_bound(profile, d):
    """Bound on sup_n dist(x_n, A) for d-pseudo-orbits in the attracted region.

    ``L1 > 1``: C2 d^alpha.  ``L1 < 1``: d / (1 - L1).  ``L1 == 1`` (within
    1e-9): (N + 1) d with N the attraction window for K(d) = d; this is at
    most L d |ln d| with L = 1/gamma + 2 once |ln d| >= 1 + ln C / (2 gamma).
    """
    if not 0 < d < 1:
        raise ValueError("d must lie in (0, 1)")
    C, gamma, L1 = max(1.0, profile.C), profile.gamma, profile.L1
    regime = regime_of(L1)
    if regime == "holder":
        if L1 - 1.0 < NEAR_UNIT_WARN:
            warnings.warn(f"L1={L1} is close to 1; the Hölder constant is very large")
        beta, alpha = holder_exponent(profile)
        C2 = holder_constant(C, gamma, L1)
        K = d ** (gamma * (1 - beta) / math.log(L1))
        N = window_length(C, gamma, K)
        return HolderBound(alpha, C2, regime, beta, C2 * d**alpha, d, N, K, None,
                           "C2 = L1^(1+lnC/gamma)/(L1-1) + 1; alpha = gamma/(gamma+ln L1)")
    if regime == "lipschitz":
        if 1.0 - L1 < NEAR_UNIT_WARN:
            warnings.warn(f"L1={L1} is close to 1; the Lipschitz constant is very large")
        L = 1.0 / (1.0 - L1)
        N = window_length(C, gamma, d)
        return HolderBound(1.0, L, regime, None, L * d, d, N, d, L, "L = 1/(1-L1)")
    N = window_length(C, gamma, d)
    L = 1.0 / gamma + 2.0
    return HolderBound(1.0, L, regime, None, (N + 1) * d, d, N, d, L,
                       "value = (N+1) d <= L d |ln d|, L = 1/gamma + 2")


def subsample_constants(L1, N):
    """C1 = 1 + L1 + ... + L1^(N-1)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if abs(L1 - 1.0) <= UNIT_L1_TOL:
        return float(N)
    if N <= 64 or abs(L1 - 1.0) < 1e-4:
        return math.fsum(L1**j for j in range(N))
    return (L1**N - 1.0) / (L1 - 1.0)


def lift_constant(L1, N, L):
    """L* = (1 + L1 + ... + L1^N) L."""
    if N < 1 or L <= 0:
        raise ValueError("need N >= 1 and L > 0")
    return subsample_constants(L1, N + 1) * L


def neighborhood_shadowing_constants(C, L1, L, alpha, d0_prime):
    """C2 = L1 C + 1 + C, C3 = (L + 1) C2, d0 = (d0' / C2)^(1/alpha) < 1.

    Returns ``(C3, d0, C2)``.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if C < 0 or L1 <= 0 or L <= 0 or d0_prime <= 0:
        raise ValueError("constants must be positive")
    C2 = L1 * C + 1.0 + C
    C3 = (L + 1.0) * C2
    d0 = min((d0_prime / C2) ** (1.0 / alpha), 1.0 - 1e-12)
    return C3, d0, C2


@dataclass(frozen=True)
class ContinuityBound:
    N: int
    C3: float
    bound: float
    beta: float
    growth_ratio: tuple
    horizon: int
    note: str = ("the growth condition on n / ln L_n is checked on a finite horizon "
                 "only; it cannot be certified numerically")

    def to_dict(self):
        return asdict(self)


def attractor_continuity_bound(L_n, profile, alpha_target, perturbation_norm):
    """Hölder bound C3 |T(N) - T_eps(N)|^alpha_target on the attractor distance.

    ``L_n[i]`` is the Lipschitz constant of the (i+1)-th iterate.  Raises
    :class:`ConditionNotMetError` when n / ln L_n shows no growth over the
    horizon or when no N <= horizon satisfies beta N gamma / ln L_N > 1 - beta.
    """
    if not 0 < alpha_target < 1:
        raise ValueError("alpha_target must lie in (0, 1)")
    if perturbation_norm < 0:
        raise ValueError("perturbation norm must be non-negative")
    L = np.asarray(L_n, dtype=float)
    if L.size < 2:
        raise ValueError("need at least two Lipschitz constants")
    if np.any(L <= 1.0):
        raise ValueError("every L_n must exceed 1")
    C, gamma = max(1.0, profile.C), profile.gamma
    n = np.arange(1, L.size + 1)
    ratio = n / np.log(L)
    running = np.maximum.accumulate(ratio)
    half = L.size // 2
    if not running[-1] > running[half - 1] * (1 + 1e-9):
        raise ConditionNotMetError(
            f"n / ln L_n does not grow over the horizon (max {running[-1]:.4g})")
    beta = 1.0 - alpha_target
    ok = np.flatnonzero(beta * n * gamma / np.log(L) > 1.0 - beta)
    if ok.size == 0:
        raise ConditionNotMetError(
            f"no N <= {L.size} with beta N gamma / ln L_N > 1 - beta (beta={beta})")
    N = int(n[ok[0]])
    C3 = float(np.max(L ** (math.log(C) / (n * gamma)) * L / (L - 1.0) + 1.0))
    return ContinuityBound(N, C3, C3 * perturbation_norm**alpha_target, beta,
                           tuple(float(r) for r in running), int(L.size))


def perturbation_defect(F0, F_eps, orbit_of_F_eps, tol=1e-12):
    """Re-target a true orbit of F_eps as a pseudo-orbit of F0."""
    from .splitting import PseudoOrbit, orbit_step_defects

    X = orbit_of_F_eps.states
    mode = orbit_of_F_eps.boundary_mode
    own = orbit_step_defects(F_eps, X, mode)
    if own.size and float(np.max(own)) > tol:
        raise HypothesisError("perturbation", "input is not a true orbit of F_eps",
                              defect=float(np.max(own)))
    new = PseudoOrbit.from_states(F0, X, mode)
    T = new.transitions
    sup_diff = max((np.linalg.norm(F0.evaluate(X[k]) - F_eps.evaluate(X[k])) for k in range(T)),
                   default=0.0)
    if new.defect > sup_diff + tol:
        raise ShadowlabError("re-targeted defect exceeds the map difference")
    return new
