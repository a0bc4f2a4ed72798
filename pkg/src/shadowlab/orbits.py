"""Orbit generators: true orbits, noisy pseudo-orbits and attractor samples."""
import numpy as np

from .core import SmoothMap, find_fixed_point
from .errors import ConfigError
from .splitting import PseudoOrbit


def true_orbit(F: SmoothMap, x0, length: int) -> np.ndarray:
    """States x_0, F(x_0), ..., F^(length-1)(x_0)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    X = np.empty((length, F.dimension))
    X[0] = np.asarray(x0, dtype=float)
    for k in range(1, length):
        X[k] = F.evaluate(X[k - 1])
    return X


def _escape_side(F, x, saddle, radius, max_steps):
    for _ in range(max_steps):
        dx = x[0] - saddle[0]
        if abs(dx) > radius:
            return np.sign(dx)
        x = F.evaluate(x)
    return 0.0


def stable_manifold_point(F: SmoothMap, saddle, y_start, radius=0.05, max_steps=400):
    """x1 at which the line ``x[1:] = saddle[1:] + y_start`` meets the stable
    manifold of the saddle, by bisection on the side of escape."""
    base = saddle.copy()
    base[1:] += y_start
    lo, hi = saddle[0] - radius, saddle[0] + radius
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            return mid
        x = base.copy()
        x[0] = mid
        side = _escape_side(F, x, saddle, radius, max_steps)
        if side == 0:
            return mid
        if side > 0:
            hi = mid
        else:
            lo = mid


def saddle_crossing(F: SmoothMap, length: int, x1_start=1e-15, y_start=0.1) -> np.ndarray:
    """True orbit of the double-well map passing the saddle near the origin.

    The orbit starts at height ``y_start`` above the saddle, ``x1_start`` to
    the right of the saddle's stable manifold, so it enters along the stable
    direction and leaves along the unstable manifold towards x1 = +1.
    Without tilt the stable manifold is the line x1 = 0; otherwise it is
    located by bisection.
    """
    saddle = find_fixed_point(F, np.zeros(F.dimension), tol=1e-18)
    x0 = saddle.copy()
    x0[1:] += y_start
    if float(F.params.get("tilt", 0.0)) != 0.0:
        x0[0] = stable_manifold_point(F, saddle, y_start)
    x0[0] += x1_start
    return true_orbit(F, x0, length)


def generate_noisy(F: SmoothMap, base_states, d: float, seed: int = 0,
                   boundary_mode: str = "free") -> PseudoOrbit:
    """Perturb each state of a true orbit by d times a seeded unit vector.

    The perturbation is rescaled once so that the measured defect equals d
    up to the nonlinearity of F over a distance d; the measured value is
    stored on the returned orbit.
    """
    if not 0 <= d < 1:
        raise ConfigError("noise level must lie in [0, 1)")
    X = np.asarray(base_states, dtype=float)
    if d == 0:
        return PseudoOrbit.from_states(F, X, boundary_mode)
    rng = np.random.default_rng(seed)
    eta = rng.standard_normal(X.shape)
    eta /= np.linalg.norm(eta, axis=1)[:, None]
    trial = PseudoOrbit.from_states(F, X + d * eta, boundary_mode)
    base = PseudoOrbit.from_states(F, X, boundary_mode).defect
    if trial.defect <= base:
        return trial
    scale = d / trial.defect
    return PseudoOrbit.from_states(F, X + scale * d * eta, boundary_mode)


def noisy_iteration(F: SmoothMap, x0, length: int, d: float, seed: int = 0) -> PseudoOrbit:
    """x_{k+1} = F(x_k) + d eta_k with seeded unit vectors eta_k."""
    rng = np.random.default_rng(seed)
    X = np.empty((length, F.dimension))
    X[0] = np.asarray(x0, dtype=float)
    for k in range(1, length):
        eta = rng.standard_normal(F.dimension)
        X[k] = F.evaluate(X[k - 1]) + d * eta / np.linalg.norm(eta)
    return PseudoOrbit.from_states(F, X, "free")


def unstable_manifold_curve(F: SmoothMap, offset=1e-9, steps=400, substeps=4):
    """Polyline through the equilibria and the saddle's unstable manifold.

    The double-well attractor is the closure of the unstable manifold of the
    saddle at the origin; the branches are traced by integrating the vector
    field from the origin displaced by ``offset`` along the unstable
    eigenvector, with output every h / substeps.
    """
    if not hasattr(F, "vector_field"):
        raise ConfigError("the attractor curve needs a flow map")
    n = F.dimension
    saddle = find_fixed_point(F, np.zeros(n))
    J = F.field_jacobian(saddle)
    w, V = np.linalg.eig(J)
    e = np.real(V[:, int(np.argmax(np.real(w)))])
    e /= np.linalg.norm(e)
    t = np.linspace(0.0, steps * F.step_h, steps * substeps + 1)
    branches = []
    for sign in (-1.0, 1.0):
        branches.append(F.flow(saddle + sign * offset * e, t[-1], t_eval=t).T)
    left = branches[0][::-1]
    return np.vstack([left, saddle[None, :], branches[1]])


def distance_to_polyline(points, polyline) -> np.ndarray:
    """Euclidean distance of each point to a piecewise-linear curve."""
    P = np.atleast_2d(points)
    A, B = polyline[:-1], polyline[1:]
    AB = B - A
    denom = np.einsum("ij,ij->i", AB, AB)
    denom[denom == 0] = 1.0
    out = np.empty(P.shape[0])
    for i, p in enumerate(P):
        s = np.clip(np.einsum("ij,ij->i", p - A, AB) / denom, 0.0, 1.0)
        q = A + s[:, None] * AB
        out[i] = np.sqrt(np.min(np.einsum("ij,ij->i", p - q, p - q)))
    return out
