"""Smooth discrete dynamical systems: direct maps and time-h flow maps.

Besides the system types this module locates and classifies fixed points
and estimates the global constants consumed by the bounds calculus: the
Lipschitz constant L1 and the exponential attraction profile (C, gamma).
"""
import json
import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp
from scipy.spatial import cKDTree

from .errors import (BirkhoffCapError, ConfigError, NoAttractionError,
                     NotAFixedPointError, NotInjectiveError, ShadowlabError)
from .subspace import Subspace

log = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-8
SPECTRAL_TOL = 1e-8
INJECTIVITY_TOL = 1e-10
T_PROBE = 50
LIPSCHITZ_SAFETY = 1.05
BIRKHOFF_CAP = 10**6
DEFAULT_INTEGRATOR_TOL = 1e-10
IMPLICIT_METHODS = ("Radau", "BDF", "LSODA")


# ---------------------------------------------------------------- regions

@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box [lower, upper]."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, n, half_width):
        return cls(-half_width * np.ones(n), half_width * np.ones(n))

    @property
    def dim(self):
        return self.lower.size

    @property
    def empty(self):
        return bool(np.any(self.upper < self.lower))

    @property
    def radius(self):
        """Half of the shortest side."""
        return float(np.min(self.upper - self.lower) / 2)

    def contains(self, x, slack=0.0):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack))

    def sample(self, count, rng):
        u = rng.random((count, self.dim))
        return self.lower + u * (self.upper - self.lower)

    def grid(self, points_per_axis):
        axes = [np.linspace(a, b, points_per_axis) if b > a else np.array([a])
                for a, b in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def to_dict(self):
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    @property
    def empty(self):
        return self.radius < 0

    def contains(self, x, slack=0.0):
        return bool(np.linalg.norm(np.asarray(x, dtype=float) - self.center) <= self.radius + slack)

    def sample(self, count, rng):
        n = self.dim
        g = rng.standard_normal((count, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = self.radius * rng.random(count) ** (1.0 / n)
        return self.center + g * r[:, None]

    def grid(self, points_per_axis):
        box = Box(self.center - self.radius, self.center + self.radius)
        pts = box.grid(points_per_axis)
        keep = np.linalg.norm(pts - self.center, axis=1) <= self.radius * (1 + 1e-12)
        return pts[keep]

    def to_dict(self):
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


def region_from_dict(d):
    if d["kind"] == "box":
        return Box(d["lower"], d["upper"])
    if d["kind"] == "ball":
        return Ball(d["center"], d["radius"])
    raise ConfigError(f"unknown region kind {d['kind']!r}")


# ---------------------------------------------------------------- maps

@dataclass(frozen=True, eq=False)
class SmoothMap:
    """A smooth self-map of R^n with Jacobian and a working region."""

    dimension: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    region: object
    label: str = "map"
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=float))

    def value_and_jacobian(self, x):
        x = np.asarray(x, dtype=float)
        return self.evaluate(x), self.jacobian(x)

    def iterate(self, x, steps):
        """Orbit x, F(x), ..., F^steps(x) as a (steps+1, n) array."""
        out = np.empty((steps + 1, self.dimension))
        out[0] = x
        for k in range(steps):
            out[k + 1] = self.evaluate(out[k])
        return out

    @property
    def noise_floor(self):
        return 1e-13

    def describe(self):
        return {"label": self.label, "dimension": self.dimension,
                "params": _jsonable(self.params), "region": self.region.to_dict()}


@dataclass(frozen=True, eq=False)
class FlowMap(SmoothMap):
    """Time-h map of an autonomous ODE x' = f(x).

    The Jacobian comes from the variational equation Y' = Df(x) Y integrated
    alongside the state.
    """

    vector_field: Optional[Callable] = None
    field_jacobian: Optional[Callable] = None
    step_h: float = 0.1
    integrator_tolerance: float = DEFAULT_INTEGRATOR_TOL
    method: str = "RK45"

    def flow(self, x, t, t_eval=None):
        x = np.asarray(x, dtype=float)
        if t == 0:
            return x.copy() if t_eval is None else np.repeat(x[:, None], len(t_eval), 1)
        extra = {}
        if self.method in IMPLICIT_METHODS:
            extra["jac"] = lambda _, y: self.field_jacobian(y)
        sol = solve_ivp(lambda _, y: self.vector_field(y), (0.0, t), x,
                        method=self.method, rtol=self.integrator_tolerance,
                        atol=self.integrator_tolerance, t_eval=t_eval, **extra)
        if not sol.success:
            raise ShadowlabError(f"integration failed: {sol.message}")
        return sol.y[:, -1] if t_eval is None else sol.y

    def flow_with_jacobian(self, x, t):
        n = self.dimension
        x = np.asarray(x, dtype=float)

        def rhs(_, z):
            y = z[:n]
            Y = z[n:].reshape(n, n)
            return np.concatenate([self.vector_field(y), (self.field_jacobian(y) @ Y).ravel()])

        extra = {}
        if self.method in IMPLICIT_METHODS:
            # block-diagonal approximation; it only steers the Newton iterations
            extra["jac"] = lambda _, z: np.kron(np.eye(n + 1), self.field_jacobian(z[:n]))
        z0 = np.concatenate([x, np.eye(n).ravel()])
        sol = solve_ivp(rhs, (0.0, t), z0, method=self.method,
                        rtol=self.integrator_tolerance, atol=self.integrator_tolerance,
                        **extra)
        if not sol.success:
            raise ShadowlabError(f"integration failed: {sol.message}")
        z = sol.y[:, -1]
        return z[:n], z[n:].reshape(n, n)

    def value_and_jacobian(self, x):
        return self.flow_with_jacobian(x, self.step_h)

    @property
    def noise_floor(self):
        return 100 * self.integrator_tolerance

    def with_integrator(self, tolerance, method=None):
        """Same system integrated at a different tolerance and/or method."""
        return _build_flow_map(self.vector_field, self.field_jacobian, self.dimension,
                               self.step_h, self.region, self.label, self.params,
                               tolerance, method or self.method)


def _build_flow_map(f, df, n, h, region, label, params, tol, method="RK45"):
    holder = {}

    def evaluate(x):
        return holder["m"].flow(x, h)

    def jacobian(x):
        return holder["m"].flow_with_jacobian(x, h)[1]

    fm = FlowMap(n, evaluate, jacobian, region, label, dict(params), f, df, float(h),
                 float(tol), method)
    holder["m"] = fm
    return fm


def linear_map(A, region=None, label="linear"):
    A = np.array(A, dtype=float)
    A.setflags(write=False)
    n = A.shape[0]
    if region is None:
        region = Box.cube(n, 2.0)
    return SmoothMap(n, lambda x: A @ x, lambda x: A.copy(), region, label,
                     {"matrix": A.tolist()})


def power_map(F: SmoothMap, N: int) -> SmoothMap:
    """F composed with itself N times; Jacobian by the chain rule."""
    if N < 1:
        raise ValueError("power must be >= 1")
    if N == 1:
        return F

    def evaluate(x):
        for _ in range(N):
            x = F.evaluate(x)
        return x

    def value_and_jacobian(x):
        # the state carried along is the one integrated with the variational
        # equation; it differs from F.evaluate only at integrator tolerance
        J = np.eye(F.dimension)
        for _ in range(N):
            x, step = F.value_and_jacobian(x)
            J = step @ J
        return x, J

    def jacobian(x):
        return value_and_jacobian(x)[1]

    return SmoothMap(F.dimension, evaluate, jacobian, F.region, f"{F.label}^{N}",
                     {"base": F.label, "power": N})


# ---------------------------------------------------------------- presets

def _radial_field(u):
    r = np.linalg.norm(u)
    return -((1 - r * r) ** 3) * (2 - r) * u


def _radial_jacobian(u):
    n = u.size
    r = np.linalg.norm(u)
    a = 1 - r * r
    g = -(a**3) * (2 - r)
    J = g * np.eye(n)
    if r > 0:
        # g'(r)/r u u^T with g'(r) = 6 r a^2 (2 - r) + a^3
        J += (6 * a * a * (2 - r) + a**3 / r) * np.outer(u, u)
    return J


def _double_well(kappa, tilt, bend):
    # V = (x1^2 - 1)^2 / 4 + (1 + kappa x1^2) |y|^2 / 2 + tilt x1,
    # with y_i = x_i - bend x1^2 for the transverse coordinates
    def f(x):
        x1 = x[0]
        q = 1 + kappa * x1 * x1
        y = x[1:] - bend * x1 * x1
        out = np.empty_like(x)
        out[0] = -(x1**3 - x1 + kappa * x1 * (y @ y) - 2 * bend * x1 * q * y.sum() + tilt)
        out[1:] = -q * y
        return out

    def df(x):
        n = x.size
        x1 = x[0]
        q = 1 + kappa * x1 * x1
        y = x[1:] - bend * x1 * x1
        s1 = y.sum()
        H = np.zeros((n, n))
        H[0, 0] = (3 * x1 * x1 - 1 + kappa * (y @ y) - 8 * bend * kappa * x1 * x1 * s1
                   - 2 * bend * q * s1 + 4 * bend * bend * x1 * x1 * q * (n - 1))
        H[0, 1:] = H[1:, 0] = 2 * kappa * x1 * y - 2 * bend * x1 * q
        idx = np.arange(1, n)
        H[idx, idx] = q
        return -H

    def potential(x):
        x = np.asarray(x, dtype=float)
        x1 = x[..., 0]
        y = x[..., 1:] - bend * x1[..., None] ** 2
        s = np.sum(y**2, axis=-1)
        return (x1**2 - 1) ** 2 / 4 + 0.5 * s * (1 + kappa * x1**2) + tilt * x1

    return f, df, potential


def make_system(preset: str, params: Optional[dict] = None) -> SmoothMap:
    """Build a preset system.

    Parameters
    ----------
    preset : {"radial", "double_well_gradient", "linear_diag", "custom"}
    params : dict
        ``dimension`` (default 1, or the length of ``diag``), ``h`` (flow
        presets, default 0.1), ``tol`` (integrator tolerance), ``method``.
        ``double_well_gradient`` also takes ``coupling``, ``bend`` and
        ``tilt``;
        ``linear_diag`` takes ``diag``; ``custom`` takes ``vector_field``
        (see :func:`load_polynomial_field`).  ``region`` overrides the
        default working region.

    Returns
    -------
    SmoothMap
        A :class:`FlowMap` for the ODE presets.
    """
    p = dict(params or {})
    if preset == "linear_diag":
        diag = np.asarray(p.get("diag", [0.5, 2.0]), dtype=float)
        n = int(p.get("dimension", diag.size))
        if n < 1:
            raise ConfigError("dimension must be >= 1")
        if diag.size != n:
            raise ConfigError("diag length must equal dimension")
        region = region_from_dict(p["region"]) if "region" in p else Box.cube(n, 2.0)
        m = linear_map(np.diag(diag), region, f"linear_diag{tuple(diag.tolist())}")
        return SmoothMap(n, m.evaluate, m.jacobian, region, m.label,
                         {"diag": diag.tolist()})

    if preset not in ("radial", "double_well_gradient", "custom"):
        raise ConfigError(f"unknown preset {preset!r}")

    n = int(p.get("dimension", 1))
    h = float(p.get("h", 0.1))
    tol = float(p.get("tol", DEFAULT_INTEGRATOR_TOL))
    # the radial field is stiff near its attracting sphere (f'(2) = -54); RK45
    # step control chatters there and makes the map non-smooth, the 8th-order
    # pair takes few enough steps to stay smooth
    method = p.get("method", "DOP853" if preset == "radial" else "RK45")
    if n < 1:
        raise ConfigError("dimension must be >= 1")
    if h <= 0:
        raise ConfigError("step h must be positive")
    record = {"dimension": n, "h": h, "tol": tol}

    if preset == "radial":
        f, df = _radial_field, _radial_jacobian
        region = Ball(np.zeros(n), 3.0)
        label = f"radial(n={n}, h={h})"
    elif preset == "double_well_gradient":
        kappa = float(p.get("coupling", 1.5))
        tilt = float(p.get("tilt", 0.0))
        bend = float(p.get("bend", 0.0))
        f, df, _ = _double_well(kappa, tilt, bend)
        region = Box.cube(n, 2.0)
        label = f"double_well(n={n}, h={h})"
        record.update(coupling=kappa, tilt=tilt, bend=bend)
    else:
        if "vector_field" not in p:
            raise ConfigError("custom preset needs a 'vector_field' description")
        f, df, n_field = load_polynomial_field(p["vector_field"])
        if "dimension" in p and n_field != n:
            raise ConfigError("dimension does not match the vector field")
        n = n_field
        record["dimension"] = n
        record["vector_field"] = p["vector_field"]
        region = Box.cube(n, 2.0)
        label = p.get("label", f"custom(n={n}, h={h})")
    if "region" in p:
        region = region_from_dict(p["region"])
    return _build_flow_map(f, df, n, h, region, label, record, tol, method)


def double_well_potential(F: SmoothMap):
    """Lyapunov function of a double-well preset, as a callable."""
    return _double_well(F.params["coupling"], F.params["tilt"], F.params["bend"])[2]


def load_polynomial_field(description):
    """Polynomial vector field from a declarative description.

    ``description`` is a JSON string, a path-free dict, or a list.  Each component
    is a list of monomials ``{"coeff": "p/q", "powers": [e_0, ..., e_{n-1}]}``;
    coefficients are parsed as exact rationals.
    """
    if isinstance(description, str):
        description = json.loads(description)
    if isinstance(description, dict):
        description = description["components"]
    try:
        n = len(description)
        coeffs = []
        powers = []
        for comp in description:
            c = [float(Fraction(str(m["coeff"]))) for m in comp]
            e = [list(map(int, m["powers"])) for m in comp]
            for row in e:
                if len(row) != n or min(row, default=0) < 0:
                    raise ConfigError("monomial powers must be n non-negative integers")
            coeffs.append(np.array(c))
            powers.append(np.array(e, dtype=int).reshape(-1, n))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"malformed polynomial field: {exc}") from exc

    def f(x):
        return np.array([c @ np.prod(x ** e, axis=1) if c.size else 0.0
                         for c, e in zip(coeffs, powers)])

    def df(x):
        J = np.zeros((n, n))
        for i, (c, e) in enumerate(zip(coeffs, powers)):
            for j in range(n):
                ej = e.copy()
                fac = ej[:, j].astype(float)
                ej[:, j] = np.maximum(ej[:, j] - 1, 0)
                J[i, j] = (c * fac) @ np.prod(x ** ej, axis=1) if c.size else 0.0
        return J

    return f, df, n


# ---------------------------------------------------------------- equilibria

@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    location: np.ndarray
    jacobian_spectrum: list
    stable_basis: Subspace
    unstable_basis: Subspace
    hyperbolic: bool
    constants: Optional[tuple]


def find_fixed_point(F: SmoothMap, seed, tol=1e-13, max_iter=100):
    """Damped Newton iteration on F(x) - x = 0 starting from ``seed``."""
    x = np.array(seed, dtype=float)
    n = F.dimension
    r = F.evaluate(x) - x
    for _ in range(max_iter):
        nr = np.linalg.norm(r)
        if nr <= tol:
            return x
        J = F.jacobian(x) - np.eye(n)
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        t = 1.0
        while t > 1e-6:
            xt = x + t * step
            rt = F.evaluate(xt) - xt
            if np.linalg.norm(rt) < nr:
                break
            t /= 2
        x, r = xt, rt
    if np.linalg.norm(r) <= 10 * tol:
        return x
    raise ShadowlabError(f"Newton did not converge (residual {np.linalg.norm(r):.3e})")


def _schur_basis(J, inside):
    if inside:
        T, Z, k = sla.schur(J, output="real", sort=lambda re, im: np.hypot(re, im) < 1 - SPECTRAL_TOL)
    else:
        T, Z, k = sla.schur(J, output="real", sort=lambda re, im: np.hypot(re, im) > 1 + SPECTRAL_TOL)
    return Subspace(Z[:, :k]), T[:k, :k]


def hyperbolicity_check(F: SmoothMap, x_star, t_probe=T_PROBE) -> EquilibriumReport:
    """Spectrum, invariant splitting and hyperbolicity constants at a fixed point.

    (C, lambda) satisfy |J^t v| <= C lambda^t |v| on the stable subspace and
    |J^{-t} v| <= C lambda^t |v| on the unstable one, for t = 1..t_probe.
    """
    x_star = np.asarray(x_star, dtype=float)
    fx, J = F.value_and_jacobian(x_star)
    res = float(np.linalg.norm(fx - x_star))
    if res > FIXED_POINT_TOL:
        raise NotAFixedPointError(res)
    sig = np.linalg.svd(J, compute_uv=False)
    if sig[-1] <= INJECTIVITY_TOL * max(1.0, sig[0]):
        raise NotInjectiveError(f"Jacobian is not injective (sigma_min={sig[-1]:.3e})")
    eig = np.linalg.eigvals(J)
    mods = np.abs(eig)
    hyperbolic = bool(np.all(np.abs(mods - 1) > SPECTRAL_TOL))
    S, Ts = _schur_basis(J, inside=True)
    U, Tu = _schur_basis(J, inside=False)
    constants = None
    if hyperbolic:
        rates = []
        if S.dim:
            rates.append(float(np.max(np.abs(np.linalg.eigvals(Ts)))))
        if U.dim:
            rates.append(1.0 / float(np.min(np.abs(np.linalg.eigvals(Tu)))))
        lam = max(rates)
        C = 1.0
        Ps = np.eye(S.dim)
        Pu = np.eye(U.dim)
        Tu_inv = np.linalg.inv(Tu) if U.dim else Tu
        for t in range(1, t_probe + 1):
            if S.dim:
                Ps = Ts @ Ps
                C = max(C, np.linalg.norm(Ps, 2) / lam**t)
            if U.dim:
                Pu = Tu_inv @ Pu
                C = max(C, np.linalg.norm(Pu, 2) / lam**t)
        constants = (float(C), lam)
    order = np.lexsort((eig.imag, eig.real))
    return EquilibriumReport(x_star, [complex(z) for z in eig[order]], S, U, hyperbolic,
                             constants)


# ---------------------------------------------------------------- global constants

def lipschitz_estimate(F: SmoothMap, region=None, sample_count=200, seed=0,
                       safety=LIPSCHITZ_SAFETY) -> float:
    """Sampled sup of the Jacobian operator norm over the region times ``safety``."""
    region = F.region if region is None else region
    if region.empty:
        raise ShadowlabError("empty region")
    if sample_count < 2:
        raise ValueError("sample_count must be >= 2")
    rng = np.random.default_rng(seed)
    pts = region.sample(sample_count, rng)
    best = max(np.linalg.norm(F.jacobian(x), 2) for x in pts)
    return float(safety * best)


@dataclass(frozen=True, eq=False)
class AttractionProfile:
    """Exponential attraction constants dist_H(F^n(U), A) <= C exp(-gamma n)
    together with the Lipschitz constant L1 of F on U."""

    C: float
    gamma: float
    L1: float
    region: object = None
    fit_residual: float = 0.0
    fit_tolerance: float = 0.5
    distances: tuple = ()

    def to_dict(self):
        return {"C": self.C, "gamma": self.gamma, "L1": self.L1,
                "fit_residual": self.fit_residual}


def semi_distance(points, tree):
    """sup over points of the distance to the attractor sample in ``tree``."""
    d, _ = tree.query(np.atleast_2d(points))
    return float(np.max(d))


def exp_attraction_estimate(F: SmoothMap, attractor_sample, region=None, horizon=20,
                            grid_points=21, L1=None, fit_tolerance=0.5,
                            seed=0) -> AttractionProfile:
    """Fit (C, gamma) to the decay of dist_H(F^n(region grid), attractor).

    The slope comes from least squares on log distances; C is then raised to
    the smallest value for which C exp(-gamma n) dominates every sample, and
    clamped to at least 1.  Distances below the map's noise floor are
    dropped from the fit.
    """
    if horizon < 3:
        raise ValueError("horizon must be >= 3")
    A = np.atleast_2d(np.asarray(attractor_sample, dtype=float))
    if A.shape[0] == 1 and A.shape[1] != F.dimension:
        A = A.T
    if A.size == 0:
        raise ValueError("attractor sample is empty")
    region = F.region if region is None else region
    tree = cKDTree(A)
    pts = region.grid(grid_points)
    dists = [semi_distance(pts, tree)]
    floor = F.noise_floor
    for _ in range(horizon):
        pts = np.array([F.evaluate(x) for x in pts])
        dn = semi_distance(pts, tree)
        dists.append(dn)
        if dn <= floor:
            break
    dists = np.array(dists)
    n = np.arange(dists.size)
    keep = dists > floor
    # only the leading run above the floor
    stop = int(np.argmin(keep)) if not np.all(keep) else dists.size
    n_fit, d_fit = n[:stop], dists[:stop]
    if n_fit.size < 2 or not np.any(np.diff(d_fit) < 0):
        raise NoAttractionError("distances to the attractor do not decrease")
    slope, intercept = np.polyfit(n_fit, np.log(d_fit), 1)
    gamma = -float(slope)
    if gamma <= 0:
        raise NoAttractionError("fitted attraction rate is not positive")
    resid = float(np.sqrt(np.mean((np.log(d_fit) - (intercept + slope * n_fit)) ** 2)))
    C = max(1.0, float(np.exp(intercept)), float(np.max(d_fit * np.exp(gamma * n_fit))))
    if resid > fit_tolerance:
        warnings.warn(f"attraction fit residual {resid:.3g} exceeds tolerance {fit_tolerance}")
    if L1 is None:
        L1 = lipschitz_estimate(F, region, seed=seed)
    return AttractionProfile(C, gamma, float(L1), region, resid, fit_tolerance,
                             tuple(float(v) for v in dists))


def birkhoff_number(F: SmoothMap, equilibria, eps, region_grid, cap=BIRKHOFF_CAP) -> int:
    """Smallest t0 such that every grid orbit meets some eps-ball around an
    equilibrium within t0 steps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    E = np.atleast_2d(np.asarray(equilibria, dtype=float))
    tree = cKDTree(E)
    pts = np.atleast_2d(np.asarray(region_grid, dtype=float)).copy()
    if pts.shape[1] != F.dimension:
        pts = pts.reshape(-1, F.dimension)
    active = tree.query(pts)[0] >= eps
    t = 0
    while np.any(active):
        if t >= cap:
            raise BirkhoffCapError(f"{int(active.sum())} orbits did not reach the balls "
                                   f"within {cap} steps")
        for i in np.flatnonzero(active):
            pts[i] = F.evaluate(pts[i])
        t += 1
        active[active] = tree.query(pts[active])[0] >= eps
    return t


def region_invariance_check(F: SmoothMap, count=100, seed=0, slack=1e-9) -> float:
    """Fraction of sampled region points mapped outside the region.

    A positive fraction is reported as a warning; the working region is
    assumed, not proven, to be positively invariant.
    """
    rng = np.random.default_rng(seed)
    pts = F.region.sample(count, rng)
    escaped = sum(not F.region.contains(F.evaluate(x), slack) for x in pts)
    frac = escaped / count
    if escaped:
        warnings.warn(f"{F.label}: {escaped} of {count} sampled points leave the region")
    return frac


def sampled_lipschitz_ratio(F: SmoothMap, region, count=200, seed=0):
    """max |F(x) - F(y)| / |x - y| over random pairs in the region."""
    rng = np.random.default_rng(seed)
    X = region.sample(count, rng)
    Y = region.sample(count, rng)
    best = 0.0
    for x, y in zip(X, Y):
        dx = np.linalg.norm(x - y)
        if dx > 0:
            best = max(best, np.linalg.norm(F.evaluate(x) - F.evaluate(y)) / dx)
    return best


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
