"""Pipelines behind the command line: build a system and a pseudo-orbit,
shadow it, evaluate bounds and write reports."""
import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .bounds import (attractor_continuity_bound, distance_bound, holder_exponent,
                     perturbation_defect)
from .core import (exp_attraction_estimate, find_fixed_point, hyperbolicity_check, make_system,
                   region_invariance_check)
from .errors import ConfigError, OrbitFormatError, ShadowlabError
from .orbits import generate_noisy, saddle_crossing, true_orbit, unstable_manifold_curve
from .solver import shadow_pseudo_orbit, verify_certificate
from .splitting import PseudoOrbit, build_splitting

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_HYPOTHESIS = 2

PRESET_DEFAULTS = {
    "linear_diag": {"params": {"diag": [0.5, 2.0]}, "window": 60, "mu": 0.5},
    "radial": {"params": {"dimension": 1, "h": 0.1}, "window": 200, "mu": 0.5,
               "start": [2.5]},
    "double_well_gradient": {"params": {"dimension": 2, "h": 0.5, "bend": 0.5, "tol": 1e-11},
                             "window": 64, "mu": 0.3},
    "custom": {"params": {}, "window": 60, "mu": 0.5},
}

FORMULAS = {
    "mu": "target contraction of the power map on stable directions",
    "nu0": "largest of 1/2, 1/4, ... with (1 + nu0) mu < 1",
    "lam": "lam = (1 + nu0) mu",
    "M": "max_k max(|P_k|, |I - P_k|) over the frames of F and F^N",
    "K": "max(M, max_k |D F^N(z_k)|)",
    "nu": "nu = 0.9 k1 / (2 K (2K + 1))",
    "k1": "k1 = min(0.9 / N1, 0.9 nu0)",
    "N1": "N1 = M (1 + lam) / (1 - lam)",
    "Delta": "largest radius with |D F^N(z + v) - D F^N(z)| <= k1 / 2",
    "d1": "d1 = Delta / L",
    "L": "L = N1 / (1 - k1 N1)",
    "N": "smallest N with C_tilde lambda1^(N-1) <= mu",
    "nu_measured": "splitting invariance defect of the F^N frame",
    "C1": "C1 = 1 + L1 + ... + L1^(N-1)",
    "L_star": "L* = (1 + L1 + ... + L1^N) L",
    "d0": "d0 = min(Delta, d1) / C1",
    "L1": "1.05 max_k |DF(x_k)| along the orbit",
}


@dataclass
class ExperimentConfig:
    preset: str = "linear_diag"
    params: dict = field(default_factory=dict)
    orbit_source: str = "generate_noisy"
    orbit_path: Optional[str] = None
    start: Optional[list] = None
    noise_level: float = 1e-5
    window: Optional[int] = None
    boundary_mode: str = "free"
    unstable_dim: Optional[int] = None
    mu: Optional[float] = None
    warmup: int = 10
    seed: int = 0
    output_dir: str = "shadowlab-out"
    d_values: list = field(default_factory=lambda: [1e-3, 1e-4, 1e-5, 1e-6])
    alpha_target: Optional[float] = None
    perturbation: dict = field(default_factory=lambda: {"param": "tilt", "value": 1e-5})
    profile_horizon: int = 20

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def resolved(self):
        """Copy with preset defaults filled in, validated."""
        if self.preset not in PRESET_DEFAULTS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        dflt = PRESET_DEFAULTS[self.preset]
        params = dict(dflt["params"])
        params.update(self.params or {})
        cfg = dataclasses.replace(
            self, params=params,
            window=self.window if self.window is not None else dflt["window"],
            mu=self.mu if self.mu is not None else dflt["mu"],
            start=self.start if self.start is not None else dflt.get("start"))
        if cfg.orbit_source not in ("generate_noisy", "load_csv"):
            raise ConfigError(f"unknown orbit source {cfg.orbit_source!r}")
        if cfg.orbit_source == "generate_noisy" and not 0 < cfg.noise_level < 1:
            raise ConfigError("noise_level must lie in (0, 1)")
        if cfg.orbit_source == "load_csv" and not cfg.orbit_path:
            raise ConfigError("load_csv needs orbit_path")
        if cfg.boundary_mode not in ("free", "periodic"):
            raise ConfigError(f"unknown boundary mode {cfg.boundary_mode!r}")
        if not 0 < cfg.mu < 1:
            raise ConfigError("mu must lie in (0, 1)")
        if cfg.window < 2:
            raise ConfigError("window must be >= 2")
        return cfg

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass
class RunReport:
    exit_code: int
    verb: str
    config: dict
    status: str
    reason: Optional[str] = None
    stage: Optional[str] = None
    system: Optional[dict] = None
    orbit: Optional[dict] = None
    certificate: Optional[dict] = None
    bounds: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    timing_ms: dict = field(default_factory=dict)

    def to_dict(self, include_timing=True):
        out = dataclasses.asdict(self)
        if not include_timing:
            out.pop("timing_ms")
        return out

    def deterministic_json(self):
        return io.dumps_report(self.to_dict(include_timing=False))


class _Stages:
    def __init__(self):
        self.timing = {}
        self.current = None

    def run(self, name, fn, *args, **kwargs):
        self.current = name
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.timing[name] = round(1000 * (time.perf_counter() - t0), 3)


# ---------------------------------------------------------------- building blocks

def build_system(cfg: ExperimentConfig, overrides=None):
    params = dict(cfg.params)
    params.update(overrides or {})
    try:
        return make_system(cfg.preset, params)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid system parameters: {exc}") from exc


def base_orbit(F, cfg: ExperimentConfig):
    """True orbit on which noise is laid."""
    n = F.dimension
    if cfg.preset == "double_well_gradient" and cfg.start is None:
        if n < 2:
            raise ConfigError("the double-well crossing needs dimension >= 2")
        return saddle_crossing(F, cfg.window)
    if cfg.preset == "linear_diag" and cfg.start is None:
        return np.zeros((cfg.window, n))
    if cfg.start is None:
        raise ConfigError("config needs a start state for this preset")
    x0 = np.asarray(cfg.start, dtype=float)
    if x0.shape != (n,):
        raise ConfigError(f"start must have {n} components")
    return true_orbit(F, x0, cfg.window)


def make_orbit(F, cfg: ExperimentConfig, d=None):
    if cfg.orbit_source == "load_csv":
        X = io.load_orbit_csv(cfg.orbit_path)
        if X.shape[1] != F.dimension:
            raise OrbitFormatError(f"orbit has {X.shape[1]} columns, system has "
                                   f"dimension {F.dimension}", 1)
        return PseudoOrbit.from_states(F, X, cfg.boundary_mode)
    d = cfg.noise_level if d is None else d
    return generate_noisy(F, base_orbit(F, cfg), d, cfg.seed, cfg.boundary_mode)


def infer_unstable_dim(F, orbit):
    """Unstable dimension of the equilibrium nearest to the slowest state."""
    disp = [np.linalg.norm(F.evaluate(x) - x) for x in orbit.states]
    x = find_fixed_point(F, orbit.states[int(np.argmin(disp))])
    rep = hyperbolicity_check(F, x)
    return rep.unstable_basis.dim


def attractor_sample(F, cfg):
    """Sample of the global attractor of a preset on its region."""
    if cfg.preset == "double_well_gradient":
        return unstable_manifold_curve(F)
    if cfg.preset == "radial" and F.dimension == 1:
        return np.linspace(-2.0, 2.0, 2001)[:, None]
    if cfg.preset == "linear_diag":
        diag = np.asarray(F.params["diag"])
        if np.all(np.abs(diag) < 1):
            return np.zeros((1, F.dimension))
        raise ConfigError("linear_diag has a bounded attractor only when |diag| < 1")
    raise ConfigError(f"no attractor sample for preset {cfg.preset!r}")


def constants_ledger(cert):
    c = cert.constants.to_dict()
    c.update({"C1": cert.C1, "L_star": cert.L_star, "d0": cert.d0, "L1": cert.L1})
    return {k: {"value": v, "formula": FORMULAS.get(k, "")} for k, v in sorted(c.items())}


def certificate_dict(cert):
    out = cert.summary()
    out["contraction_ratios"] = list(cert.contraction_ratios)
    out["constants"] = cert.constants.to_dict()
    return out


def _failure(exc):
    if isinstance(exc, (ConfigError, OrbitFormatError, OSError)):
        return EXIT_IO
    return EXIT_HYPOTHESIS


def _finish(report, out_dir, write=True):
    if write and out_dir is not None:
        io.write_json(Path(out_dir) / "report.json", report.to_dict())
    return report


def _prepare(cfg, out_dir):
    cfg = cfg.resolved()
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    return cfg


# ---------------------------------------------------------------- verbs

def run_experiment(config: ExperimentConfig, write=True) -> RunReport:
    """Generate or load a pseudo-orbit, shadow it and write the outputs.

    Exit codes: 0 for a valid certificate, 2 when a hypothesis of the
    shadowing argument fails or the certificate is invalid, 1 for
    configuration and I/O errors.
    """
    st = _Stages()
    report = RunReport(EXIT_OK, "shadow", config.to_dict(), "ok")
    out_dir = config.output_dir if write else None
    try:
        cfg = st.run("config", _prepare, config, out_dir)
        report.config = cfg.to_dict()
        F = st.run("system", build_system, cfg)
        report.system = F.describe()
        report.system["region_escape_fraction"] = st.run(
            "region", region_invariance_check, F, seed=cfg.seed)
        orbit = st.run("orbit", make_orbit, F, cfg)
        report.orbit = {"length": orbit.length, "defect": orbit.defect,
                        "boundary_mode": orbit.boundary_mode}
        if out_dir is not None:
            io.save_orbit_csv(Path(out_dir) / "orbit.csv", orbit.states)
        u = cfg.unstable_dim
        if u is None:
            u = st.run("unstable_dim", infer_unstable_dim, F, orbit)
        report.extra["unstable_dim"] = int(u)
        cert = st.run("shadow", shadow_pseudo_orbit, F, orbit, u, cfg.mu, cfg.warmup,
                      seed=cfg.seed)
        report.certificate = certificate_dict(cert)
        report.constants = constants_ledger(cert)
        report.bounds["lipschitz_shadowing"] = {
            "value": cert.bound, "formula": "L* d",
            "L_star": cert.L_star, "d": cert.input_defect}
        ok = st.run("verify", verify_certificate, F, orbit, cert, cert.bound)
        report.certificate["reverified"] = bool(ok)
        if out_dir is not None:
            io.save_orbit_csv(Path(out_dir) / "shadow.csv", cert.refined_states,
                              extra={"error": cert.errors})
        if not (cert.valid and ok):
            report.exit_code, report.status = EXIT_HYPOTHESIS, "invalid"
            report.reason = "certificate invalid: measured error or residual out of bounds"
    except ShadowlabError as exc:
        report.exit_code, report.status = _failure(exc), "failed"
        report.reason, report.stage = str(exc), st.current
    except OSError as exc:
        report.exit_code, report.status = EXIT_IO, "failed"
        report.reason, report.stage = str(exc), st.current
    report.timing_ms = st.timing
    return _finish(report, out_dir, write)


def sweep(config: ExperimentConfig, d_values=None, write=True) -> RunReport:
    """Shadow one pseudo-orbit per defect level and fit the log-log slope of
    the sup error against d."""
    d_values = list(config.d_values if d_values is None else d_values)
    st = _Stages()
    report = RunReport(EXIT_OK, "sweep", config.to_dict(), "ok")
    out_dir = config.output_dir if write else None
    rows = []
    try:
        cfg = st.run("config", _prepare, config, out_dir)
        report.config = cfg.to_dict()
        if len(d_values) < 3:
            raise ConfigError("sweep needs at least 3 d values")
        if any(not 0 < d < 1 for d in d_values):
            raise ConfigError("d values must lie in (0, 1)")
        if max(d_values) / min(d_values) < 100:
            raise ConfigError("insufficient span: d values must cover 2 decades")
        F = st.run("system", build_system, cfg)
        report.system = F.describe()
        base = st.run("orbit", base_orbit, F, cfg)
        u = cfg.unstable_dim
        if u is None:
            u = st.run("unstable_dim", infer_unstable_dim, F,
                       PseudoOrbit.from_states(F, base, cfg.boundary_mode))
        runs = []
        for d in sorted(d_values, reverse=True):
            orbit = generate_noisy(F, base, d, cfg.seed, cfg.boundary_mode)
            cert = st.run(f"shadow[{d:g}]", shadow_pseudo_orbit, F, orbit, u, cfg.mu,
                          cfg.warmup, seed=cfg.seed)
            rows.append((orbit.defect, cert.measured_sup_error, cert.bound))
            runs.append({"d": d, **certificate_dict(cert)})
            if not cert.valid:
                raise ShadowlabError(f"certificate invalid at d={d:g}")
        x = np.log([r[0] for r in rows])
        y = np.log([r[1] for r in rows])
        slope = float(np.polyfit(x, y, 1)[0])
        report.extra = {"slope": slope, "runs": runs, "unstable_dim": int(u)}
    except ShadowlabError as exc:
        report.exit_code, report.status = _failure(exc), "failed"
        report.reason, report.stage = str(exc), st.current
        report.extra.setdefault("completed", len(rows))
    if out_dir is not None and rows:
        io.write_sweep_csv(Path(out_dir) / "sweep.csv", rows)
    report.extra["rows"] = [list(r) for r in rows]
    report.timing_ms = st.timing
    return _finish(report, out_dir, write)


def profile_for(F, cfg, seed=0):
    A = attractor_sample(F, cfg)
    return exp_attraction_estimate(F, A, horizon=cfg.profile_horizon, seed=seed)


def iterate_lipschitz(F, horizon, sample_count=50, seed=0):
    """L_n = 1.05 max |D F^n| over region samples, n = 1..horizon."""
    rng = np.random.default_rng(seed)
    pts = F.region.sample(sample_count, rng)
    J = np.array([np.eye(F.dimension)] * sample_count)
    L = []
    for _ in range(horizon):
        for i in range(sample_count):
            pts[i], step = F.value_and_jacobian(pts[i])
            J[i] = step @ J[i]
        L.append(1.05 * max(np.linalg.norm(j, 2) for j in J))
    return L


def bounds_report(config: ExperimentConfig, write=True) -> RunReport:
    """Attraction profile of a preset and the distance bounds it implies."""
    st = _Stages()
    report = RunReport(EXIT_OK, "bounds", config.to_dict(), "ok")
    out_dir = config.output_dir if write else None
    try:
        cfg = st.run("config", _prepare, config, out_dir)
        report.config = cfg.to_dict()
        F = st.run("system", build_system, cfg)
        report.system = F.describe()
        prof = st.run("profile", profile_for, F, cfg, cfg.seed)
        report.extra["profile"] = prof.to_dict()
        report.extra["attraction_distances"] = list(prof.distances)
        hb = distance_bound(prof, cfg.noise_level)
        report.bounds["distance"] = hb.to_dict()
        if hb.regime == "holder":
            report.bounds["beta_star"] = holder_exponent(prof)[0]
        if cfg.alpha_target is not None:
            Ln = st.run("iterate_lipschitz", iterate_lipschitz, F, cfg.profile_horizon,
                        seed=cfg.seed)
            cb = attractor_continuity_bound(Ln, prof, cfg.alpha_target,
                                            float(cfg.perturbation.get("value", 0.0)))
            report.bounds["continuity"] = cb.to_dict()
    except ShadowlabError as exc:
        report.exit_code, report.status = _failure(exc), "failed"
        report.reason, report.stage = str(exc), st.current
    report.timing_ms = st.timing
    return _finish(report, out_dir, write)


def inspect_splitting(config: ExperimentConfig, write=True) -> RunReport:
    """Build and verify the stable/unstable frame along the configured orbit."""
    st = _Stages()
    report = RunReport(EXIT_OK, "inspect-splitting", config.to_dict(), "ok")
    out_dir = config.output_dir if write else None
    try:
        cfg = st.run("config", _prepare, config, out_dir)
        report.config = cfg.to_dict()
        F = st.run("system", build_system, cfg)
        report.system = F.describe()
        orbit = st.run("orbit", make_orbit, F, cfg)
        report.orbit = {"length": orbit.length, "defect": orbit.defect,
                        "boundary_mode": orbit.boundary_mode}
        u = cfg.unstable_dim
        if u is None:
            u = st.run("unstable_dim", infer_unstable_dim, F, orbit)
        frame = st.run("splitting", build_splitting, F, orbit, u, cfg.warmup, seed=cfg.seed)
        report.extra["frame"] = frame.to_dict()
        report.extra["unstable_dim"] = int(u)
    except ShadowlabError as exc:
        report.exit_code, report.status = _failure(exc), "failed"
        report.reason, report.stage = str(exc), st.current
    report.timing_ms = st.timing
    return _finish(report, out_dir, write)


def perturb(config: ExperimentConfig, write=True) -> RunReport:
    """Shadow a true orbit of a perturbed system by an orbit of the original.

    The perturbation adds ``perturbation["value"]`` to the system parameter
    ``perturbation["param"]``; the re-targeted defect is the map difference
    along the perturbed orbit.
    """
    st = _Stages()
    report = RunReport(EXIT_OK, "perturb", config.to_dict(), "ok")
    out_dir = config.output_dir if write else None
    try:
        cfg = st.run("config", _prepare, config, out_dir)
        report.config = cfg.to_dict()
        name = cfg.perturbation.get("param", "tilt")
        eps = float(cfg.perturbation.get("value", 1e-5))
        F0 = st.run("system", build_system, cfg)
        F_eps = build_system(cfg, {name: float(cfg.params.get(name, 0.0)) + eps})
        report.system = F0.describe()
        X = st.run("orbit", base_orbit, F_eps, cfg)
        orbit_eps = PseudoOrbit.from_states(F_eps, X, cfg.boundary_mode)
        orbit0 = st.run("retarget", perturbation_defect, F0, F_eps, orbit_eps)
        report.orbit = {"length": orbit0.length, "defect": orbit0.defect,
                        "boundary_mode": orbit0.boundary_mode, "perturbation": eps}
        u = cfg.unstable_dim
        if u is None:
            u = st.run("unstable_dim", infer_unstable_dim, F0, orbit0)
        cert = st.run("shadow", shadow_pseudo_orbit, F0, orbit0, u, cfg.mu, cfg.warmup,
                      seed=cfg.seed)
        report.certificate = certificate_dict(cert)
        report.constants = constants_ledger(cert)
        report.bounds["orbit_distance"] = {"value": cert.bound, "formula": "L* delta_eps",
                                           "delta_eps": orbit0.defect}
        if not cert.valid:
            report.exit_code, report.status = EXIT_HYPOTHESIS, "invalid"
            report.reason = "certificate invalid"
    except ShadowlabError as exc:
        report.exit_code, report.status = _failure(exc), "failed"
        report.reason, report.stage = str(exc), st.current
    report.timing_ms = st.timing
    return _finish(report, out_dir, write)
