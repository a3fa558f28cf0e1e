"""Command line run driver.

One subcommand, ``run``, executes a builtin example (ex1..ex4, advection) or
a custom problem described by a key=value config file, in one of four modes:

    classical    assemble and step f' = A f + b directly
    schrod       warped-phase unitary pipeline, recovered at p*
    compare      both of the above plus their field differences
    convergence  refinement ladder against the closed-form references

Artifacts land in --outdir: field.csv, moments.csv, report.json, optionally
matrix.coo and convergence.csv.  Outputs are bit-identical across reruns of
the same configuration (reports carry no timings or timestamps).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .assemble1d import assemble_advection_interface, assemble_system_1d, write_coo_text
from .assemble2d import assemble_system_2d
from .engine import cfl_dt, integrate
from .errors import ConfigError, LiouvoptError, MemoryBudgetError
from .grids import (FieldSnapshot, PhaseMesh1D, PiecewiseSpeed1D, PiecewiseSpeed2D,
                    build_mesh_1d, build_mesh_2d, discrete_delta, init_delta_field_1d,
                    mesh_from_config, parse_config, sample_speed_1d, sample_speed_2d,
                    speed_from_config, write_field_csv)
from .interfaces import full_transmission
from .observables import (LevelSetPair, MomentProfile, avg_slowness_1d,
                          density_2d, evolve_pair, exact_example1,
                          exact_example2, levelset_moments, levelset_pair)
from .schrod import run_pipeline

BYTES_PER_COMPLEX = 16
DEFAULT_MEM_CAP_GIB = 8.0


# ---------------------------------------------------------------------------
# example profiles


def w_example2(x: float) -> float:
    """Initial slowness profile of the speed-well example."""
    if x <= -1.6:
        return 0.5
    if x <= 0.0:
        return 0.5 - 0.4 / 1.6 ** 2 * (x + 1.6) ** 2
    if x < 1.6:
        return -0.5 + 0.4 / 1.6 ** 2 * (x - 1.6) ** 2
    return -0.5


def w_example3(x: float) -> float:
    """Initial slowness profile of the level-set example."""
    if x <= -1.5:
        return 0.8
    if x <= 0.0:
        return 0.8 - 0.8 / 1.5 ** 2 * (x + 1.5) ** 2
    if x < 1.5:
        return -0.8 + 0.8 / 1.5 ** 2 * (x - 1.5) ** 2
    return -0.8


_C3_BASE = 1.0 / (math.e - 1.0)


def speed_example3() -> PiecewiseSpeed1D:
    """Growing/decaying profile with one genuine 0.5 jump at x = 0."""
    return PiecewiseSpeed1D(
        breaks=[-1.0, 0.0, 1.0],
        pieces=[_C3_BASE,
                lambda x: _C3_BASE + 1.0 + x,
                lambda x: _C3_BASE + 0.5 - x,
                _C3_BASE - 0.5])


def f0_example1(x, xi):
    left = (x < 0) & (xi > 0) & (np.sqrt(x ** 2 + 4 * xi ** 2) < 1)
    right = (x > 0) & (xi < 0) & (np.sqrt(x ** 2 + xi ** 2) < 1)
    return np.where(left | right, 1.0, 0.0)


EX4_WIDTHS = (0.03, 0.025, 0.05, 0.025)


def f0_example4(x, y, xi, eta):
    c1, c2, c3, c4 = EX4_WIDTHS
    return (1.0 / (math.pi * c3 * c4)) * np.exp(
        -(x / c1) ** 2 - ((y + 0.1) / c2) ** 2
        - (xi / c3) ** 2 - ((eta - 0.1) / c4) ** 2)


# ---------------------------------------------------------------------------
# run configuration


_MODES = ("classical", "schrod", "compare", "convergence")
_PROBLEMS = ("ex1", "ex2", "ex3", "ex4", "advection", "custom")


@dataclass
class RunConfig:
    problem: str
    mode: str = "classical"
    nx: int = None
    nxi: int = None
    ny: int = None
    neta: int = None
    dt: float = None
    horizon: float = None
    engine: str = "crank-nicolson"
    schrod_engine: str = "crank-nicolson"
    n_p: int = None
    eps_target: float = 1.0
    alpha_minus: float = 1.0
    p_star: float = None
    beta_factor: float = None
    levels: tuple = ()
    outdir: str = "runout"
    threads: int = 1
    dump_matrix: bool = False
    mem_cap_gib: float = DEFAULT_MEM_CAP_GIB
    custom_text: str = None

    def __post_init__(self):
        if self.problem not in _PROBLEMS:
            raise ConfigError(
                f"unknown problem {self.problem!r}; choose from {', '.join(_PROBLEMS)}")
        if self.mode not in _MODES:
            raise ConfigError(
                f"unknown mode {self.mode!r}; choose from {', '.join(_MODES)}")
        if self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")


_PRESET_DEFAULTS = {
    # nx, nxi, dt, T, n_p
    "ex1": (128, 128, 0.02, 1.0, 2 ** 14),
    "ex2": (128, 128, 0.02, 1.0, 2 ** 14),
    "ex3": (128, 128, 0.02, 1.0, 2 ** 14),
    "ex4": (8, 8, 0.01, 0.12, 2 ** 12),
    "advection": (64, None, None, 0.5, 2 ** 10),
}


def _resolved(cfg: RunConfig) -> RunConfig:
    """Fill unset mesh/time fields from the problem preset."""
    if cfg.problem == "custom":
        if not cfg.custom_text:
            raise ConfigError("problem 'custom' needs a --config file")
        return cfg
    nx, nxi, dt, T, n_p = _PRESET_DEFAULTS[cfg.problem]
    cfg.nx = cfg.nx or nx
    cfg.nxi = cfg.nxi or nxi
    if cfg.problem == "ex4":
        cfg.ny = cfg.ny or nx
        cfg.neta = cfg.neta or nxi
    if cfg.dt is None:
        cfg.dt = dt
    if cfg.horizon is None:
        cfg.horizon = T
    cfg.n_p = cfg.n_p or n_p
    if cfg.problem == "ex3":
        if cfg.beta_factor is None:
            cfg.beta_factor = 6.0
        if cfg.p_star is None:
            cfg.p_star = 14.513
    if cfg.problem == "ex2" and cfg.beta_factor is None:
        cfg.beta_factor = 1.0
    return cfg


# ---------------------------------------------------------------------------
# problem assembly


def _build_1d(cfg: RunConfig):
    """Mesh, sampled speed, initial snapshot, and system for 1D problems."""
    if cfg.problem == "ex1":
        mesh = build_mesh_1d((-1.5, 1.5), (-1.6, 1.6), cfg.nx, cfg.nxi)
        speed = sample_speed_1d(PiecewiseSpeed1D(breaks=[0.0], pieces=[0.6, 0.2]), mesh)
        x, xi = np.meshgrid(mesh.x, mesh.xi, indexing="ij")
        f0 = FieldSnapshot(0.0, f0_example1(x, xi).ravel(), mesh)
        system = assemble_system_1d(mesh, speed)
        return mesh, speed, f0, system
    if cfg.problem == "ex2":
        mesh = build_mesh_1d((-1.5, 1.5), (-1.0, 1.0), cfg.nx, cfg.nxi)
        # the well edges +-0.4 fall inside cells on this domain; snap them
        # to the nearest cell edge (an O(dx) shift) so the jump is seen
        snap = lambda b: mesh.x_min + round((b - mesh.x_min) / mesh.dx) * mesh.dx
        speed = sample_speed_1d(
            PiecewiseSpeed1D(breaks=[snap(-0.4), snap(0.4)],
                             pieces=[1.0, 0.6, 1.0]), mesh)
        beta = cfg.beta_factor * mesh.dxi
        f0 = init_delta_field_1d(w_example2, beta, mesh)
        inflow = lambda x, xi: discrete_delta(xi - w_example2(x), beta)
        system = assemble_system_1d(mesh, speed, inflow=inflow)
        return mesh, speed, f0, system
    if cfg.problem == "custom":
        mesh = mesh_from_config(cfg.custom_text)
        speed = sample_speed_1d(speed_from_config(cfg.custom_text), mesh)
        raw = parse_config(cfg.custom_text)
        expr = raw.get("f0")
        if not expr:
            raise ConfigError("custom problem needs an 'f0 = <expr in x, xi>' line")
        from .grids import _compile_expr
        f0_fn = _compile_expr(expr[0], ("x", "xi"))
        x, xi = np.meshgrid(mesh.x, mesh.xi, indexing="ij")
        f0 = FieldSnapshot(0.0, np.broadcast_to(f0_fn(x, xi), x.shape).ravel().copy(), mesh)
        system = assemble_system_1d(mesh, speed)
        return mesh, speed, f0, system
    raise ConfigError(f"problem {cfg.problem} is not a direct 1D run")


def _build_ex4(cfg: RunConfig):
    mesh = build_mesh_2d((-0.12, 0.12), (-0.2, 0.2), (-0.2, 0.2), (-0.2, 0.2),
                         cfg.nx, cfg.ny, cfg.nxi, cfg.neta)
    speed = sample_speed_2d(
        PiecewiseSpeed2D(x_breaks=[], y_breaks=[0.0], pieces=[[1.0], [2.0]]), mesh)
    x, y, xi, eta = np.meshgrid(mesh.x, mesh.y, mesh.xi, mesh.eta, indexing="ij")
    f0 = FieldSnapshot(0.0, f0_example4(x, y, xi, eta).ravel(), mesh)
    system = assemble_system_2d(mesh, speed)
    return mesh, speed, f0, system


def _memory_preflight(n: int, n_p: int, cap_gib: float) -> int:
    est = BYTES_PER_COMPLEX * (2 * n) * n_p
    cap = int(cap_gib * 2 ** 30)
    if est >= cap:
        raise MemoryBudgetError(
            f"warped-state estimate {est / 2**30:.2f} GiB exceeds the "
            f"{cap_gib:g} GiB cap (state 2n={2*n}, modes={n_p}); lower --np "
            "or the mesh, or raise --mem-cap-gib")
    return est


def _l1(a: np.ndarray, b: np.ndarray, cell: float) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).sum() * cell)


def _capture_schrod(system, f0, cfg: RunConfig, dt: float, report_bag: dict,
                    label: str = "schrod"):
    """run_pipeline with warnings recorded into the report."""
    _memory_preflight(system.n, cfg.n_p, cfg.mem_cap_gib)
    rep: dict = {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        snap = run_pipeline(system, f0, cfg.horizon, n_p=cfg.n_p,
                            eps_target=cfg.eps_target,
                            alpha_minus=cfg.alpha_minus, p_star=cfg.p_star,
                            engine=cfg.schrod_engine, dt=dt,
                            threads=cfg.threads, report=rep)
    rep.pop("timings", None)
    rep["warnings"] = sorted(str(w.message) for w in caught)
    report_bag[label] = rep
    return snap


# ---------------------------------------------------------------------------
# output helpers


def _write_moments_csv(profile: MomentProfile, path: Path) -> None:
    with open(path, "w") as fh:
        if profile.y is None:
            fh.write("x,rho,u\n")
            u = profile.u if profile.u is not None else np.zeros_like(profile.rho)
            for x, r, uu in zip(profile.x, profile.rho, u):
                fh.write(f"{float(x)!r},{float(r)!r},{float(uu)!r}\n")
        else:
            fh.write("x,y,rho\n")
            for i, x in enumerate(profile.x):
                for j, y in enumerate(profile.y):
                    fh.write(f"{float(x)!r},{float(y)!r},{float(profile.rho[i, j])!r}\n")


def _write_field_csv_2d(snapshot: FieldSnapshot, path: Path) -> None:
    mesh = snapshot.mesh
    grid = snapshot.as_grid()
    with open(path, "w") as fh:
        fh.write("x,y,xi,eta,f\n")
        for i, x in enumerate(mesh.x):
            for j, y in enumerate(mesh.y):
                for k, xi in enumerate(mesh.xi):
                    for l, eta in enumerate(mesh.eta):
                        fh.write(f"{float(x)!r},{float(y)!r},{float(xi)!r},"
                                 f"{float(eta)!r},{float(grid[i, j, k, l])!r}\n")


def _write_field(snap, outdir: Path, name: str) -> None:
    if isinstance(snap, FieldSnapshot) and isinstance(snap.mesh, PhaseMesh1D):
        write_field_csv(snap, outdir / name)
    elif isinstance(snap, FieldSnapshot):
        _write_field_csv_2d(snap, outdir / name)
    else:  # bare vector (advection warm-up)
        np.savetxt(outdir / name, np.asarray(snap), header="u", comments="")


# ---------------------------------------------------------------------------
# per-problem drivers


def _run_phase_space(cfg: RunConfig, outdir: Path, report: dict):
    if cfg.problem == "ex4":
        mesh, speed, f0, system = _build_ex4(cfg)
        cell = mesh.dx * mesh.dy * mesh.dxi * mesh.deta
        moments = density_2d
    else:
        mesh, speed, f0, system = _build_1d(cfg)
        cell = mesh.dx * mesh.dxi
        moments = avg_slowness_1d

    cfl = cfl_dt(mesh, speed)
    dt = cfg.dt if cfg.dt is not None else cfl.dt
    report["dt"] = dt
    report["cfl_dt_max"] = cfl.dt_max
    report["audit"] = {k: int(v) if isinstance(v, (int, np.integer)) else float(v)
                       for k, v in vars(system.audit).items()}
    if cfg.dump_matrix:
        write_coo_text(system.A, outdir / "matrix.coo")

    results = {}
    if cfg.mode in ("classical", "compare"):
        snap = integrate(system, f0, cfg.horizon, method=cfg.engine, dt=dt)
        results["classical"] = snap
        report["mass_initial"] = float(f0.values.sum() * cell)
        report["mass_final"] = float(snap.values.sum() * cell)
        report["min_f"] = float(snap.values.min())
    if cfg.mode in ("schrod", "compare"):
        snap = _capture_schrod(system, f0.values, cfg, dt, report)
        results["schrod"] = snap

    primary = results.get("classical", results.get("schrod"))
    _write_field(primary, outdir, "field.csv")
    if cfg.mode == "compare":
        _write_field(results["schrod"], outdir, "field_schrod.csv")
        diff = results["classical"].values - results["schrod"].values
        report["diff_linf"] = float(np.abs(diff).max())
        report["diff_l1"] = float(np.abs(diff).sum() * cell)
    _write_moments_csv(moments(primary), outdir / "moments.csv")
    return report


def _run_ex3(cfg: RunConfig, outdir: Path, report: dict):
    mesh = build_mesh_1d((-1.5, 1.5), (-1.0, 1.0), cfg.nx, cfg.nxi)
    pair = levelset_pair(mesh, speed_example3(), w_example3,
                         coeffs_fn=full_transmission)
    cfl = cfl_dt(mesh, sample_speed_1d(speed_example3(), mesh))
    dt = cfg.dt if cfg.dt is not None else cfl.dt
    beta = cfg.beta_factor * mesh.dxi
    report["dt"] = dt
    report["cfl_dt_max"] = cfl.dt_max
    report["beta"] = beta
    if cfg.dump_matrix:
        write_coo_text(pair.psi_system.A, outdir / "matrix.coo")

    profiles = {}
    if cfg.mode in ("classical", "compare"):
        evolved = evolve_pair(pair, cfg.horizon, dt, method=cfg.engine)
        _write_field(evolved.psi, outdir, "field.csv")
        _write_field(evolved.phi, outdir, "field_phi.csv")
        profiles["classical"] = levelset_moments(evolved, beta)
    if cfg.mode in ("schrod", "compare"):
        psi_T = _capture_schrod(pair.psi_system, pair.psi.values, cfg, dt,
                                report, label="schrod_psi")
        phi_T = _capture_schrod(pair.phi_system, pair.phi.values, cfg, dt,
                                report, label="schrod_phi")
        evolved = LevelSetPair(psi=psi_T, phi=phi_T,
                               psi_system=pair.psi_system,
                               phi_system=pair.phi_system)
        if cfg.mode == "schrod":
            _write_field(psi_T, outdir, "field.csv")
            _write_field(phi_T, outdir, "field_phi.csv")
        profiles["schrod"] = levelset_moments(evolved, beta)

    primary = profiles.get("classical", profiles.get("schrod"))
    _write_moments_csv(primary, outdir / "moments.csv")
    if cfg.mode == "compare":
        report["diff_linf"] = float(np.abs(profiles["classical"].rho
                                           - profiles["schrod"].rho).max())
        report["diff_l1"] = _l1(profiles["classical"].rho,
                                profiles["schrod"].rho, mesh.dx)
    return report


def _run_advection(cfg: RunConfig, outdir: Path, report: dict):
    a, c_minus, c_plus = 1.0, 1.0, 2.0
    system = assemble_advection_interface(cfg.nx, a, c_minus, c_plus)
    dx = a / cfg.nx
    nodes = dx * np.arange(-(cfg.nx - 1), cfg.nx + 1)
    u0 = np.exp(-((nodes + 0.5) / 0.15) ** 2)
    dt = cfg.dt if cfg.dt is not None else 0.9 * dx / max(abs(c_minus), abs(c_plus))
    report["dt"] = dt
    if cfg.dump_matrix:
        write_coo_text(system.A, outdir / "matrix.coo")

    results = {}
    if cfg.mode in ("classical", "compare"):
        results["classical"] = integrate(system, u0, cfg.horizon,
                                         method=cfg.engine, dt=dt)
    if cfg.mode in ("schrod", "compare"):
        results["schrod"] = _capture_schrod(system, u0, cfg, dt, report)

    primary = results.get("classical", results.get("schrod"))
    with open(outdir / "field.csv", "w") as fh:
        fh.write("x,u\n")
        for x, u in zip(nodes, np.asarray(primary)):
            fh.write(f"{float(x)!r},{float(u)!r}\n")
    if cfg.mode == "compare":
        diff = np.asarray(results["classical"]) - np.asarray(results["schrod"])
        report["diff_linf"] = float(np.abs(diff).max())
        report["diff_l1"] = float(np.abs(diff).sum() * dx)
    return report


def _run_convergence(cfg: RunConfig, outdir: Path, report: dict):
    if cfg.problem not in ("ex1", "ex2"):
        raise ConfigError(
            "convergence mode needs a closed-form reference (ex1 or ex2)")
    levels = cfg.levels or (32, 64, 128)
    nx_ref, _, dt_ref, T, _ = _PRESET_DEFAULTS[cfg.problem]
    rows = []
    for n in levels:
        sub = RunConfig(problem=cfg.problem, mode="classical", nx=int(n),
                        nxi=int(n), engine=cfg.engine,
                        beta_factor=cfg.beta_factor)
        sub = _resolved(sub)
        sub.dt = dt_ref * nx_ref / int(n)
        mesh, speed, f0, system = _build_1d(sub)
        snap = integrate(system, f0, T, method=cfg.engine, dt=sub.dt)
        prof = avg_slowness_1d(snap)
        if cfg.problem == "ex1":
            x, xi = np.meshgrid(mesh.x, mesh.xi, indexing="ij")
            f_ex = exact_example1(x, xi)
            rho_ex, u_ex = exact_example1(mesh.x)
            errs = {"f": _l1(snap.as_grid(), f_ex, mesh.dx * mesh.dxi),
                    "rho": _l1(prof.rho, rho_ex, mesh.dx),
                    "u": _l1(np.where(prof.mask, 0.0, prof.u),
                             np.where(prof.mask, 0.0, u_ex), mesh.dx)}
        else:
            rho_ex, u_ex = exact_example2(mesh.x)
            errs = {"rho": _l1(prof.rho, rho_ex, mesh.dx),
                    "u": _l1(prof.u, u_ex, mesh.dx)}
        rows.append((int(n), sub.dt, errs))

    table = []
    for metric in rows[0][2]:
        prev = None
        for n, dt, errs in rows:
            err = errs[metric]
            order = math.log2(prev / err) if prev else float("nan")
            table.append((metric, n, dt, err, order))
            prev = err
    with open(outdir / "convergence.csv", "w") as fh:
        fh.write("metric,n,dt,l1_error,order\n")
        for metric, n, dt, err, order in table:
            fh.write(f"{metric},{n},{float(dt)!r},{float(err)!r},{float(order)!r}\n")
    report["levels"] = [int(n) for n in levels]
    report["orders"] = {m: [o for mm, _, _, _, o in table if mm == m][1:]
                        for m in rows[0][2]}
    return report


# ---------------------------------------------------------------------------
# entry point


def run(cfg: RunConfig) -> dict:
    """Execute one configured run; returns the report dict (also written)."""
    cfg = _resolved(cfg)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    report: dict = {
        "problem": cfg.problem, "mode": cfg.mode, "nx": cfg.nx,
        "nxi": cfg.nxi, "horizon": cfg.horizon, "engine": cfg.engine,
    }
    if cfg.mode == "convergence":
        _run_convergence(cfg, outdir, report)
    elif cfg.problem == "ex3":
        _run_ex3(cfg, outdir, report)
    elif cfg.problem == "advection":
        _run_advection(cfg, outdir, report)
    else:
        _run_phase_space(cfg, outdir, report)
    with open(outdir / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return report


_CONFIG_KEYS = {
    "problem": str, "mode": str, "nx": int, "nxi": int, "ny": int, "neta": int,
    "dt": float, "horizon": float, "engine": str, "schrod_engine": str,
    "np": int, "eps_target": float, "alpha_minus": float, "pstar": float,
    "beta_factor": float, "levels": str, "outdir": str, "threads": int,
    "mem_cap_gib": float,
}
_RESERVED_KEYS = {"xdomain", "xidomain", "speed", "f0"}  # custom-problem keys


def _parse_levels(text: str) -> tuple:
    parts = [p for chunk in text.split(",") for p in chunk.split()]
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"levels must be integers, got {text!r}") from None


def _config_from_file(path: str) -> dict:
    text = Path(path).read_text()
    raw = parse_config(text)
    out = {"custom_text": text}
    for key, values in raw.items():
        if key in _RESERVED_KEYS:
            continue
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        if len(values) > 1:
            raise ConfigError(f"{path}: config key {key!r} given more than once")
        conv = _CONFIG_KEYS[key]
        field_name = {"np": "n_p", "pstar": "p_star"}.get(key, key)
        out[field_name] = _parse_levels(values[0]) if key == "levels" else conv(values[0])
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liouvopt",
        description="Phase-space transport runs, classical and warped-phase.")
    sub = parser.add_subparsers(dest="command", required=True)
    rp = sub.add_parser("run", help="execute one configured problem")
    rp.add_argument("problem", nargs="?", choices=_PROBLEMS,
                    help="builtin example id or 'custom' (with --config)")
    rp.add_argument("--config", help="key=value config file")
    rp.add_argument("--mode", choices=_MODES)
    rp.add_argument("--nx", type=int)
    rp.add_argument("--nxi", type=int)
    rp.add_argument("--ny", type=int)
    rp.add_argument("--neta", type=int)
    rp.add_argument("--dt", type=float)
    rp.add_argument("--horizon", "-T", type=float, dest="horizon")
    rp.add_argument("--engine", help="classical stepper: crank-nicolson | forward-euler")
    rp.add_argument("--schrod-engine", dest="schrod_engine",
                    help="pipeline stepper: crank-nicolson | backward-euler | exact-exponential")
    rp.add_argument("--np", type=int, dest="n_p", help="auxiliary mode count (power of two)")
    rp.add_argument("--eps-target", type=float, dest="eps_target")
    rp.add_argument("--alpha-minus", type=float, dest="alpha_minus")
    rp.add_argument("--pstar", type=float, dest="p_star")
    rp.add_argument("--beta-factor", type=float, dest="beta_factor",
                    help="delta kernel width as a multiple of dxi")
    rp.add_argument("--levels", type=str, help="refinement ladder, e.g. 32,64,128")
    rp.add_argument("--outdir")
    rp.add_argument("--threads", type=int)
    rp.add_argument("--dump-matrix", action="store_true", dest="dump_matrix",
                    default=None)
    rp.add_argument("--mem-cap-gib", type=float, dest="mem_cap_gib")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        settings: dict = {}
        if args.config:
            settings.update(_config_from_file(args.config))
        field_names = {f.name for f in fields(RunConfig)}
        for name in field_names:
            value = getattr(args, name, None)
            if value is not None:
                settings[name] = value
        if isinstance(settings.get("levels"), str):
            settings["levels"] = _parse_levels(settings["levels"])
        if "problem" not in settings:
            parser.error("a problem id (or --config with a 'problem =' line) is required")
        cfg = RunConfig(**{k: v for k, v in settings.items() if k in field_names})
        report = run(cfg)
    except LiouvoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    summary = {k: report[k] for k in ("problem", "mode") if k in report}
    print(f"wrote {Path(cfg.outdir).resolve()}: {json.dumps(summary)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
