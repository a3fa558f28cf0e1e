"""Classical reference integrators for the assembled systems f' = A f + b.

Forward Euler (explicit, CFL-limited) and Crank-Nicolson (implicit,
unconditionally stable) with a shared stepping plan that shortens the final
step to land exactly on T.  The CFL bound is evaluated from the mesh/speed
metadata, independent of the assembled matrix, so the two can be checked
against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assemble1d import advection_rates_1d
from .assemble2d import advection_rates_2d
from .errors import ConfigError, ConvergenceError, StabilityError
from .grids import FieldSnapshot, PhaseMesh1D, PhaseMesh2D

# dimension below which Crank-Nicolson uses a direct sparse factorization
DIRECT_SOLVE_LIMIT = 10_000
CN_TOL = 1e-10
_SAFETY = 0.9


@dataclass(frozen=True)
class CflReport:
    """Forward-Euler stability bound of an assembled transport system."""

    dt: float          # recommended step: the stability limit times 0.9
    dt_max: float      # largest dt with dt * max_rate <= 1
    max_rate: float    # worst per-cell outgoing rate (|diagonal| of A)
    cell: tuple        # grid index attaining the maximum


def cfl_dt(mesh, speed) -> CflReport:
    """Stability report from the per-cell transport and advection rates.

    The rate per cell is c/dx (direction-weighted and split over dx, dy in
    2D) plus the local slowness-advection magnitudes; its inverse is the
    largest stable forward-Euler step.
    """
    if isinstance(mesh, PhaseMesh1D):
        rate = (speed.c_cell / mesh.dx)[:, None] \
            + np.abs(advection_rates_1d(mesh, speed))
    elif isinstance(mesh, PhaseMesh2D):
        rt = np.hypot(mesh.xi[:, None], mesh.eta[None, :])
        v = np.abs(mesh.xi)[:, None] / (rt * mesh.dx) \
            + np.abs(mesh.eta)[None, :] / (rt * mesh.dy)
        d_x, d_y = advection_rates_2d(mesh, speed)
        rate = (speed.c_cell[:, :, None, None] * v[None, None, :, :]
                + np.abs(d_x) + np.abs(d_y))
    else:
        raise ConfigError(f"unsupported mesh type {type(mesh).__name__}")
    flat = int(np.argmax(rate))
    max_rate = float(rate.ravel()[flat])
    dt_max = 1.0 / max_rate
    return CflReport(dt=_SAFETY * dt_max, dt_max=dt_max, max_rate=max_rate,
                     cell=tuple(int(v) for v in np.unravel_index(flat, rate.shape)))


def _step_plan(T: float, dt: float):
    if not np.isfinite(T) or T < 0:
        raise ConfigError(f"final time must be a finite nonnegative number, got {T}")
    if not np.isfinite(dt) or dt <= 0:
        raise ConfigError(f"time step must be positive, got {dt}")
    if T == 0:
        return 0, dt
    n_steps = max(1, int(math.ceil(T / dt - 1e-9)))
    return n_steps, T - (n_steps - 1) * dt


def integrate(system, f0, T: float, method: str = "crank-nicolson",
              dt: float = None, solver: str = "auto"):
    """Advance f' = A f + b from f0 to time T with fixed steps of dt.

    method is "forward-euler" (alias "fe") or "crank-nicolson" ("cn"); the
    final step is shortened to land exactly on T.  Forward Euler refuses
    steps above the stability limit read off the matrix diagonal.  The CN
    linear solves are direct (factorize once) below DIRECT_SOLVE_LIMIT
    unknowns, otherwise iterative with diagonal preconditioning to rtol
    1e-10; ``solver`` forces "direct" or "iterative".

    Returns a FieldSnapshot at t=T when the system carries a mesh, else the
    raw array (the scalar advection warm-up system has no phase mesh).
    """
    A, b = system.A, system.b
    n = A.shape[0]
    f = f0.values if isinstance(f0, FieldSnapshot) else f0
    f = np.asarray(f, dtype=float).ravel().copy()
    if f.size != n:
        raise ConfigError(f"initial field length {f.size}, system dimension {n}")
    name = {"forward-euler": "fe", "fe": "fe",
            "crank-nicolson": "cn", "cn": "cn"}.get(method)
    if name is None:
        raise ConfigError(f"unknown integration method {method!r}")
    if solver not in ("auto", "direct", "iterative"):
        raise ConfigError(f"unknown solver choice {solver!r}")
    if dt is None:
        raise ConfigError("an explicit dt is required")
    n_steps, last = _step_plan(T, dt)

    if name == "fe":
        diag_max = float(np.abs(A.diagonal()).max()) if n else 0.0
        if dt * diag_max > 1.0 + 1e-9:
            raise StabilityError(
                f"forward-Euler step {dt:g} exceeds the stability limit "
                f"{1.0 / diag_max:.6g}")
        for s in range(n_steps):
            h = dt if s < n_steps - 1 else last
            f = f + h * (A @ f + b)
    elif n_steps:
        f = _crank_nicolson(A, b, f, dt, n_steps, last, solver)

    mesh = getattr(system, "mesh", None)
    if mesh is None:
        return f
    return FieldSnapshot(t=T, values=f, mesh=mesh)


def _cn_stage(A, h: float, direct: bool):
    # Half-step matrices and a solver closure for one step size.
    n = A.shape[0]
    ident = sp.identity(n, format="csr")
    M_im = (ident - 0.5 * h * A).tocsc()
    M_ex = (ident + 0.5 * h * A).tocsr()
    if direct:
        lu = spla.splu(M_im)
        return M_ex, lambda rhs, x0: lu.solve(rhs)
    M_im = M_im.tocsr()
    dinv = 1.0 / M_im.diagonal()
    precond = spla.LinearOperator((n, n), matvec=lambda v: dinv * v,
                                  dtype=M_im.dtype)

    def solve(rhs, x0):
        x, info = spla.bicgstab(M_im, rhs, x0=x0, rtol=CN_TOL, atol=0.0,
                                M=precond)
        if info != 0:
            resid = float(np.linalg.norm(M_im @ x - rhs))
            raise ConvergenceError(
                f"Crank-Nicolson solve stalled (info={info}, "
                f"residual {resid:.3e}, rtol {CN_TOL})", history=[resid])
        return x

    return M_ex, solve


def _crank_nicolson(A, b, f, dt, n_steps, last, solver):
    direct = solver == "direct" or (solver == "auto"
                                    and A.shape[0] < DIRECT_SOLVE_LIMIT)
    M_ex, solve = _cn_stage(A, dt, direct)
    for s in range(n_steps):
        h = dt
        if s == n_steps - 1:
            h = last
            if abs(last - dt) > 1e-12 * dt:
                M_ex, solve = _cn_stage(A, last, direct)
        f = solve(M_ex @ f + h * b, f)
    return f
