"""Physical observables: moments, level-set recovery, and reference solutions.

Density rho and averaged slowness u are Riemann sums of the phase-space
field.  For measure-valued data the direct route smears badly, so the
level-set pair (psi, phi) evolves bounded fields instead and the singular
integral is evaluated only at output time against a discrete delta kernel.

The exact_* functions and the two-layer ray oracle are closed-form reference
solutions used by the test and acceptance suites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assemble1d import assemble_system_1d
from .engine import integrate
from .errors import ConfigError, DomainError
from .grids import FieldSnapshot, PhaseMesh1D, discrete_delta, sample_speed_1d

#: u is reported only where rho exceeds this fraction of its maximum.
MASK_RTOL = 1e-8


@dataclass(frozen=True)
class MomentProfile:
    """Density (and, in 1D, averaged slowness) on the spatial grid.

    ``mask`` is True where rho is too small for u to mean anything; u holds
    zero there.  2D profiles carry a second coordinate array and no u.
    """

    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray | None = None
    mask: np.ndarray | None = None
    y: np.ndarray | None = None


def _moments_1d(field: FieldSnapshot, with_u: bool) -> MomentProfile:
    mesh = field.mesh
    if not isinstance(mesh, PhaseMesh1D):
        raise ConfigError("expected a 1D phase-space field")
    grid = field.as_grid()
    rho = grid.sum(axis=1) * mesh.dxi
    if not with_u:
        return MomentProfile(x=mesh.x.copy(), rho=rho)
    flux = (grid * mesh.xi[None, :]).sum(axis=1) * mesh.dxi
    mask = np.abs(rho) < MASK_RTOL * max(np.abs(rho).max(), 1e-300)
    u = np.where(mask, 0.0, flux / np.where(mask, 1.0, rho))
    return MomentProfile(x=mesh.x.copy(), rho=rho, u=u, mask=mask)


def density_1d(field: FieldSnapshot) -> MomentProfile:
    """rho_i = sum_j f_ij * dxi."""
    return _moments_1d(field, with_u=False)


def avg_slowness_1d(field: FieldSnapshot) -> MomentProfile:
    """rho as above plus u_i = (sum_j f_ij xi_j dxi) / rho_i, masked where
    rho_i falls below MASK_RTOL times its maximum."""
    return _moments_1d(field, with_u=True)


def density_2d(field: FieldSnapshot) -> MomentProfile:
    """rho(x_i, y_j) by the double Riemann sum over the slowness plane."""
    mesh = field.mesh
    if not hasattr(mesh, "n_eta"):
        raise ConfigError("expected a 2D phase-space field")
    grid = field.as_grid()
    rho = grid.sum(axis=(2, 3)) * mesh.dxi * mesh.deta
    return MomentProfile(x=mesh.x.copy(), rho=rho, y=mesh.y.copy())


# ---------------------------------------------------------------------------
# level-set decomposition


@dataclass(frozen=True)
class LevelSetPair:
    """psi (root locus, initial xi - w(x)) and phi (weight, initial 1).

    Both obey the same transport system, so they share one assembled matrix;
    only the inflow data differ.  Moments come from integrating phi against
    a delta kernel in psi at output time.
    """

    psi: FieldSnapshot
    phi: FieldSnapshot
    psi_system: object
    phi_system: object


def levelset_pair(mesh: PhaseMesh1D, speed, w, coeffs_fn=None) -> LevelSetPair:
    """Initial pair for slowness profile w(x): psi = xi - w(x), phi = 1.

    The two systems share the matrix structure and differ only in the
    boundary vector: psi's ghosts carry xi - w(x) (x and xi edges alike),
    phi's carry 1.  speed may be a raw piecewise profile or one already
    sampled on the mesh.
    """
    from .interfaces import coeffs_1d

    if coeffs_fn is None:
        coeffs_fn = coeffs_1d
    if hasattr(speed, "limits"):
        speed = sample_speed_1d(speed, mesh)
    wv = np.vectorize(w, otypes=[float])

    def inflow_psi(x, xi):
        return xi - float(w(x))

    sys_psi = assemble_system_1d(mesh, speed, inflow=inflow_psi,
                                 coeffs_fn=coeffs_fn)
    sys_phi = assemble_system_1d(mesh, speed, inflow=lambda x, xi: 1.0,
                                 coeffs_fn=coeffs_fn)
    psi0 = mesh.xi[None, :] - wv(mesh.x)[:, None]
    phi0 = np.ones((mesh.n_x, mesh.n_xi))
    return LevelSetPair(
        psi=FieldSnapshot(t=0.0, values=psi0.ravel(), mesh=mesh),
        phi=FieldSnapshot(t=0.0, values=phi0.ravel(), mesh=mesh),
        psi_system=sys_psi,
        phi_system=sys_phi,
    )


def evolve_pair(pair: LevelSetPair, T: float, dt: float,
                method: str = "crank-nicolson") -> LevelSetPair:
    """Advance psi and phi to time T with the same engine and step."""
    psi = integrate(pair.psi_system, pair.psi, T, method=method, dt=dt)
    phi = integrate(pair.phi_system, pair.phi, T, method=method, dt=dt)
    return LevelSetPair(psi=psi, phi=phi, psi_system=pair.psi_system,
                        phi_system=pair.phi_system)


def levelset_moments(pair: LevelSetPair, beta: float) -> MomentProfile:
    """rho_i = sum_j phi_ij delta_beta(psi_ij) dxi and the xi-weighted u.

    beta is the delta half-width, typically a small multiple of dxi.
    """
    mesh = pair.psi.mesh
    psi = pair.psi.as_grid()
    phi = pair.phi.as_grid()
    kern = discrete_delta(psi, beta)
    rho = (phi * kern).sum(axis=1) * mesh.dxi
    flux = (phi * kern * mesh.xi[None, :]).sum(axis=1) * mesh.dxi
    mask = np.abs(rho) < MASK_RTOL * max(np.abs(rho).max(), 1e-300)
    u = np.where(mask, 0.0, flux / np.where(mask, 1.0, rho))
    return MomentProfile(x=mesh.x.copy(), rho=rho, u=u, mask=mask)


# ---------------------------------------------------------------------------
# closed-form reference solutions


def _branch_sqrt(arg):
    return np.sqrt(np.maximum(arg, 0.0))


def exact_example1(x, xi=None, t: float = 1.0):
    """Piecewise-exact solution of the 0.6/0.2 speed-jump problem at t = 1.

    With xi given, returns f(x, xi, 1): the region transmitted across the
    interface carries the plateau 3/4, the region reflected back carries
    1/4, and the bulk stays at 1.  Without xi, returns the moment pair
    (rho(x,1), u(x,1)).  Only t = 1 is available.
    """
    if t != 1.0:
        raise DomainError("reference solution is available at t = 1 only")
    aT, aR = 0.75, 0.25
    x = np.asarray(x, dtype=float)
    if xi is not None:
        xi = np.asarray(xi, dtype=float)
        x, xi = np.broadcast_arrays(x, xi)
        f = np.zeros(x.shape)
        s1 = _branch_sqrt(1.0 - (0.2 - x) ** 2)
        s2 = 1.5 * _branch_sqrt(1.0 - (3.0 * x - 0.6) ** 2)
        s3 = _branch_sqrt(1.0 - (x + 0.2) ** 2)
        s4 = 0.5 * _branch_sqrt(1.0 - (x - 0.6) ** 2)
        s5 = _branch_sqrt(1.0 - (x / 3.0 + 0.2) ** 2) / 3.0
        s6 = 0.5 * _branch_sqrt(1.0 - (x + 0.6) ** 2)
        in02 = (x > 0) & (x < 0.2)
        f = np.where(in02 & (xi > s1) & (xi < s2), aT, f)
        f = np.where(in02 & (xi > 0) & (xi < s1), 1.0, f)
        f = np.where((x > 0) & (x < 0.8) & (xi > -s3) & (xi < 0), 1.0, f)
        f = np.where((x > -0.4) & (x < 0) & (xi > 0) & (xi < s4), 1.0, f)
        neg = (x > -0.6) & (x < 0)
        f = np.where(neg & (xi > -s5) & (xi < 0), 1.0, f)
        f = np.where(neg & (xi > -s6) & (xi < -s5), aR, f)
        return f

    rho = np.zeros(x.shape)
    num = np.zeros(x.shape)  # 2 * rho * u before division
    mid = (x > 0.2) & (x < 0.8)
    rho = np.where(mid, _branch_sqrt(1.0 - (x + 0.2) ** 2), rho)
    num = np.where(mid, -(1.0 - (x + 0.2) ** 2), num)
    lo2 = (x > 0) & (x <= 0.2)
    rho = np.where(lo2,
                   1.5 * aT * _branch_sqrt(1.0 - (3 * x - 0.6) ** 2)
                   + aR * _branch_sqrt(1.0 - (0.2 - x) ** 2)
                   + _branch_sqrt(1.0 - (x + 0.2) ** 2), rho)
    num = np.where(lo2,
                   2.25 * aT * np.maximum(1.0 - (3 * x - 0.6) ** 2, 0.0)
                   + aR * np.maximum(1.0 - (0.2 - x) ** 2, 0.0)
                   - np.maximum(1.0 - (x + 0.2) ** 2, 0.0), num)
    left = (x > -0.6) & (x <= 0)
    base_r = aT / 3.0 * _branch_sqrt(1.0 - (x / 3.0 + 0.2) ** 2) \
        + aR / 2.0 * _branch_sqrt(1.0 - (x + 0.6) ** 2)
    base_n = -aT / 9.0 * np.maximum(1.0 - (x / 3.0 + 0.2) ** 2, 0.0) \
        - aR / 4.0 * np.maximum(1.0 - (x + 0.6) ** 2, 0.0)
    extra_r = 0.5 * _branch_sqrt(1.0 - (x - 0.6) ** 2)
    extra_n = 0.25 * np.maximum(1.0 - (x - 0.6) ** 2, 0.0)
    inner = x > -0.4
    rho = np.where(left, base_r + np.where(inner, extra_r, 0.0), rho)
    num = np.where(left, base_n + np.where(inner, extra_n, 0.0), num)
    safe = rho > 0
    u = np.where(safe, num / np.where(safe, 2.0 * rho, 1.0), 0.0)
    return rho, u


def _upsilon(z):
    return 0.5 - 0.4 / 1.6 ** 2 * np.asarray(z) ** 2


def exact_example2(x, t: float = 1.0):
    """Plateau density and multivalued-average slowness for the speed well.

    c = 0.6 inside (-0.4, 0.4) against 1 outside gives alphaR = 1/16 and
    alphaT = 15/16; the printed rho is a staircase of plateaus and u is a
    combination of the parabola Upsilon under shifted/scaled arguments.
    Only t = 1.
    """
    if t != 1.0:
        raise DomainError("reference solution is available at t = 1 only")
    aR, aT = 1.0 / 16.0, 15.0 / 16.0
    x = np.asarray(x, dtype=float)
    third = 1.0 / 3.0

    rho_edges = [-1.4, -0.4 - third, -0.4, -0.2, 0.2, 0.4, 0.4 + third, 1.4]
    rho_vals = [1.0, 1.0 + aR, 1.0 + aR + 0.6 * aT, 1.0 + aR + aT / 0.6,
                aT / 0.3, 1.0 + aR + aT / 0.6, 1.0 + aR + 0.6 * aT,
                1.0 + aR, 1.0]
    rho = np.full(x.shape, rho_vals[0])
    for edge, val in zip(rho_edges, rho_vals[1:]):
        rho = np.where(x >= edge, val, rho)

    U = _upsilon
    u_branches = [
        0.5 * np.ones(x.shape),
        0.5 - aR * U(x + 0.2),
        0.5 - aR * U(x + 0.2) - 0.36 * aT * U(0.6 * x - 1.16),
        U(x + 0.6) - aR * U(x + 0.2) - 0.36 * aT * U(0.6 * x - 1.16),
        aT / 0.36 * U(x / 0.6 + 13.0 / 15.0) - U(x - 1.0) + aR * U(x + 1.8),
        aT / 0.36 * U(x / 0.6 + 13.0 / 15.0)
        - aT / 0.36 * U(x / 0.6 - 13.0 / 15.0),
        -aT / 0.36 * U(x / 0.6 - 13.0 / 15.0) + U(x + 1.0) - aR * U(x - 1.8),
        -U(x - 0.6) + aR * U(x - 0.2) + 0.36 * aT * U(0.6 * x + 1.16),
        -0.5 + aR * U(x - 0.2) + 0.36 * aT * U(0.6 * x + 1.16),
        -0.5 + aR * U(x - 0.2),
        -0.5 * np.ones(x.shape),
    ]
    u_edges = [-1.4, -0.4 - third, -0.6, -0.4, -0.2, 0.2, 0.4, 0.6,
               0.4 + third, 1.4]
    num = u_branches[0]
    for edge, branch in zip(u_edges, u_branches[1:]):
        num = np.where(x >= edge, branch, num)
    return rho, num / rho


# ---------------------------------------------------------------------------
# two-layer ray oracle (flat interface, piecewise-constant speed)


def ray_oracle_2d(x, y, xi, eta, t, c_below, c_above, f0,
                  y_interface: float = 0.0):
    """f(x, y, xi, eta, t) for a flat two-layer medium by backward rays.

    Straight-segment backward tracing: a segment that never meets the
    interface is pure transport; one that does splits into the transmitted
    preimage (slowness rescaled so c|v| is preserved, tangential component
    kept) weighted alphaT and the mirrored preimage weighted alphaR.  When
    the transmit discriminant is nonpositive the mirrored preimage carries
    everything.  f0 must accept vectorized (x, y, xi, eta).

    x, y are scalars (one spatial query point); xi, eta may be arrays.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    xi, eta = np.broadcast_arrays(xi, eta)
    y_rel = float(y) - y_interface
    if y_rel == 0.0:
        raise DomainError("query point on the interface is ambiguous")
    c_here = c_above if y_rel > 0 else c_below
    c_other = c_below if y_rel > 0 else c_above

    r = np.hypot(xi, eta)
    still = r == 0.0
    rs = np.where(still, 1.0, r)
    x0 = x - c_here * t * xi / rs
    y0 = y_rel - c_here * t * eta / rs

    out = np.empty(xi.shape)
    direct = still | (np.sign(y0) == np.sign(y_rel)) | (y0 == 0.0)
    out[direct] = f0(x0[direct], y0[direct] + y_interface,
                     xi[direct], eta[direct])

    cr = ~direct
    if np.any(cr):
        xi_c, eta_c, r_c = xi[cr], eta[cr], r[cr]
        s = y_rel * r_c / (c_here * eta_c)          # backward time to impact
        if np.any((s <= 0) | (s > t)):
            raise DomainError("backward trace inconsistent; multiple "
                              "interface crossings are not supported")
        x_c = x - c_here * s * xi_c / r_c
        tau = t - s
        # mirrored preimage: continue on this side with eta negated
        x_r = x_c - c_here * tau * xi_c / r_c
        y_r = c_here * tau * eta_c / r_c            # same sign as y_rel
        val_r = f0(x_r, y_r + y_interface, xi_c, -eta_c)
        # preimage on the far side: c_other |v_o| = c_here |v|
        disc = (c_here / c_other) ** 2 * r_c ** 2 - xi_c ** 2
        open_ = disc > 0.0
        val = val_r.copy()
        if np.any(open_):
            eta_o = np.sign(eta_c[open_]) * np.sqrt(disc[open_])
            r_o = np.hypot(xi_c[open_], eta_o)
            x_t = x_c[open_] - c_other * tau[open_] * xi_c[open_] / r_o
            y_t = -c_other * tau[open_] * eta_o / r_o
            val_t = f0(x_t, y_t + y_interface, xi_c[open_], eta_o)
            # oblique reflection share from the two normal cosines; the
            # squared ratio is symmetric in the side labels
            g_here = np.abs(eta_c[open_]) / r_c[open_]
            g_other = np.abs(eta_o) / r_o
            num = c_here * g_other - c_other * g_here
            den = c_here * g_other + c_other * g_here
            a_R = (num / den) ** 2
            val[open_] = (1.0 - a_R) * val_t + a_R * val_r[open_]
        out[cr] = val
    return out


def oracle_density_2d(mesh, t, c_below, c_above, f0, n_quad: int = 201):
    """Reference rho(x_i, y_j, t) by ray tracing on a fine slowness grid.

    Midpoint quadrature with n_quad^2 nodes over the mesh's slowness box.
    """
    lo_x, hi_x = mesh.xi_min, mesh.xi_max
    lo_e, hi_e = mesh.eta_min, mesh.eta_max
    dq_x = (hi_x - lo_x) / n_quad
    dq_e = (hi_e - lo_e) / n_quad
    q_xi = lo_x + dq_x * (np.arange(n_quad) + 0.5)
    q_eta = lo_e + dq_e * (np.arange(n_quad) + 0.5)
    QX, QE = np.meshgrid(q_xi, q_eta, indexing="ij")
    rho = np.empty((mesh.n_x, mesh.n_y))
    for i, xv in enumerate(mesh.x):
        for j, yv in enumerate(mesh.y):
            vals = ray_oracle_2d(xv, yv, QX, QE, t, c_below, c_above, f0)
            rho[i, j] = vals.sum() * dq_x * dq_e
    return MomentProfile(x=mesh.x.copy(), rho=rho, y=mesh.y.copy())
