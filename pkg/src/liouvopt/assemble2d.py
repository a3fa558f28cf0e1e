"""Sparse assembly of the 2D semi-discrete interface transport system.

Extends the 1D construction to (x, y, xi, eta): upwind x- and y-flux
matrices whose interface couplings carry oblique-incidence transmission and
reflection (including total internal reflection where no real transmitted
normal slowness exists), plus two signed-upwind slowness-advection matrices
driven by the in-cell speed slopes.  A direct flux evaluator transcribing
the oblique interface recipe verbatim serves as the independent oracle for
the matrix encoding.

The x- and y-flux builds share one axis-agnostic core; an interface line is
always normal to a grid axis, so the y build is the x build with the roles
of (x, xi) and (y, eta) swapped.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .assemble1d import (_col_max, _interp_preimage, _reject_time_varying,
                         _row_max, masked_hat_rows, ratio_column_bound)
from .grids import PhaseMesh2D, WaveSpeed2D
from .interfaces import coeffs_2d, step_gates_2d, transmit_test_2d


@dataclass(frozen=True)
class SparsityAudit2D:
    """Per-component nonzero counts and norm of an assembled 2D system."""

    s_r_x: int        # max nonzeros per row of the x-flux part
    s_c_x: int        # max nonzeros per column of the x-flux part
    q1: int           # x-interface ratio bound on s_c_x
    s_r_y: int
    s_c_y: int
    q2: int
    s_r_xi: int       # row count of the xi-advection tridiagonal
    s_r_eta: int
    max_norm: float

    def ok(self) -> bool:
        return (self.s_r_x <= 4 and self.s_c_x <= self.q1
                and self.s_r_y <= 4 and self.s_c_y <= self.q2)


@dataclass
class SparseSystem2D:
    """Assembled ODE system f' = A f + b with its four building blocks."""

    A: sp.csr_matrix
    b: np.ndarray
    n: int
    transport_x: sp.csr_matrix
    transport_y: sp.csr_matrix
    advection_xi: sp.csr_matrix
    advection_eta: sp.csr_matrix
    audit: SparsityAudit2D
    mesh: PhaseMesh2D = None
    edge_hits: int = 0


# ---------------------------------------------------------------------------
# Axis-agnostic flux assembly
# ---------------------------------------------------------------------------

@dataclass
class _AxisView:
    """One advected axis of the 4D layout, positions first.

    ``flat(a, t, q, s)`` maps (cell along the axis, transverse cell,
    advected slowness slot, transverse slowness slot) to the global index;
    ``coord(pos, t, q, s)`` builds the matching inflow arguments with
    ``pos`` the physical position along the axis.
    """

    label: str
    n_a: int
    n_t: int
    nodes: np.ndarray      # advected slowness nodes
    tang: np.ndarray       # transverse slowness nodes
    da: float              # cell width along the axis
    dnode: float           # advected slowness spacing
    lo: float
    hi: float
    cm: np.ndarray         # (n_a+1, n_t) minus-side face limits
    cp: np.ndarray
    c: np.ndarray          # (n_a, n_t) cell speeds
    ifc: np.ndarray        # (n_a+1, n_t) jump mask
    flat: Callable
    coord: Callable


def _axis_view(mesh: PhaseMesh2D, speed: WaveSpeed2D, axis: int) -> _AxisView:
    n_y, n_xi, n_eta = mesh.n_y, mesh.n_xi, mesh.n_eta
    if axis == 0:
        return _AxisView(
            label="x", n_a=mesh.n_x, n_t=n_y, nodes=mesh.xi, tang=mesh.eta,
            da=mesh.dx, dnode=mesh.dxi, lo=mesh.x_min, hi=mesh.x_max,
            cm=speed.cm_x, cp=speed.cp_x, c=speed.c_cell, ifc=speed.ifc_x,
            flat=lambda a, t, q, s: ((a * n_y + t) * n_xi + q) * n_eta + s,
            coord=lambda p, t, q, s: (p, mesh.y[t], mesh.xi[q], mesh.eta[s]))
    return _AxisView(
        label="y", n_a=n_y, n_t=mesh.n_x, nodes=mesh.eta, tang=mesh.xi,
        da=mesh.dy, dnode=mesh.deta, lo=mesh.y_min, hi=mesh.y_max,
        cm=speed.cm_y.T, cp=speed.cp_y.T, c=speed.c_cell.T, ifc=speed.ifc_y.T,
        flat=lambda a, t, q, s: ((t * n_y + a) * n_xi + s) * n_eta + q,
        coord=lambda p, t, q, s: (mesh.x[t], p, mesh.xi[s], mesh.eta[q]))


def _assemble_axis_flux(mesh: PhaseMesh2D, view: _AxisView, inflow):
    nodes, tang = view.nodes, view.tang
    nq, ns = nodes.size, tang.size
    qh = nq // 2
    da, flat = view.da, view.flat

    rt = np.hypot(nodes[:, None], tang[None, :])
    vfac = nodes[:, None] / rt        # signed direction factor, (nq, ns)

    q_all = np.arange(nq)
    q_neg = np.arange(qh)
    q_pos = np.arange(qh, nq)
    mirror = nq - 1 - q_all
    tt = np.arange(view.n_t)
    ss = np.arange(ns)

    rows, cols, vals = [], [], []

    def put(r, k, v):
        r, k, v = np.broadcast_arrays(r, k, v)
        rows.append(r.ravel())
        cols.append(k.ravel())
        vals.append(np.asarray(v, dtype=float).ravel())

    # outgoing-flux diagonal on every cell
    aa = np.arange(view.n_a)
    diag_idx = flat(aa[:, None, None, None], tt[None, :, None, None],
                    q_all[None, None, :, None], ss[None, None, None, :])
    put(diag_idx, diag_idx,
        view.c[:, :, None, None] * np.abs(vfac)[None, None, :, :] / da)

    # plain upwind coupling across continuous interior faces
    for a in range(1, view.n_a):
        jc = tt[~view.ifc[a]]
        if jc.size == 0:
            continue
        r = flat(a, jc[:, None, None], q_pos[None, :, None], ss[None, None, :])
        k = flat(a - 1, jc[:, None, None], q_pos[None, :, None], ss[None, None, :])
        put(r, k, -view.c[a, jc][:, None, None] * vfac[None, qh:, :] / da)
        r = flat(a - 1, jc[:, None, None], q_neg[None, :, None], ss[None, None, :])
        k = flat(a, jc[:, None, None], q_neg[None, :, None], ss[None, None, :])
        put(r, k, view.c[a - 1, jc][:, None, None] * vfac[None, :qh, :] / da)

    # oblique transmission/reflection couplings at speed jumps
    edge_hits = 0
    tang2 = tang[None, :] ** 2
    for a, t in zip(*np.nonzero(view.ifc)):
        cmn, cpl = view.cm[a, t], view.cp[a, t]
        for sign_pos in (True, False):
            if sign_pos:
                qq, row_cell, src_cell = q_pos, a, a - 1
                ratio2 = (cpl / cmn) ** 2
            else:
                qq, row_cell, src_cell = q_neg, a - 1, a
                ratio2 = (cmn / cpl) ** 2
            c_row = view.c[row_cell, t]
            vf = np.abs(vfac[qq, :])
            disc = ratio2 * nodes[qq, None] ** 2 + (ratio2 - 1.0) * tang2
            open_ = disc > 0.0
            a_R = np.ones_like(disc)
            a_T = np.zeros_like(disc)
            if open_.any():
                root = np.sqrt(disc[open_])
                g_row = vf[open_]
                g_pre = root / np.sqrt(
                    disc[open_] + np.broadcast_to(tang2, disc.shape)[open_])
                gm, gp = (g_pre, g_row) if sign_pos else (g_row, g_pre)
                refl = ((cpl * gm - cmn * gp) / (cpl * gm + cmn * gp)) ** 2
                a_R[open_] = refl
                a_T[open_] = 1.0 - refl

            r = flat(row_cell, t, qq[:, None], ss[None, :])
            k = flat(row_cell, t, mirror[qq][:, None], ss[None, :])
            put(r, k, -c_row * vf * a_R / da)

            if open_.any():
                src = root if sign_pos else -root
                pos, node_cols, wts, hits = masked_hat_rows(src, nodes, view.dnode)
                edge_hits += hits
                oq, os_ = np.nonzero(open_)
                qsel = qq[oq[pos]]
                ssel = os_[pos]
                put(flat(row_cell, t, qsel, ssel),
                    flat(src_cell, t, node_cols, ssel),
                    -c_row * vf[open_][pos] * a_T[open_][pos] * wts / da)

    n = mesh.size
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()

    if edge_hits:
        warnings.warn(
            f"{edge_hits} transmitted slowness value(s) landed on the last "
            f"{view.label}-normal slowness node; interpolation degraded to "
            "the single-node weight", RuntimeWarning, stacklevel=3)

    b = np.zeros(n)
    if inflow is not None:
        _reject_time_varying(inflow, 4)
        ghost_lo = view.lo - 0.5 * da
        ghost_hi = view.hi + 0.5 * da
        for t in range(view.n_t):
            for qi in q_pos:
                for si in range(ns):
                    val = float(inflow(*view.coord(ghost_lo, t, qi, si)))
                    b[flat(0, t, qi, si)] = -view.c[0, t] * vfac[qi, si] / da * val
            for qi in q_neg:
                for si in range(ns):
                    val = float(inflow(*view.coord(ghost_hi, t, qi, si)))
                    b[flat(view.n_a - 1, t, qi, si)] = \
                        view.c[-1, t] * vfac[qi, si] / da * val
    return A, b, edge_hits


def assemble_xflux_2d(mesh: PhaseMesh2D, speed: WaveSpeed2D, inflow=None):
    """Assemble the x-flux matrix A1 and its boundary vector b1.

    Returns (A1, b1, edge_hits).  Each cell carries the outgoing-flux
    diagonal c_ij |xi_k| / (dx sqrt(xi^2+eta^2)); at x-interfaces the upwind
    coupling splits into a hat-interpolated transmission into the neighbour
    cell (gated off where the discriminant is nonpositive) and a reflection
    onto the mirrored xi slot of the row's own cell.  b1 carries the ghost
    inflow at the two x boundaries (zero vector for inflow=None).
    """
    return _assemble_axis_flux(mesh, _axis_view(mesh, speed, 0), inflow)


def assemble_yflux_2d(mesh: PhaseMesh2D, speed: WaveSpeed2D, inflow=None):
    """Mirror of assemble_xflux_2d for the y direction (eta slots)."""
    return _assemble_axis_flux(mesh, _axis_view(mesh, speed, 1), inflow)


# ---------------------------------------------------------------------------
# Slowness-advection parts
# ---------------------------------------------------------------------------

def advection_rates_2d(mesh: PhaseMesh2D, speed: WaveSpeed2D):
    """Signed slowness-advection rates (d_x, d_y), each of shape mesh.shape.

    d_x[i,j,k,l] = -(in-cell x-slope of c)/dxi * sqrt(xi_k^2 + eta_l^2) and
    d_y with the y slope over deta; both vanish for piecewise-constant c.
    """
    rt = np.hypot(mesh.xi[:, None], mesh.eta[None, :])
    sx = -(speed.cm_x[1:, :] - speed.cp_x[:-1, :]) / (mesh.dx * mesh.dxi)
    sy = -(speed.cm_y[:, 1:] - speed.cp_y[:, :-1]) / (mesh.dy * mesh.deta)
    return (sx[:, :, None, None] * rt[None, None, :, :],
            sy[:, :, None, None] * rt[None, None, :, :])


def _tridiag_advection(mesh: PhaseMesh2D, d: np.ndarray, axis: int):
    # Signed-upwind tridiagonal along one slowness axis of the 4D layout:
    # diagonal |d|, one-sided neighbours -(|d|+-d)/2.
    idx = np.arange(mesh.size).reshape(mesh.shape)
    absd = np.abs(d)
    lower = 0.5 * (absd + d)
    upper = 0.5 * (absd - d)

    def cut(arr, s):
        key = [slice(None)] * 4
        key[axis] = s
        return arr[tuple(key)]

    rows, cols, vals = [], [], []
    keep = absd != 0.0
    rows.append(idx[keep]); cols.append(idx[keep]); vals.append(absd[keep])
    m = cut(lower, slice(1, None)) != 0.0
    rows.append(cut(idx, slice(1, None))[m])
    cols.append(cut(idx, slice(None, -1))[m])
    vals.append(-cut(lower, slice(1, None))[m])
    m = cut(upper, slice(None, -1)) != 0.0
    rows.append(cut(idx, slice(None, -1))[m])
    cols.append(cut(idx, slice(1, None))[m])
    vals.append(-cut(upper, slice(None, -1))[m])

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.size, mesh.size)).tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()
    return A, lower, upper


def assemble_xi_advection_2d(mesh: PhaseMesh2D, speed: WaveSpeed2D, inflow=None):
    """Signed-upwind advection in xi from the x-slope of the wave speed.

    Returns (A3, b3): tridiagonal in the xi slot with diagonal |d| and
    one-sided couplings -(|d|+-d)/2, plus the matching ghost weights at the
    two xi window ends in b3.
    """
    d, _ = advection_rates_2d(mesh, speed)
    A, lower, upper = _tridiag_advection(mesh, d, 2)
    b = np.zeros(mesh.size)
    if inflow is not None:
        _reject_time_varying(inflow, 4)
        bot = mesh.xi_min - 0.5 * mesh.dxi
        top = mesh.xi_max + 0.5 * mesh.dxi
        idx = np.arange(mesh.size).reshape(mesh.shape)
        for i, xv in enumerate(mesh.x):
            for j, yv in enumerate(mesh.y):
                for l, ev in enumerate(mesh.eta):
                    w = lower[i, j, 0, l]
                    if w != 0.0:
                        b[idx[i, j, 0, l]] = -w * float(inflow(xv, yv, bot, ev))
                    w = upper[i, j, -1, l]
                    if w != 0.0:
                        b[idx[i, j, -1, l]] = -w * float(inflow(xv, yv, top, ev))
    return A, b


def assemble_eta_advection_2d(mesh: PhaseMesh2D, speed: WaveSpeed2D, inflow=None):
    """Mirror of assemble_xi_advection_2d: advection in eta from the y-slope."""
    _, d = advection_rates_2d(mesh, speed)
    A, lower, upper = _tridiag_advection(mesh, d, 3)
    b = np.zeros(mesh.size)
    if inflow is not None:
        _reject_time_varying(inflow, 4)
        bot = mesh.eta_min - 0.5 * mesh.deta
        top = mesh.eta_max + 0.5 * mesh.deta
        idx = np.arange(mesh.size).reshape(mesh.shape)
        for i, xv in enumerate(mesh.x):
            for j, yv in enumerate(mesh.y):
                for k, kv in enumerate(mesh.xi):
                    w = lower[i, j, k, 0]
                    if w != 0.0:
                        b[idx[i, j, k, 0]] = -w * float(inflow(xv, yv, kv, bot))
                    w = upper[i, j, k, -1]
                    if w != 0.0:
                        b[idx[i, j, k, -1]] = -w * float(inflow(xv, yv, kv, top))
    return A, b


# ---------------------------------------------------------------------------
# Combined system
# ---------------------------------------------------------------------------

def assemble_system_2d(mesh: PhaseMesh2D, speed: WaveSpeed2D,
                       inflow=None) -> SparseSystem2D:
    """Build the full ODE system f' = A f + b on a 2D phase mesh."""
    _reject_time_varying(inflow, 4)
    A1, b1, hits_x = assemble_xflux_2d(mesh, speed, inflow)
    A2, b2, hits_y = assemble_yflux_2d(mesh, speed, inflow)
    A3, b3 = assemble_xi_advection_2d(mesh, speed, inflow)
    A4, b4 = assemble_eta_advection_2d(mesh, speed, inflow)
    A = (-(A1 + A2 + A3 + A4)).tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()
    b = -(b1 + b2 + b3 + b4)
    audit = SparsityAudit2D(
        s_r_x=_row_max(A1), s_c_x=_col_max(A1),
        q1=ratio_column_bound(speed.cm_x, speed.cp_x),
        s_r_y=_row_max(A2), s_c_y=_col_max(A2),
        q2=ratio_column_bound(speed.cm_y, speed.cp_y),
        s_r_xi=_row_max(A3), s_r_eta=_row_max(A4),
        max_norm=float(np.abs(A.data).max()) if A.nnz else 0.0)
    return SparseSystem2D(A=A, b=b, n=mesh.size, transport_x=A1,
                          transport_y=A2, advection_xi=A3, advection_eta=A4,
                          audit=audit, mesh=mesh,
                          edge_hits=hits_x + hits_y)


# ---------------------------------------------------------------------------
# Direct flux oracle
# ---------------------------------------------------------------------------

def flux_oracle_2d(k: int, l: int, normal_nodes: np.ndarray,
                   tang_nodes: np.ndarray, dnode: float,
                   c_minus: float, c_plus: float,
                   f_minus_cell, f_plus_cell, coeffs_fn=coeffs_2d):
    """Split upwind values (f_minus, f_plus) at one cell face, slot (k, l).

    Direct transcription of the oblique interface flux recipe along the
    face normal: the upwind side passes through; the downwind side tests
    the discriminant, combines the interpolated pre-image slowness weighted
    by the transmission gate with the mirrored-slot value of its own cell,
    and falls back to pure mirror reflection when no real transmitted
    slowness exists.  ``k`` indexes ``normal_nodes``, ``l`` ``tang_nodes``;
    f_minus_cell / f_plus_cell are the (normal, tangential) field slices of
    the two cells abutting the face.  For a y-normal face pass the eta
    nodes first and transposed slices.
    """
    q = normal_nodes[k]
    w = tang_nodes[l]
    km = normal_nodes.size - 1 - k
    if q > 0:
        f_minus = f_minus_cell[k, l]
        dec = transmit_test_2d(q, w, c_plus, c_minus)
        if dec.total_reflection:
            f_plus = f_plus_cell[km, l]
        else:
            pre = dec.transmitted
            g_row = q / math.hypot(q, w)
            g_pre = pre / math.hypot(pre, w)
            co = coeffs_fn(c_minus, c_plus, g_pre, g_row)
            a_T, a_R = step_gates_2d(dec.discriminant, co)
            f_plus = (a_T * _interp_preimage(pre, normal_nodes, dnode,
                                             f_minus_cell[:, l])
                      + a_R * f_plus_cell[km, l])
        return f_minus, f_plus
    f_plus = f_plus_cell[k, l]
    dec = transmit_test_2d(q, w, c_minus, c_plus)
    if dec.total_reflection:
        f_minus = f_minus_cell[km, l]
    else:
        pre = dec.transmitted        # negative branch of the root
        g_row = -q / math.hypot(q, w)
        g_pre = -pre / math.hypot(pre, w)
        co = coeffs_fn(c_minus, c_plus, g_row, g_pre)
        a_T, a_R = step_gates_2d(dec.discriminant, co)
        f_minus = (a_T * _interp_preimage(pre, normal_nodes, dnode,
                                          f_plus_cell[:, l])
                   + a_R * f_minus_cell[km, l])
    return f_minus, f_plus


def rhs_direct_2d(mesh: PhaseMesh2D, speed: WaveSpeed2D, f, inflow=None):
    """Evaluate f' by direct flux differencing, bypassing the matrices.

    Splits the upwind values at every x and y face (interface faces via
    flux_oracle_2d), forms the two flux-difference terms with the signed
    direction factors xi/sqrt(xi^2+eta^2) and eta/sqrt(...), and adds the
    one-sided slowness-advection differences.
    """
    n_x, n_y, n_xi, n_eta = mesh.shape
    xi, eta = mesh.xi, mesh.eta
    rt = np.hypot(xi[:, None], eta[None, :])
    fg = np.asarray(f, dtype=float).reshape(mesh.shape)
    c = speed.c_cell
    if inflow is not None:
        _reject_time_varying(inflow, 4)

    def eval_inflow(X, Y, XI, ET):
        br = np.broadcast(X, Y, XI, ET)
        if inflow is None:
            return np.zeros(br.shape)
        return np.array([float(inflow(*args)) for args in br]).reshape(br.shape)

    # x-face fluxes
    gl = eval_inflow(mesh.x_min - 0.5 * mesh.dx, mesh.y[:, None, None],
                     xi[None, :, None], eta[None, None, :])
    gr = eval_inflow(mesh.x_max + 0.5 * mesh.dx, mesh.y[:, None, None],
                     xi[None, :, None], eta[None, None, :])
    stacked = np.concatenate([gl[None], fg, gr[None]], axis=0)
    fm = np.where((xi > 0)[None, None, :, None], stacked[:-1], stacked[1:])
    fp = fm.copy()
    for h, j in zip(*np.nonzero(speed.ifc_x)):
        fl, fr = stacked[h, j], stacked[h + 1, j]
        for k in range(n_xi):
            for l in range(n_eta):
                fm[h, j, k, l], fp[h, j, k, l] = flux_oracle_2d(
                    k, l, xi, eta, mesh.dxi,
                    speed.cm_x[h, j], speed.cp_x[h, j], fl, fr)
    out = -(c[:, :, None, None] * (xi[None, None, :, None] / rt) / mesh.dx) \
        * (fm[1:] - fp[:-1])

    # y-face fluxes
    gb = eval_inflow(mesh.x[:, None, None], mesh.y_min - 0.5 * mesh.dy,
                     xi[None, :, None], eta[None, None, :])
    gt = eval_inflow(mesh.x[:, None, None], mesh.y_max + 0.5 * mesh.dy,
                     xi[None, :, None], eta[None, None, :])
    stacked = np.concatenate([gb[:, None], fg, gt[:, None]], axis=1)
    fm = np.where((eta > 0)[None, None, None, :], stacked[:, :-1], stacked[:, 1:])
    fp = fm.copy()
    for i, g in zip(*np.nonzero(speed.ifc_y)):
        flo, fup = stacked[i, g], stacked[i, g + 1]
        for k in range(n_xi):
            for l in range(n_eta):
                fm[i, g, k, l], fp[i, g, k, l] = flux_oracle_2d(
                    l, k, eta, xi, mesh.deta,
                    speed.cm_y[i, g], speed.cp_y[i, g], flo.T, fup.T)
    out -= (c[:, :, None, None] * (eta[None, None, None, :] / rt) / mesh.dy) \
        * (fm[:, 1:] - fp[:, :-1])

    # slowness advection, one-sided by the sign of the rate
    d_x, d_y = advection_rates_2d(mesh, speed)
    gb_ = eval_inflow(mesh.x[:, None, None], mesh.y[None, :, None],
                      mesh.xi_min - 0.5 * mesh.dxi, eta[None, None, :])
    gt_ = eval_inflow(mesh.x[:, None, None], mesh.y[None, :, None],
                      mesh.xi_max + 0.5 * mesh.dxi, eta[None, None, :])
    padded = np.concatenate([gb_[:, :, None, :], fg, gt_[:, :, None, :]], axis=2)
    f_above = np.where(d_x > 0, padded[:, :, 1:-1], padded[:, :, 2:])
    f_below = np.where(d_x > 0, padded[:, :, :-2], padded[:, :, 1:-1])
    out -= d_x * (f_above - f_below)

    gb_ = eval_inflow(mesh.x[:, None, None], mesh.y[None, :, None],
                      xi[None, None, :], mesh.eta_min - 0.5 * mesh.deta)
    gt_ = eval_inflow(mesh.x[:, None, None], mesh.y[None, :, None],
                      xi[None, None, :], mesh.eta_max + 0.5 * mesh.deta)
    padded = np.concatenate([gb_[..., None], fg, gt_[..., None]], axis=3)
    f_above = np.where(d_y > 0, padded[..., 1:-1], padded[..., 2:])
    f_below = np.where(d_y > 0, padded[..., :-2], padded[..., 1:-1])
    out -= d_y * (f_above - f_below)
    return out.ravel()
