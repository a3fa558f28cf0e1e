import numpy as np
import pytest
import scipy.sparse as sp

from liouvopt.assemble2d import (
    advection_rates_2d,
    assemble_system_2d,
    rhs_direct_2d,
)
from liouvopt.errors import ConfigError
from liouvopt.grids import PiecewiseSpeed2D, build_mesh_2d, sample_speed_2d
from liouvopt.interfaces import transmit_test_2d


def mesh4():
    return build_mesh_2d((-0.12, 0.12), (-0.2, 0.2), (-0.2, 0.2), (-0.2, 0.2),
                         4, 4, 4, 4)


def layered_speed(mesh, c_below=1.0, c_above=2.0):
    return sample_speed_2d(
        PiecewiseSpeed2D(x_breaks=[], y_breaks=[0.0],
                         pieces=[[c_below], [c_above]]), mesh)


def max_matvec_vs_direct(system, mesh, speed, inflow=None, n_fields=20, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_fields):
        f = rng.standard_normal(mesh.size)
        lhs = system.A @ f + system.b
        rhs = rhs_direct_2d(mesh, speed, f, inflow=inflow)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def test_matrix_matches_direct_flux_layered():
    mesh = mesh4()
    speed = layered_speed(mesh)
    system = assemble_system_2d(mesh, speed)
    assert max_matvec_vs_direct(system, mesh, speed) <= 1e-12


def test_matrix_matches_direct_flux_quadrants_with_inflow():
    # interfaces along both axes at once, all four quadrant speeds distinct
    mesh = mesh4()
    speed = sample_speed_2d(
        PiecewiseSpeed2D(x_breaks=[0.0], y_breaks=[0.0],
                         pieces=[[1.0, 1.5], [2.0, 1.2]]), mesh)
    inflow = lambda x, y, xi, eta: 1.0 + x - 0.5 * y + 0.2 * xi * eta
    system = assemble_system_2d(mesh, speed, inflow=inflow)
    assert max_matvec_vs_direct(system, mesh, speed, inflow=inflow) <= 1e-12


def test_matrix_matches_direct_flux_smooth_speed():
    # a y-gradient switches on the eta-advection block, no interfaces at all
    mesh = mesh4()
    speed = sample_speed_2d(
        PiecewiseSpeed2D(x_breaks=[], y_breaks=[],
                         pieces=[[lambda x, y: 2.0 + 0.5 * y + 0.25 * x]]), mesh)
    inflow = lambda x, y, xi, eta: 0.3 + xi - eta
    system = assemble_system_2d(mesh, speed, inflow=inflow)
    assert max_matvec_vs_direct(system, mesh, speed, inflow=inflow) <= 1e-12
    assert system.advection_xi.nnz > 0 and system.advection_eta.nnz > 0


def test_piecewise_constant_speed_has_no_advection():
    mesh = mesh4()
    speed = layered_speed(mesh)
    d_x, d_y = advection_rates_2d(mesh, speed)
    assert np.all(d_x == 0.0) and np.all(d_y == 0.0)
    system = assemble_system_2d(mesh, speed)
    assert system.advection_xi.nnz == 0 and system.advection_eta.nnz == 0


def test_total_reflection_rows_have_no_cross_interface_coupling():
    mesh = mesh4()
    speed = layered_speed(mesh)
    system = assemble_system_2d(mesh, speed)
    A = system.transport_y.tocsr()
    xi, eta = mesh.xi, mesh.eta
    j_below = mesh.n_y // 2 - 1   # cell row touching the interface from below
    checked = 0
    for k in range(mesh.n_xi):
        for l in range(mesh.n_eta):
            if eta[l] >= 0:
                continue
            dec = transmit_test_2d(eta[l], xi[k], 1.0, 2.0)
            i = 1  # any x column
            row = mesh.flat_index(i, j_below, k, l)
            cols = A.indices[A.indptr[row]:A.indptr[row + 1]]
            data = A.data[A.indptr[row]:A.indptr[row + 1]]
            other_cell = [c for c in cols
                          if c // (mesh.n_xi * mesh.n_eta)
                          != row // (mesh.n_xi * mesh.n_eta)]
            if dec.total_reflection:
                checked += 1
                assert not other_cell
                # full-strength mirror entry balances the outgoing diagonal
                mirror = mesh.flat_index(i, j_below, k, mesh.mirror_eta(l))
                diag = data[cols == row][0]
                refl = data[cols == mirror][0]
                assert refl == pytest.approx(-diag, rel=1e-14)
            else:
                assert other_cell
    assert checked > 0  # the layered setup really exercises the closed gate


def test_open_gate_splits_the_outgoing_flux():
    # where transmission is open, mirror + hat weights exhaust the diagonal
    mesh = mesh4()
    speed = layered_speed(mesh)
    system = assemble_system_2d(mesh, speed)
    A = system.transport_y.tocsr()
    eta, xi = mesh.eta, mesh.xi
    j_above = mesh.n_y // 2       # cell row touching the interface from above
    block = mesh.n_xi * mesh.n_eta
    counted = 0
    for k in range(mesh.n_xi):
        for l in range(mesh.n_eta):
            if eta[l] <= 0:
                continue
            dec = transmit_test_2d(eta[l], xi[k], 2.0, 1.0)
            assert not dec.total_reflection  # fast-to-slow is always open
            # skip slots whose pre-image leaves the eta window (masked flux)
            if not (abs(dec.transmitted) <= eta[-1]):
                continue
            counted += 1
            row = mesh.flat_index(1, j_above, k, l)
            cols = A.indices[A.indptr[row]:A.indptr[row + 1]]
            data = A.data[A.indptr[row]:A.indptr[row + 1]]
            diag = data[cols == row][0]
            others = data[cols != row]
            assert others.sum() == pytest.approx(-diag, rel=1e-13)
    assert counted > 0


def test_continuous_speed_reduces_to_tensor_upwind():
    mesh = mesh4()
    speed = sample_speed_2d(
        PiecewiseSpeed2D(x_breaks=[], y_breaks=[], pieces=[[0.7]]), mesh)
    system = assemble_system_2d(mesh, speed)

    n_x, n_y, n_xi, n_eta = mesh.shape
    xi, eta = mesh.xi, mesh.eta
    rt = np.hypot(xi[:, None], eta[None, :])
    expect = sp.lil_matrix((mesh.size, mesh.size))
    for i in range(n_x):
        for j in range(n_y):
            for k in range(n_xi):
                for l in range(n_eta):
                    m = mesh.flat_index(i, j, k, l)
                    # same association order as the assembly: speed times
                    # direction cosine, then divided by the cell width
                    cx = 0.7 * abs(xi[k] / rt[k, l]) / mesh.dx
                    cy = 0.7 * abs(eta[l] / rt[k, l]) / mesh.dy
                    expect[m, m] = cx + cy
                    iu = i - 1 if xi[k] > 0 else i + 1
                    if 0 <= iu < n_x:
                        expect[m, mesh.flat_index(iu, j, k, l)] = -cx
                    ju = j - 1 if eta[l] > 0 else j + 1
                    if 0 <= ju < n_y:
                        expect[m, mesh.flat_index(i, ju, k, l)] = -cy
    diff = (system.A - (-expect.tocsr())).toarray()
    assert np.abs(diff).max() == 0.0


def test_audit_bounds_layered():
    mesh = mesh4()
    system = assemble_system_2d(mesh, layered_speed(mesh))
    audit = system.audit
    assert audit.s_r_x <= 4 and audit.s_r_y <= 4
    assert audit.q2 == 6  # speed ratio 2 -> 2*2 + 2
    assert audit.s_c_y <= audit.q2
    assert audit.ok()


def test_time_varying_inflow_rejected():
    mesh = mesh4()
    speed = layered_speed(mesh)
    with pytest.raises(ConfigError, match="time-varying"):
        assemble_system_2d(mesh, speed, inflow=lambda t, x, y, xi, eta: 0.0)
