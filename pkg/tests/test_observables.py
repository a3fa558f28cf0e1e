import math

import numpy as np
import pytest

from liouvopt.errors import ConfigError, DomainError
from liouvopt.grids import FieldSnapshot, build_mesh_1d, build_mesh_2d, constant_speed
from liouvopt.observables import (
    avg_slowness_1d,
    density_1d,
    density_2d,
    evolve_pair,
    exact_example1,
    exact_example2,
    levelset_moments,
    levelset_pair,
    oracle_density_2d,
    ray_oracle_2d,
)


def snapshot_1d(values, nx=16):
    mesh = build_mesh_1d((-1.5, 1.5), (-1.6, 1.6), nx, nx)
    grid = np.broadcast_to(values, (nx, nx)).copy()
    return FieldSnapshot(t=0.0, values=grid.ravel(), mesh=mesh)


def test_moments_of_a_uniform_field():
    field = snapshot_1d(1.0)
    prof = avg_slowness_1d(field)
    assert np.allclose(prof.rho, 3.2, atol=1e-13)
    assert np.allclose(prof.u, 0.0, atol=1e-13)
    assert not prof.mask.any()

    double = density_1d(FieldSnapshot(0.0, 2.0 * field.values, field.mesh))
    assert np.allclose(double.rho, 2.0 * prof.rho, atol=1e-13)


def test_moments_mask_empty_rows():
    field = snapshot_1d(1.0)
    grid = field.as_grid()
    grid[:4] = 0.0
    prof = avg_slowness_1d(FieldSnapshot(0.0, grid.ravel(), field.mesh))
    assert prof.mask[:4].all() and not prof.mask[4:].any()
    assert np.all(prof.u[:4] == 0.0)


def test_density_rejects_the_wrong_dimension():
    field = snapshot_1d(1.0)
    with pytest.raises(ConfigError):
        density_2d(field)
    mesh2 = build_mesh_2d((-1, 1), (-1, 1), (-1, 1), (-1, 1), 4, 4, 4, 4)
    flat = FieldSnapshot(0.0, np.ones(mesh2.size), mesh2)
    with pytest.raises(ConfigError):
        density_1d(flat)
    prof = density_2d(flat)
    assert np.allclose(prof.rho, 4.0, atol=1e-13)


def test_speed_jump_reference_pointwise_witnesses():
    f = exact_example1(0.1, np.array([0.9, 1.2, -0.5, 1.45]))
    assert f[0] == 1.0          # bulk, below the reflected band
    assert f[1] == 0.75         # transmitted band carries alphaT
    assert f[2] == 1.0          # left-moving bulk
    assert f[3] == 0.0          # above every band
    rho, u = exact_example1(np.array([0.5]))
    assert rho[0] == pytest.approx(math.sqrt(0.51), rel=1e-15)
    assert u[0] == pytest.approx(-math.sqrt(0.51) / 2.0, rel=1e-15)
    with pytest.raises(DomainError):
        exact_example1(0.1, t=0.5)


def test_speed_jump_reference_moments_match_the_resolved_field():
    # the banded f(x, xi) and the closed-form (rho, u) were derived
    # separately; integrating the bands with a fine midpoint rule must
    # reproduce the moments
    n = 200_001
    dq = 3.2 / n
    xi = -1.6 + dq * (np.arange(n) + 0.5)
    for xv in (-0.55, -0.45, -0.3, -0.1, 0.05, 0.1, 0.35, 0.5, 0.7):
        f = exact_example1(xv, xi)
        rho_q = f.sum() * dq
        flux_q = (f * xi).sum() * dq
        rho, u = exact_example1(np.array([xv]))
        assert rho_q == pytest.approx(rho[0], abs=2e-4)
        assert flux_q == pytest.approx(rho[0] * u[0], abs=2e-4)


def test_speed_well_reference_plateaus_and_symmetry():
    pts = np.array([-1.45, -1.0, -0.55, -0.3, 0.0, 0.3, 0.55, 1.0, 1.45])
    rho, u = exact_example2(pts)
    aR, aT = 1.0 / 16.0, 15.0 / 16.0
    expect = [1.0, 1.0 + aR, 1.0 + aR + 0.6 * aT, 1.0 + aR + aT / 0.6,
              aT / 0.3, 1.0 + aR + aT / 0.6, 1.0 + aR + 0.6 * aT,
              1.0 + aR, 1.0]
    assert np.allclose(rho, expect, rtol=1e-15)
    assert abs(u[4]) <= 1e-15

    xs = np.linspace(-1.55, 1.55, 1001)
    rho_f, u_f = exact_example2(xs)
    rho_b, u_b = exact_example2(-xs)
    assert np.allclose(rho_f, rho_b, atol=1e-14)
    assert np.allclose(u_f, -u_b, atol=1e-14)
    with pytest.raises(DomainError):
        exact_example2(0.0, t=2.0)


def test_speed_well_reference_mass():
    # the plateau areas over the widest window the outermost plateau spans
    # add up to exactly 5.2
    n = 3_200_000
    dx = 3.2 / n
    xs = -1.6 + dx * (np.arange(n) + 0.5)
    rho, _ = exact_example2(xs)
    assert rho.sum() * dx == pytest.approx(5.2, abs=1e-5)


def test_levelset_pair_reproduces_unit_density_and_the_profile():
    mesh = build_mesh_1d((-1.5, 1.5), (-1.0, 1.0), 128, 128)
    w = lambda x: 0.8 - 0.8 / 1.5 ** 2 * (x + 1.5) ** 2 if x < 0 else \
        -0.8 + 0.8 / 1.5 ** 2 * (x - 1.5) ** 2
    pair = levelset_pair(mesh, constant_speed(1.0), w)
    wv = np.array([w(xv) for xv in mesh.x])
    for factor in (1.0, 2.0, 6.0):
        prof = levelset_moments(pair, factor * mesh.dxi)
        assert np.allclose(prof.rho, 1.0, atol=1e-12)
        assert np.allclose(prof.u, wv, atol=1e-12)


def test_levelset_pair_evolves_both_members_together():
    mesh = build_mesh_1d((-1.5, 1.5), (-1.0, 1.0), 16, 16)
    pair = levelset_pair(mesh, constant_speed(1.0), lambda x: 0.5 * x)
    out = evolve_pair(pair, T=0.1, dt=0.05)
    assert out.psi.t == 0.1 and out.phi.t == 0.1
    assert out.psi_system is pair.psi_system
    assert np.all(np.isfinite(out.psi.values))


def gauss4(x, y, xi, eta):
    return np.exp(-(np.asarray(x) / 0.03) ** 2
                  - ((np.asarray(y) + 0.1) / 0.025) ** 2
                  - (np.asarray(xi) / 0.05) ** 2
                  - ((np.asarray(eta) - 0.1) / 0.025) ** 2)


def test_ray_oracle_identity_at_time_zero_and_at_rest():
    xi = np.linspace(-0.2, 0.2, 9)
    eta = np.linspace(-0.2, 0.2, 9)[:, None]
    out = ray_oracle_2d(0.05, -0.08, xi, eta, 0.0, 1.0, 2.0, gauss4)
    assert np.array_equal(out, gauss4(0.05, -0.08, *np.broadcast_arrays(xi, eta)))
    still = ray_oracle_2d(0.3, -0.1, 0.0, 0.0, 5.0, 1.0, 2.0, gauss4)
    assert still == gauss4(0.3, -0.1, 0.0, 0.0)
    with pytest.raises(DomainError):
        ray_oracle_2d(0.0, 0.0, 0.1, 0.1, 1.0, 1.0, 2.0, gauss4)


def test_ray_oracle_reduces_to_transport_without_a_jump():
    xi = np.linspace(-0.19, 0.19, 12)
    eta = np.linspace(-0.19, 0.19, 12)[:, None]
    xi, eta = np.broadcast_arrays(xi, eta)
    c, t = 1.3, 0.4
    for (xv, yv) in [(0.02, -0.06), (-0.05, 0.11)]:
        out = ray_oracle_2d(xv, yv, xi, eta, t, c, c, gauss4)
        r = np.hypot(xi, eta)
        ref = gauss4(xv - c * t * xi / r, yv - c * t * eta / r, xi, eta)
        assert np.abs(out - ref).max() <= 1e-12


def test_ray_oracle_normal_incidence_split_weights():
    above = lambda X, Y, XI, ETA: (Y > 0.0).astype(float)
    below = lambda X, Y, XI, ETA: (Y < 0.0).astype(float)
    # coming up on a backward trace from y<0 through the interface at
    # normal incidence between c=1 and c=2 splits 8/9 transmitted, 1/9
    # mirrored
    val_t = ray_oracle_2d(0.0, -0.05, 0.0, -0.6, 0.2, 1.0, 2.0, above)
    val_r = ray_oracle_2d(0.0, -0.05, 0.0, -0.6, 0.2, 1.0, 2.0, below)
    assert val_t == pytest.approx(8.0 / 9.0, rel=1e-15)
    assert val_r == pytest.approx(1.0 / 9.0, rel=1e-15)
    assert val_t + val_r == pytest.approx(1.0, rel=1e-15)


def test_ray_oracle_total_reflection_branch():
    above = lambda X, Y, XI, ETA: (Y > 0.0).astype(float)
    ones = lambda X, Y, XI, ETA: np.ones(np.broadcast(X, Y, XI, ETA).shape)
    # |eta| <= sqrt(3)|xi| on the slow side leaves no transmitted preimage
    val = ray_oracle_2d(0.0, -0.05, 0.5, -0.2, 1.0, 1.0, 2.0, above)
    assert val == 0.0
    val = ray_oracle_2d(0.0, -0.05, 0.5, -0.2, 1.0, 1.0, 2.0, ones)
    assert val == 1.0


def test_oracle_density_at_time_zero_matches_the_separated_integral():
    mesh = build_mesh_2d((-0.12, 0.12), (-0.2, 0.2), (-0.2, 0.2), (-0.2, 0.2),
                         4, 4, 4, 4)
    prof = oracle_density_2d(mesh, 0.0, 1.0, 2.0, gauss4, n_quad=201)
    i_xi = 0.05 * math.sqrt(math.pi) * math.erf(0.2 / 0.05)
    i_eta = 0.025 * math.sqrt(math.pi) * 0.5 * (
        math.erf(0.3 / 0.025) + math.erf(0.1 / 0.025))
    ref = (np.exp(-(mesh.x[:, None] / 0.03) ** 2
                  - ((mesh.y[None, :] + 0.1) / 0.025) ** 2) * i_xi * i_eta)
    assert np.abs(prof.rho - ref).max() <= 1e-6 * ref.max()
