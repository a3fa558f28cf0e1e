import numpy as np
import pytest

from liouvopt.errors import ConfigError, DomainError, GridAlignmentError
from liouvopt.grids import (
    FieldSnapshot,
    PiecewiseSpeed1D,
    PiecewiseSpeed2D,
    build_mesh_1d,
    build_mesh_2d,
    constant_speed,
    discrete_delta,
    flatten_field,
    init_delta_field_1d,
    mesh_from_config,
    parse_config,
    read_field_binary,
    read_field_csv,
    sample_speed_1d,
    sample_speed_2d,
    speed_from_config,
    write_field_binary,
    write_field_csv,
)


def test_mesh_1d_spacing_and_centers():
    mesh = build_mesh_1d((-1.5, 1.5), (-1.6, 1.6), 6, 8)
    assert mesh.dx == pytest.approx(0.5)
    assert mesh.dxi == pytest.approx(0.4)
    assert mesh.x[0] == pytest.approx(-1.25)
    assert mesh.x[-1] == pytest.approx(1.25)
    # half-grid points include both boundaries
    assert mesh.x_half[0] == -1.5 and mesh.x_half[-1] == 1.5
    assert len(mesh.x_half) == 7


def test_mesh_xi_mirror_is_exact():
    mesh = build_mesh_1d((0.0, 1.0), (-1.6, 1.6), 4, 10)
    xi = mesh.xi
    for j in range(mesh.n_xi):
        assert xi[mesh.mirror_xi(j)] == -xi[j]  # bitwise, not approx
    assert np.all(xi != 0.0)


def test_mesh_rejects_odd_or_tiny_counts():
    with pytest.raises(ConfigError):
        build_mesh_1d((0, 1), (-1, 1), 5, 8)
    with pytest.raises(ConfigError):
        build_mesh_1d((0, 1), (-1, 1), 8, 2)


def test_mesh_rejects_asymmetric_slowness_box():
    with pytest.raises(ConfigError):
        build_mesh_1d((0, 1), (-1.0, 1.2), 8, 8)


def test_mesh_2d_shape_and_mirrors():
    mesh = build_mesh_2d((-0.12, 0.12), (-0.2, 0.2), (-0.2, 0.2), (-0.2, 0.2),
                         8, 8, 8, 8)
    assert mesh.shape == (8, 8, 8, 8)
    assert mesh.size == 8 ** 4
    assert mesh.eta[mesh.mirror_eta(2)] == -mesh.eta[2]
    assert mesh.flat_index(0, 0, 0, 1) == 1
    assert mesh.flat_index(1, 0, 0, 0) == 8 ** 3


def test_flat_index_matches_ravel():
    mesh = build_mesh_1d((0, 1), (-1, 1), 4, 6)
    grid = np.arange(mesh.size, dtype=float).reshape(4, 6)
    flat = flatten_field(grid)
    assert flat[mesh.flat_index(2, 3)] == grid[2, 3]


def test_sample_speed_on_grid_jump():
    mesh = build_mesh_1d((-1.5, 1.5), (-1.6, 1.6), 6, 4)
    speed = PiecewiseSpeed1D(breaks=[0.0], pieces=[0.6, 0.2])
    ws = sample_speed_1d(speed, mesh)
    k = 3  # x_half[3] == 0.0
    assert ws.cm[k] == 0.6 and ws.cp[k] == 0.2
    assert list(ws.interfaces) == [k]
    # cells on either side see their own constant
    assert np.all(ws.c_cell[:3] == 0.6) and np.all(ws.c_cell[3:] == 0.2)


def test_sample_speed_rejects_offgrid_jump():
    mesh = build_mesh_1d((-1.5, 1.5), (-1.6, 1.6), 8, 4)
    speed = PiecewiseSpeed1D(breaks=[0.1], pieces=[1.0, 2.0])
    with pytest.raises(GridAlignmentError):
        sample_speed_1d(speed, mesh)


def test_sample_speed_allows_offgrid_kink():
    # continuous slope change off the half grid is fine; no interface appears
    mesh = build_mesh_1d((-1.5, 1.5), (-1.0, 1.0), 8, 4)
    speed = PiecewiseSpeed1D(breaks=[0.1],
                             pieces=[lambda x: 2.0 + x, lambda x: 2.1 - 0.0 * x])
    ws = sample_speed_1d(speed, mesh)
    assert ws.interfaces.size == 0
    assert np.all(ws.cm == ws.cp)


def test_sample_speed_rejects_nonpositive():
    mesh = build_mesh_1d((0, 1), (-1, 1), 4, 4)
    with pytest.raises(DomainError):
        sample_speed_1d(constant_speed(-1.0), mesh)


def test_sample_speed_rejects_boundary_jump():
    mesh = build_mesh_1d((0.0, 1.0), (-1, 1), 4, 4)
    speed = PiecewiseSpeed1D(breaks=[0.25], pieces=[1.0, 2.0])
    # shifting the domain so the jump sits on the boundary is the error case
    bad = build_mesh_1d((0.25, 1.25), (-1, 1), 4, 4)
    sample_speed_1d(speed, mesh)  # interior jump works
    ws = sample_speed_1d(speed, bad)
    # jump at the left boundary is outside every cell: treated as no interface
    assert ws.interfaces.size == 0


def test_sample_speed_2d_flat_interface():
    mesh = build_mesh_2d((-0.12, 0.12), (-0.2, 0.2), (-0.2, 0.2), (-0.2, 0.2),
                         4, 4, 4, 4)
    speed = PiecewiseSpeed2D(x_breaks=[], y_breaks=[0.0], pieces=[[1.0], [2.0]])
    ws = sample_speed_2d(speed, mesh)
    assert not ws.ifc_x.any()
    assert ws.ifc_y[:, 2].all()  # y_half[2] == 0
    assert np.all(ws.cm_y[:, 2] == 1.0) and np.all(ws.cp_y[:, 2] == 2.0)
    assert np.all(ws.c_cell[:, :2] == 1.0) and np.all(ws.c_cell[:, 2:] == 2.0)


def test_sample_speed_2d_offgrid_break():
    mesh = build_mesh_2d((0, 1), (-0.2, 0.2), (-1, 1), (-1, 1), 4, 4, 4, 4)
    speed = PiecewiseSpeed2D(x_breaks=[0.3], y_breaks=[],
                             pieces=[[1.0, 2.0]])
    with pytest.raises(GridAlignmentError):
        sample_speed_2d(speed, mesh)


def test_field_snapshot_checks_length():
    mesh = build_mesh_1d((0, 1), (-1, 1), 4, 4)
    with pytest.raises(ConfigError):
        FieldSnapshot(0.0, np.zeros(7), mesh)
    snap = FieldSnapshot(0.0, np.zeros(16), mesh)
    assert snap.as_grid().shape == (4, 4)


def test_discrete_delta_unit_mass():
    beta = 0.05
    z = np.linspace(-1, 1, 20001)
    kern = discrete_delta(z, beta)
    assert np.trapezoid(kern, z) == pytest.approx(1.0, abs=1e-6)
    assert discrete_delta(0.0, beta) == pytest.approx(1 / beta)
    assert discrete_delta(beta, beta) == 0.0
    with pytest.raises(DomainError):
        discrete_delta(0.0, 0.0)


def test_init_delta_field_column_mass():
    mesh = build_mesh_1d((-1, 1), (-1, 1), 6, 64)
    snap = init_delta_field_1d(lambda x: 0.3 * x, mesh.dxi, mesh)
    grid = snap.as_grid()
    # each column integrates to one over xi
    col = grid.sum(axis=1) * mesh.dxi
    assert np.allclose(col, 1.0, atol=1e-12)


def test_parse_config_and_errors():
    cfg = parse_config("a = 1\n# comment\nb = 2 3\na = 4\n")
    assert cfg == {"a": ["1", "4"], "b": ["2 3"]}
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("a = 1\nbogus line\n")


def test_mesh_and_speed_from_config():
    text = """
    xdomain = -1 1
    xidomain = -1 1
    nx = 8
    nxi = 8
    speed = -1 0 : 1.0
    speed = 0 1 : 2.0
    """
    mesh = mesh_from_config(text)
    assert mesh.n_x == 8 and mesh.x_min == -1.0
    speed = speed_from_config(text)
    assert speed.breaks == [0.0]
    ws = sample_speed_1d(speed, mesh)
    assert list(ws.interfaces) == [4]


def test_speed_from_config_rejects_gaps_and_bad_names():
    with pytest.raises(ConfigError):
        speed_from_config("speed = -1 0 : 1.0\nspeed = 0.5 1 : 2.0\n")
    with pytest.raises(ConfigError, match="unknown name"):
        speed_from_config("speed = -1 1 : os.system\n")


def test_field_csv_roundtrip(tmp_path):
    mesh = build_mesh_1d((0, 1), (-1, 1), 4, 4)
    rng = np.random.default_rng(3)
    snap = FieldSnapshot(0.25, rng.random(mesh.size), mesh)
    path = tmp_path / "f.csv"
    write_field_csv(snap, path)
    back = read_field_csv(path, mesh, t=0.25)
    assert np.array_equal(back.values, snap.values)  # repr round-trips exactly


def test_field_binary_roundtrip(tmp_path):
    mesh = build_mesh_1d((0, 1), (-1, 1), 4, 6)
    rng = np.random.default_rng(4)
    snap = FieldSnapshot(0.5, rng.random(mesh.size), mesh)
    path = tmp_path / "f.bin"
    write_field_binary(snap, path)
    back = read_field_binary(path, mesh)
    assert back.t == 0.5
    assert np.array_equal(back.values, snap.values)
