"""Phase-space meshes, piecewise wave speeds and field snapshots.

Cell-centered uniform meshes over (x, xi) or (x, y, xi, eta).  Wave speeds
are stored through their one-sided limits at every half-grid point, which is
what the interface flux logic consumes.  Fields are kept flattened with x the
slowest index, i.e. f = [f_11, ..., f_1Nxi, f_21, ...].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, GridAlignmentError

# Relative tolerance used both for jump/half-grid alignment checks and for
# deciding that two one-sided speed limits are "the same" (continuous point).
ALIGN_RTOL = 1e-12


def _centers(lo: float, hi: float, n: int) -> np.ndarray:
    return lo + (np.arange(n) + 0.5) * ((hi - lo) / n)


def _symmetric_centers(half_extent: float, n: int) -> np.ndarray:
    # Built so that centers[n-1-j] == -centers[j] holds exactly in floating
    # point; the reflection index map relies on it.
    d = 2.0 * half_extent / n
    return (np.arange(n) - (n - 1) / 2.0) * d


def _check_count(n: int, name: str) -> None:
    if n < 4:
        raise ConfigError(f"{name} must be at least 4, got {n}")
    if n % 2 != 0:
        raise ConfigError(f"{name} must be even, got {n}")


def _check_symmetric(lo: float, hi: float, name: str) -> None:
    if not np.isfinite(lo) or not np.isfinite(hi) or hi <= lo:
        raise ConfigError(f"bad {name} bounds ({lo}, {hi})")
    if abs(lo + hi) > ALIGN_RTOL * max(abs(lo), abs(hi)):
        raise ConfigError(f"{name} bounds must be symmetric about 0, got ({lo}, {hi})")


@dataclass(frozen=True)
class PhaseMesh1D:
    """Uniform cell-centered mesh over (x, xi).

    Slowness cells are symmetric about xi = 0 with an even count, so no cell
    center sits at xi = 0 and mirroring j -> N_xi+1-j negates xi exactly.
    """

    x_min: float
    x_max: float
    xi_min: float
    xi_max: float
    n_x: int
    n_xi: int
    dx: float = field(init=False)
    dxi: float = field(init=False)

    def __post_init__(self):
        _check_count(self.n_x, "n_x")
        _check_count(self.n_xi, "n_xi")
        if not np.isfinite(self.x_min) or not np.isfinite(self.x_max) or self.x_max <= self.x_min:
            raise ConfigError(f"bad x bounds ({self.x_min}, {self.x_max})")
        _check_symmetric(self.xi_min, self.xi_max, "xi")
        object.__setattr__(self, "dx", (self.x_max - self.x_min) / self.n_x)
        object.__setattr__(self, "dxi", (self.xi_max - self.xi_min) / self.n_xi)

    @property
    def x(self) -> np.ndarray:
        """Cell centers x_i = x_min + (i - 1/2) dx."""
        return _centers(self.x_min, self.x_max, self.n_x)

    @property
    def xi(self) -> np.ndarray:
        return _symmetric_centers(self.xi_max, self.n_xi)

    @property
    def x_half(self) -> np.ndarray:
        """Half-grid points x_{i+1/2}, including both domain boundaries."""
        return self.x_min + np.arange(self.n_x + 1) * self.dx

    @property
    def size(self) -> int:
        return self.n_x * self.n_xi

    def flat_index(self, i: int, j: int) -> int:
        """Flattened position of cell (i, j), both 0-based, x slowest."""
        return i * self.n_xi + j

    def mirror_xi(self, j):
        """Index j' with xi[j'] == -xi[j] (0-based)."""
        return self.n_xi - 1 - j


@dataclass(frozen=True)
class PhaseMesh2D:
    """Uniform cell-centered mesh over (x, y, xi, eta)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    xi_min: float
    xi_max: float
    eta_min: float
    eta_max: float
    n_x: int
    n_y: int
    n_xi: int
    n_eta: int
    dx: float = field(init=False)
    dy: float = field(init=False)
    dxi: float = field(init=False)
    deta: float = field(init=False)

    def __post_init__(self):
        for n, name in ((self.n_x, "n_x"), (self.n_y, "n_y"),
                        (self.n_xi, "n_xi"), (self.n_eta, "n_eta")):
            _check_count(n, name)
        for lo, hi, name in ((self.x_min, self.x_max, "x"), (self.y_min, self.y_max, "y")):
            if not np.isfinite(lo) or not np.isfinite(hi) or hi <= lo:
                raise ConfigError(f"bad {name} bounds ({lo}, {hi})")
        _check_symmetric(self.xi_min, self.xi_max, "xi")
        _check_symmetric(self.eta_min, self.eta_max, "eta")
        object.__setattr__(self, "dx", (self.x_max - self.x_min) / self.n_x)
        object.__setattr__(self, "dy", (self.y_max - self.y_min) / self.n_y)
        object.__setattr__(self, "dxi", (self.xi_max - self.xi_min) / self.n_xi)
        object.__setattr__(self, "deta", (self.eta_max - self.eta_min) / self.n_eta)

    @property
    def x(self) -> np.ndarray:
        return _centers(self.x_min, self.x_max, self.n_x)

    @property
    def y(self) -> np.ndarray:
        return _centers(self.y_min, self.y_max, self.n_y)

    @property
    def xi(self) -> np.ndarray:
        return _symmetric_centers(self.xi_max, self.n_xi)

    @property
    def eta(self) -> np.ndarray:
        return _symmetric_centers(self.eta_max, self.n_eta)

    @property
    def x_half(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_x + 1) * self.dx

    @property
    def y_half(self) -> np.ndarray:
        return self.y_min + np.arange(self.n_y + 1) * self.dy

    @property
    def shape(self):
        return (self.n_x, self.n_y, self.n_xi, self.n_eta)

    @property
    def size(self) -> int:
        return self.n_x * self.n_y * self.n_xi * self.n_eta

    def flat_index(self, i, j, k, l):
        """Flattened position of cell (i, j, k, l), x slowest then y, xi, eta."""
        return ((i * self.n_y + j) * self.n_xi + k) * self.n_eta + l

    def mirror_xi(self, k):
        return self.n_xi - 1 - k

    def mirror_eta(self, l):
        return self.n_eta - 1 - l


def build_mesh_1d(x_bounds, xi_bounds, n_x: int, n_xi: int) -> PhaseMesh1D:
    """Build a uniform (x, xi) mesh.

    Parameters
    ----------
    x_bounds, xi_bounds : pair of floats
        Domain bounds.  The xi bounds must be symmetric about 0.
    n_x, n_xi : int
        Even cell counts, at least 4 each.
    """
    return PhaseMesh1D(x_bounds[0], x_bounds[1], xi_bounds[0], xi_bounds[1], n_x, n_xi)


def build_mesh_2d(x_bounds, y_bounds, xi_bounds, eta_bounds,
                  n_x: int, n_y: int, n_xi: int, n_eta: int) -> PhaseMesh2D:
    """Build a uniform (x, y, xi, eta) mesh; slowness bounds symmetric about 0."""
    return PhaseMesh2D(x_bounds[0], x_bounds[1], y_bounds[0], y_bounds[1],
                       xi_bounds[0], xi_bounds[1], eta_bounds[0], eta_bounds[1],
                       n_x, n_y, n_xi, n_eta)


# ---------------------------------------------------------------------------
# Piecewise wave speeds
# ---------------------------------------------------------------------------

def _as_func(piece):
    if callable(piece):
        return piece
    value = float(piece)
    return lambda *args: value


@dataclass
class PiecewiseSpeed1D:
    """Wave speed c(x) given piece by piece.

    ``breaks`` are the interior breakpoints in increasing order and
    ``pieces`` the per-interval values (constants or callables of x), one
    more piece than breakpoints.  Discontinuities may occur only at the
    breakpoints; continuous kinks there are fine too.
    """

    breaks: list
    pieces: list

    def __post_init__(self):
        if len(self.pieces) != len(self.breaks) + 1:
            raise ConfigError("need exactly len(breaks)+1 speed pieces")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ConfigError("breakpoints must be strictly increasing")
        self._funcs = [_as_func(p) for p in self.pieces]

    def limits(self, x: float, tol: float):
        """One-sided limits (c(x-), c(x+)) resolved against the breakpoints."""
        lo = 0
        hi = 0
        for b in self.breaks:
            if b < x - tol:
                lo += 1
                hi += 1
            elif b <= x + tol:
                hi += 1
            else:
                break
        return float(self._funcs[lo](x)), float(self._funcs[hi](x))


def constant_speed(c: float) -> PiecewiseSpeed1D:
    return PiecewiseSpeed1D(breaks=[], pieces=[c])


@dataclass(frozen=True)
class WaveSpeed1D:
    """Sampled wave speed on a 1D mesh.

    ``cm[i]`` and ``cp[i]`` are the left/right limits at half-grid point
    x_{i+1/2} (array position i runs over 0..n_x).  ``c_cell`` holds the
    per-cell averages (c+_{i-1/2} + c-_{i+1/2}) / 2.  ``interfaces`` lists
    the half-grid array positions where the two limits differ; positions 0
    and n_x are never interfaces.
    """

    mesh: PhaseMesh1D
    cm: np.ndarray
    cp: np.ndarray
    c_cell: np.ndarray = field(init=False)
    interfaces: np.ndarray = field(init=False)

    def __post_init__(self):
        if np.any(self.cm <= 0) or np.any(self.cp <= 0):
            raise DomainError("wave speed must be strictly positive everywhere")
        c_cell = 0.5 * (self.cp[:-1] + self.cm[1:])
        ifc = np.flatnonzero(self.cm != self.cp)
        if ifc.size and (ifc[0] == 0 or ifc[-1] == self.mesh.n_x):
            raise ConfigError("wave-speed jump at a domain boundary is not supported")
        object.__setattr__(self, "c_cell", c_cell)
        object.__setattr__(self, "interfaces", ifc)


def sample_speed_1d(speed: PiecewiseSpeed1D, mesh: PhaseMesh1D) -> WaveSpeed1D:
    """Sample one-sided speed limits at every half-grid point.

    Every genuine jump of ``speed`` must coincide with a half-grid point to
    within dx * 1e-12, otherwise a :class:`GridAlignmentError` is raised.
    Numerically indistinguishable one-sided limits are snapped together so a
    continuous speed never produces a spurious interface.
    """
    tol = mesh.dx * ALIGN_RTOL
    xh = mesh.x_half

    # A breakpoint only needs to sit on the half grid if the speed actually
    # jumps there; a continuous kink may fall anywhere.
    for b in speed.breaks:
        lo, hi = speed.limits(b, tol)
        if abs(lo - hi) <= ALIGN_RTOL * max(abs(lo), abs(hi)):
            continue
        if b <= xh[0] + tol or b >= xh[-1] - tol:
            continue  # outside (or at the edge of) the domain: no cell sees the jump
        k = int(round((b - mesh.x_min) / mesh.dx))
        if k < 0 or k > mesh.n_x or abs(b - xh[k]) > tol:
            raise GridAlignmentError(
                f"speed jump at x={b} is not on a half-grid point (dx={mesh.dx})")

    cm = np.empty(mesh.n_x + 1)
    cp = np.empty(mesh.n_x + 1)
    for k, x in enumerate(xh):
        lo, hi = speed.limits(x, tol)
        if abs(lo - hi) <= ALIGN_RTOL * max(abs(lo), abs(hi)):
            lo = hi = 0.5 * (lo + hi)
        cm[k] = lo
        cp[k] = hi
    # only the interior limit matters at the domain boundaries
    cm[0] = cp[0]
    cp[-1] = cm[-1]
    return WaveSpeed1D(mesh, cm, cp)


@dataclass
class PiecewiseSpeed2D:
    """Wave speed c(x, y) on a rectangular partition.

    The domain is cut by vertical lines ``x_breaks`` and horizontal lines
    ``y_breaks``; ``pieces[iy][ix]`` gives the speed on the band
    (x band ix, y band iy) as a constant or a callable c(x, y).  Jumps are
    therefore always along full grid lines, which is the only interface
    geometry the 2D assembly supports.
    """

    x_breaks: list
    y_breaks: list
    pieces: list

    def __post_init__(self):
        if len(self.pieces) != len(self.y_breaks) + 1:
            raise ConfigError("need len(y_breaks)+1 rows of speed pieces")
        for row in self.pieces:
            if len(row) != len(self.x_breaks) + 1:
                raise ConfigError("need len(x_breaks)+1 speed pieces per row")
        self._funcs = [[_as_func(p) for p in row] for row in self.pieces]

    def _band(self, breaks, v, side, tol):
        idx = 0
        for b in breaks:
            if b < v - tol or (side > 0 and b <= v + tol):
                idx += 1
            elif b > v + tol:
                break
        return idx

    def limit(self, x, y, side_x, side_y, tol):
        ix = self._band(self.x_breaks, x, side_x, tol)
        iy = self._band(self.y_breaks, y, side_y, tol)
        return float(self._funcs[iy][ix](x, y))


@dataclass(frozen=True)
class WaveSpeed2D:
    """Sampled wave speed on a 2D mesh, one-sided limits per cell edge.

    cm_x[i, j] / cp_x[i, j] are the x-limits at (x_{i+1/2}, y_j) with i over
    0..n_x; cm_y[i, j] / cp_y[i, j] the y-limits at (x_i, y_{j+1/2}) with j
    over 0..n_y.  c_cell[i, j] averages the four inner edge limits of cell
    (i, j).  ifc_x / ifc_y are boolean masks of genuine jumps; boundary
    half-grid lines are never interfaces.
    """

    mesh: PhaseMesh2D
    cm_x: np.ndarray
    cp_x: np.ndarray
    cm_y: np.ndarray
    cp_y: np.ndarray
    c_cell: np.ndarray = field(init=False)
    ifc_x: np.ndarray = field(init=False)
    ifc_y: np.ndarray = field(init=False)

    def __post_init__(self):
        for arr in (self.cm_x, self.cp_x, self.cm_y, self.cp_y):
            if np.any(arr <= 0):
                raise DomainError("wave speed must be strictly positive everywhere")
        c_cell = 0.25 * (self.cp_x[:-1, :] + self.cm_x[1:, :]
                         + self.cp_y[:, :-1] + self.cm_y[:, 1:])
        ifc_x = self.cm_x != self.cp_x
        ifc_y = self.cm_y != self.cp_y
        if np.any(ifc_x[0, :]) or np.any(ifc_x[-1, :]) \
                or np.any(ifc_y[:, 0]) or np.any(ifc_y[:, -1]):
            raise ConfigError("wave-speed jump at a domain boundary is not supported")
        object.__setattr__(self, "c_cell", c_cell)
        object.__setattr__(self, "ifc_x", ifc_x)
        object.__setattr__(self, "ifc_y", ifc_y)


def sample_speed_2d(speed: PiecewiseSpeed2D, mesh: PhaseMesh2D) -> WaveSpeed2D:
    """2D analogue of :func:`sample_speed_1d`; jumps must lie on grid lines."""
    tol_x = mesh.dx * ALIGN_RTOL
    tol_y = mesh.dy * ALIGN_RTOL

    def _check_breaks(breaks, lo, hi, d, name):
        for b in breaks:
            if b <= lo + d * ALIGN_RTOL or b >= hi - d * ALIGN_RTOL:
                continue
            k = int(round((b - lo) / d))
            if abs(b - (lo + k * d)) > d * ALIGN_RTOL:
                raise GridAlignmentError(
                    f"speed break at {name}={b} is not on a half-grid line")

    # With rectangular pieces any value mismatch across a break is a jump
    # along the whole line, so alignment is required for every break.
    _check_breaks(speed.x_breaks, mesh.x_min, mesh.x_max, mesh.dx, "x")
    _check_breaks(speed.y_breaks, mesh.y_min, mesh.y_max, mesh.dy, "y")

    xs, ys = mesh.x, mesh.y
    cm_x = np.empty((mesh.n_x + 1, mesh.n_y))
    cp_x = np.empty_like(cm_x)
    for k, xh in enumerate(mesh.x_half):
        for j, yj in enumerate(ys):
            lo = speed.limit(xh, yj, -1, 0, tol_x)
            hi = speed.limit(xh, yj, +1, 0, tol_x)
            if abs(lo - hi) <= ALIGN_RTOL * max(abs(lo), abs(hi)):
                lo = hi = 0.5 * (lo + hi)
            cm_x[k, j] = lo
            cp_x[k, j] = hi

    cm_y = np.empty((mesh.n_x, mesh.n_y + 1))
    cp_y = np.empty_like(cm_y)
    for i, xi_ in enumerate(xs):
        for k, yh in enumerate(mesh.y_half):
            lo = speed.limit(xi_, yh, 0, -1, tol_y)
            hi = speed.limit(xi_, yh, 0, +1, tol_y)
            if abs(lo - hi) <= ALIGN_RTOL * max(abs(lo), abs(hi)):
                lo = hi = 0.5 * (lo + hi)
            cm_y[i, k] = lo
            cp_y[i, k] = hi

    # only the interior limit matters on the domain boundary lines
    cm_x[0, :] = cp_x[0, :]
    cp_x[-1, :] = cm_x[-1, :]
    cm_y[:, 0] = cp_y[:, 0]
    cp_y[:, -1] = cm_y[:, -1]
    return WaveSpeed2D(mesh, cm_x, cp_x, cm_y, cp_y)


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------

@dataclass
class FieldSnapshot:
    """Flattened cell-average field at one instant, tied to its mesh."""

    t: float
    values: np.ndarray
    mesh: object  # PhaseMesh1D or PhaseMesh2D

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != self.mesh.size:
            raise ConfigError(
                f"field length {self.values.size} does not match mesh size {self.mesh.size}")

    def as_grid(self) -> np.ndarray:
        """Reshape to (n_x, n_xi) or (n_x, n_y, n_xi, n_eta)."""
        if isinstance(self.mesh, PhaseMesh1D):
            return self.values.reshape(self.mesh.n_x, self.mesh.n_xi)
        return self.values.reshape(self.mesh.shape)


def flatten_field(grid: np.ndarray) -> np.ndarray:
    """Lexicographic flatten with x the slowest index (C order)."""
    return np.ascontiguousarray(grid).ravel()


def discrete_delta(z, beta: float):
    """Piecewise-linear delta kernel: (1/beta) (1 - |z/beta|) on |z| <= beta."""
    if beta <= 0:
        raise DomainError(f"delta width must be positive, got {beta}")
    z = np.asarray(z, dtype=float)
    out = np.maximum(1.0 - np.abs(z) / beta, 0.0) / beta
    return out if out.ndim else float(out)


def init_delta_field_1d(w, beta: float, mesh: PhaseMesh1D) -> FieldSnapshot:
    """Concentrate unit slowness-mass on the curve xi = w(x).

    f0_ij = delta_beta(xi_j - w(x_i)); with beta equal to dxi each column
    carries interpolation weights summing to 1/dxi.
    """
    wx = np.asarray([float(w(x)) for x in mesh.x])
    grid = discrete_delta(mesh.xi[None, :] - wx[:, None], beta)
    return FieldSnapshot(0.0, flatten_field(grid), mesh)


# ---------------------------------------------------------------------------
# Declarative text config and field I/O
# ---------------------------------------------------------------------------

def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines into {key: [values...]}.

    '#' starts a comment; keys may repeat (each occurrence is kept, in
    order), which the speed pieces use.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out.setdefault(key.strip(), []).append(value.strip())
    return out


def _single(cfg, key, default=None):
    vals = cfg.get(key)
    if not vals:
        if default is not None:
            return default
        raise ConfigError(f"missing config key {key!r}")
    if len(vals) > 1:
        raise ConfigError(f"config key {key!r} given more than once")
    return vals[0]


def _pair(cfg, key):
    parts = _single(cfg, key).split()
    if len(parts) != 2:
        raise ConfigError(f"config key {key!r} needs two numbers")
    return float(parts[0]), float(parts[1])


_EXPR_NAMES = {
    "abs": np.abs, "exp": np.exp, "sqrt": np.sqrt, "sin": np.sin,
    "cos": np.cos, "tanh": np.tanh, "pi": np.pi, "e": np.e,
}


def _compile_expr(expr: str, varnames):
    code = compile(expr, "<speed expression>", "eval")
    for name in code.co_names:
        if name not in _EXPR_NAMES and name not in varnames:
            raise ConfigError(f"unknown name {name!r} in speed expression {expr!r}")

    def f(*args):
        ns = dict(zip(varnames, args))
        ns.update(_EXPR_NAMES)
        return eval(code, {"__builtins__": {}}, ns)

    return f


def mesh_from_config(text: str) -> PhaseMesh1D:
    """Build a 1D mesh from a declarative config.

    Expected keys: ``xdomain = lo hi``, ``xidomain = lo hi``, ``nx``, ``nxi``.
    """
    cfg = parse_config(text)
    return build_mesh_1d(_pair(cfg, "xdomain"), _pair(cfg, "xidomain"),
                         int(_single(cfg, "nx")), int(_single(cfg, "nxi")))


def speed_from_config(text: str) -> PiecewiseSpeed1D:
    """Read speed pieces: repeated ``speed = lo hi : expr`` lines.

    Pieces must tile an interval left to right; ``expr`` is a constant or an
    expression in x (abs/exp/sqrt/trig/pi/e allowed).
    """
    cfg = parse_config(text)
    lines = cfg.get("speed")
    if not lines:
        raise ConfigError("no 'speed' entries in config")
    spans = []
    for entry in lines:
        if ":" not in entry:
            raise ConfigError(f"speed entry {entry!r} needs 'lo hi : expr'")
        rng, expr = entry.split(":", 1)
        parts = rng.split()
        if len(parts) != 2:
            raise ConfigError(f"speed entry {entry!r} needs two range numbers")
        spans.append((float(parts[0]), float(parts[1]), _compile_expr(expr.strip(), ("x",))))
    spans.sort(key=lambda s: s[0])
    breaks = []
    for (lo1, hi1, _), (lo2, hi2, _) in zip(spans, spans[1:]):
        if abs(hi1 - lo2) > 1e-12 * max(1.0, abs(hi1)):
            raise ConfigError("speed pieces must tile the axis without gaps")
        breaks.append(hi1)
    return PiecewiseSpeed1D(breaks=breaks, pieces=[s[2] for s in spans])


def write_field_csv(snapshot: FieldSnapshot, path) -> None:
    """1D field as CSV rows ``x,xi,f`` (header included)."""
    mesh = snapshot.mesh
    if not isinstance(mesh, PhaseMesh1D):
        raise ConfigError("CSV field output is for 1D snapshots")
    grid = snapshot.as_grid()
    xs, xis = mesh.x, mesh.xi
    with open(path, "w") as fh:
        fh.write("x,xi,f\n")
        for i in range(mesh.n_x):
            for j in range(mesh.n_xi):
                fh.write(f"{float(xs[i])!r},{float(xis[j])!r},{float(grid[i, j])!r}\n")


def read_field_csv(path, mesh: PhaseMesh1D, t: float = 0.0) -> FieldSnapshot:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if data.shape[0] != mesh.size:
        raise ConfigError("CSV row count does not match mesh size")
    return FieldSnapshot(t, data[:, 2], mesh)


def write_field_binary(snapshot: FieldSnapshot, path) -> None:
    """Raw little-endian float64 dump plus a text sidecar with the shape."""
    grid = snapshot.as_grid()
    np.ascontiguousarray(grid, dtype="<f8").tofile(path)
    with open(str(path) + ".shape.txt", "w") as fh:
        fh.write("dtype = float64 little-endian, C order\n")
        fh.write("shape = " + " ".join(str(n) for n in grid.shape) + "\n")
        fh.write(f"t = {snapshot.t!r}\n")


def read_field_binary(path, mesh) -> FieldSnapshot:
    meta = {}
    with open(str(path) + ".shape.txt") as fh:
        for line in fh:
            if "=" in line:
                key, value = line.split("=", 1)
                meta[key.strip()] = value.strip()
    shape = tuple(int(s) for s in meta["shape"].split())
    t = float(meta.get("t", "0.0"))
    values = np.fromfile(path, dtype="<f8")
    if values.size != int(np.prod(shape)) or values.size != mesh.size:
        raise ConfigError("binary field size does not match sidecar/mesh")
    return FieldSnapshot(t, values, mesh)
