"""Unitary time integration of f' = A f + b via a damped auxiliary coordinate.

The real linear system is first made homogeneous by doubling the state, then
split into Hermitian and anti-Hermitian parts.  Extending the state along an
auxiliary coordinate p with an exponential damping profile turns the dynamics
into a family of decoupled Hermitian systems, one per Fourier mode in p, each
evolving under the generator i*(H2 - mu_l*H1).  The physical state is read
back at a positive recovery point p* by undoing the damping factor.

The payoff is that every mode block evolves unitarily, which is the form a
quantum simulator expects; classically the same structure gives a clean
norm-preservation diagnostic.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .engine import DIRECT_SOLVE_LIMIT, _cn_stage, _step_plan
from .errors import ConfigError, ConvergenceError, DomainError
from .grids import FieldSnapshot

#: Largest mode-block dimension the dense exact-exponential engine accepts.
EXACT_ENGINE_LIMIT = 2048

#: Seed for the deterministic start vector of the power iteration.
_EIG_SEED = 0x5EED

#: Additive padding applied to both ends of the p interval.
P_MARGIN = 5.0


@dataclass(frozen=True)
class HomogenizedSystem:
    """Doubled system Atilde = [[A, diag(b)/eps], [0, 0]] with state [f; eps*1].

    The auxiliary block is constant in time, so the top half of the doubled
    state reproduces f' = A f + b exactly (for time-independent b).
    """

    A_tilde: sp.csr_matrix
    state0: np.ndarray
    eps: float
    n: int

    @property
    def size(self) -> int:
        return 2 * self.n


@dataclass(frozen=True)
class HermitianSplit:
    """Hermitian/anti-Hermitian decomposition M = H1 + i*H2.

    H1 is real symmetric for real input; H2 carries purely imaginary entries
    and is Hermitian.  Both are stored sparse.
    """

    H1: sp.csr_matrix
    H2: sp.csr_matrix
    n: int


@dataclass(frozen=True)
class PGrid:
    """Uniform periodic grid on [L, R) for the damping coordinate.

    Modes are ordered l = -N/2 .. N/2-1 to match the column layout of the
    transformed state.  The damping exponent is alpha(p) = 1 for p >= 0 and
    ``alpha_minus`` (>= 1) for p < 0.
    """

    L: float
    R: float
    n_p: int
    alpha_minus: float = 1.0
    dp: float = field(init=False)

    def __post_init__(self) -> None:
        if not (self.L < 0.0 < self.R):
            raise ConfigError(
                f"p interval must straddle zero, got [{self.L}, {self.R}]")
        if self.n_p < 2 or self.n_p & (self.n_p - 1):
            raise ConfigError(f"n_p must be a power of two >= 2, got {self.n_p}")
        if self.alpha_minus < 1.0:
            raise ConfigError(
                f"negative-side damping exponent must be >= 1, got {self.alpha_minus}")
        object.__setattr__(self, "dp", (self.R - self.L) / self.n_p)

    @property
    def p(self) -> np.ndarray:
        """Grid points p_k = L + k*dp for k = 0 .. n_p - 1."""
        return self.L + self.dp * np.arange(self.n_p)

    @property
    def mu(self) -> np.ndarray:
        """Mode frequencies 2*pi*l/(R - L), l = -n_p/2 .. n_p/2 - 1."""
        half = self.n_p // 2
        return 2.0 * math.pi * np.arange(-half, half) / (self.R - self.L)

    def alpha(self, p) -> np.ndarray:
        return np.where(np.asarray(p, dtype=float) >= 0.0, 1.0, self.alpha_minus)

    def damping(self, p) -> np.ndarray:
        """exp(-alpha(p)*|p|), the initial profile along the p axis."""
        p = np.asarray(p, dtype=float)
        return np.exp(-self.alpha(p) * np.abs(p))


@dataclass(frozen=True)
class RecoveryPlan:
    """Where to read the warped state back, and whether that point is trusted.

    ``valid`` records p* >= lambda_plus_max * T; reading below that threshold
    is allowed but the damping profile has not fully cleared the growth of
    the solution there, so the result is emitted with a warning.
    """

    p_star: float
    valid: bool


def recovery_plan(p_star: float, lambda_plus_max: float, T: float) -> RecoveryPlan:
    if p_star <= 0.0:
        raise DomainError(f"recovery point must be positive, got {p_star}")
    slack = 1e-12 * max(1.0, abs(p_star))
    return RecoveryPlan(p_star=float(p_star),
                        valid=p_star >= lambda_plus_max * T - slack)


def homogenize(A: sp.spmatrix, b: np.ndarray, f0: np.ndarray) -> HomogenizedSystem:
    """Fold the source b into a doubled homogeneous system.

    eps = max|b| scales the auxiliary block so its entries stay O(1); for
    b = 0 the coupling block vanishes and eps is set to 1.
    """
    A = sp.csr_matrix(A)
    n = A.shape[0]
    b = np.asarray(b, dtype=float).ravel()
    f0 = np.asarray(f0, dtype=float).ravel()
    if A.shape != (n, n) or b.shape != (n,) or f0.shape != (n,):
        raise ConfigError("A, b, f0 dimensions do not agree")
    eps = float(np.max(np.abs(b))) if b.size and np.any(b) else 1.0
    coupling = sp.diags(b / eps)
    zero = sp.csr_matrix((n, n))
    A_tilde = sp.bmat([[A, coupling], [zero, zero]], format="csr")
    state0 = np.concatenate([f0, eps * np.ones(n)])
    return HomogenizedSystem(A_tilde=A_tilde, state0=state0, eps=eps, n=n)


def split_hermitian(A_tilde: sp.spmatrix) -> HermitianSplit:
    """H1 = (M + M*)/2, H2 = (M - M*)/(2i); both Hermitian, M = H1 + i*H2."""
    M = sp.csr_matrix(A_tilde)
    adj = M.conj().T.tocsr()
    H1 = (0.5 * (M + adj)).tocsr()
    H2 = ((M - adj) * (-0.5j)).tocsr()
    return HermitianSplit(H1=H1, H2=H2, n=M.shape[0])


def _power_extreme(H: sp.spmatrix, shift: float, sign: float, tol: float,
                   max_iter: int, rng: np.random.Generator) -> float:
    """Largest eigenvalue of sign*H via power iteration on sign*H + shift*I.

    The shift makes the target eigenvalue the one of largest modulus, so the
    plain power method converges to it.  Returns the eigenvalue of sign*H.
    """
    n = H.shape[0]
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    history: list[float] = []
    theta_prev = math.inf
    for _ in range(max_iter):
        w = sign * (H @ v) + shift * v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        theta = float(v @ (sign * (H @ v)))
        history.append(theta)
        if abs(theta - theta_prev) <= tol * max(1.0, abs(theta)):
            return theta
        theta_prev = theta
    raise ConvergenceError(
        f"power iteration did not settle within {max_iter} iterations "
        f"(last estimate {theta_prev:.6e})", history=history)


def extreme_eigs(H1: sp.spmatrix, tol: float = 1e-6,
                 max_iter: int = 10_000) -> tuple[float, float]:
    """(lambda_plus_max, lambda_minus_max) of a sparse symmetric matrix.

    lambda_plus_max is the largest eigenvalue clipped below at 0, and
    lambda_minus_max the magnitude of the most negative one, also clipped.
    Both come from shifted power iterations with a deterministic start
    vector, so repeated calls give identical output.
    """
    H = sp.csr_matrix(H1)
    if H.shape[0] != H.shape[1]:
        raise ConfigError("extreme_eigs expects a square matrix")
    if H.nnz == 0:
        return 0.0, 0.0
    shift = float(np.max(np.abs(H).sum(axis=1)))
    rng = np.random.default_rng(_EIG_SEED)
    lam_max = _power_extreme(H, shift, +1.0, tol, max_iter, rng)
    lam_min = -_power_extreme(H, shift, -1.0, tol, max_iter, rng)
    return max(lam_max, 0.0), max(-lam_min, 0.0)


def design_p_grid(lambdas: tuple[float, float], T: float, n_p: int,
                  eps_target: float = 1.0, margin: float = P_MARGIN,
                  alpha_minus: float = 1.0) -> PGrid:
    """Size the p interval so damping tails stay below eps_target at time T.

    R = lambda_plus_max*T + ln(1/eps_target) + margin and symmetrically for
    L; the margin absorbs the spread of the warped profile during the run.
    """
    if not 0.0 < eps_target <= 1.0:
        raise ConfigError(f"eps_target must lie in (0, 1], got {eps_target}")
    if T < 0.0:
        raise ConfigError(f"horizon must be nonnegative, got {T}")
    lam_plus, lam_minus = (float(x) for x in lambdas)
    pad = math.log(1.0 / eps_target) + margin
    R = lam_plus * T + pad
    L = -lam_minus * T - pad
    return PGrid(L=L, R=R, n_p=int(n_p), alpha_minus=alpha_minus)


def init_warped(u0: np.ndarray, pgrid: PGrid) -> np.ndarray:
    """Initial warped state w[m, k] = exp(-alpha(p_k)|p_k|) * u0[m], flattened
    with the system index outermost."""
    u0 = np.asarray(u0, dtype=float).ravel()
    return np.outer(u0, pgrid.damping(pgrid.p)).ravel()


def _as_blocks(w: np.ndarray, pgrid: PGrid) -> np.ndarray:
    w = np.asarray(w)
    if w.size % pgrid.n_p:
        raise ConfigError(
            f"state length {w.size} is not a multiple of n_p = {pgrid.n_p}")
    return w.reshape(-1, pgrid.n_p)


def spectral_transform_p(w: np.ndarray, pgrid: PGrid,
                         direction: str = "forward") -> np.ndarray:
    """Fourier transform along p, mode order l = -n_p/2 .. n_p/2 - 1.

    Forward returns coefficients of exp(i*mu_l*(p - L)); inverse undoes it.
    The pair is an identity to round-off.
    """
    blocks = _as_blocks(w, pgrid)
    if direction == "forward":
        out = np.fft.fftshift(np.fft.fft(blocks, axis=1), axes=1) / pgrid.n_p
    elif direction == "inverse":
        out = np.fft.ifft(np.fft.ifftshift(blocks, axes=1), axis=1) * pgrid.n_p
    else:
        raise ConfigError(f"unknown transform direction {direction!r}")
    return out.ravel()


def kron_hamiltonian(split: HermitianSplit, pgrid: PGrid) -> sp.csr_matrix:
    """Full-space generator H = H1 (x) diag(mu) - H2 (x) I.

    The transformed state obeys dw/dt = -i H w; the per-mode loop in
    :func:`evolve` is the block-diagonal form of the same operator.  Used by
    tests to cross-check the mode evolution, not by the pipeline itself.
    """
    eye = sp.identity(pgrid.n_p, format="csr")
    return (sp.kron(split.H1, sp.diags(pgrid.mu), format="csr")
            - sp.kron(split.H2, eye, format="csr")).tocsr()


def _mode_generator(split: HermitianSplit, mu: float) -> sp.csr_matrix:
    return (split.H2 - mu * split.H1).tocsr()


def _map_modes(worker, n_modes: int, threads: int) -> None:
    # Every worker call touches a distinct output column, so a thread map
    # gives bit-identical results in any schedule.
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(worker, range(n_modes)))
    else:
        for idx in range(n_modes):
            worker(idx)


def _evolve_exact(blocks: np.ndarray, split: HermitianSplit, mu: np.ndarray,
                  T: float, threads: int = 1) -> np.ndarray:
    out = np.empty_like(blocks)

    def worker(idx):
        M = _mode_generator(split, mu[idx]).toarray()
        vals, vecs = np.linalg.eigh(M)
        phase = np.exp(1j * vals * T)
        out[:, idx] = vecs @ (phase * (vecs.conj().T @ blocks[:, idx]))

    _map_modes(worker, mu.size, threads)
    return out


def _evolve_stepped(blocks: np.ndarray, split: HermitianSplit, mu: np.ndarray,
                    T: float, dt: float, scheme: str,
                    threads: int = 1) -> np.ndarray:
    n_steps, last = _step_plan(T, dt)
    direct = split.n <= DIRECT_SOLVE_LIMIT
    out = np.empty_like(blocks)
    short = abs(last - dt) > 1e-12 * dt

    def worker(idx):
        gen = 1j * _mode_generator(split, mu[idx])
        if scheme == "crank-nicolson":
            M_ex, solve = _cn_stage(gen, dt, direct)
            step = lambda v: solve(M_ex @ v, v)
            if short:
                M_ex_l, solve_l = _cn_stage(gen, last, direct)
                step_last = lambda v: solve_l(M_ex_l @ v, v)
            else:
                step_last = step
        else:
            solve = _be_stage(gen, dt, direct)
            step = solve
            step_last = _be_stage(gen, last, direct) if short else step
        v = blocks[:, idx].astype(complex)
        for k in range(n_steps):
            v = step_last(v) if k == n_steps - 1 else step(v)
        out[:, idx] = v

    _map_modes(worker, mu.size, threads)
    return out


def _be_stage(A: sp.spmatrix, h: float, direct: bool):
    """One backward-Euler stage: solve (I - h*A) v_new = v."""
    n = A.shape[0]
    M_im = (sp.identity(n, format="csr", dtype=A.dtype) - h * A).tocsc()
    if direct:
        lu = spla.splu(M_im)
        return lambda v: lu.solve(v)
    M_im = M_im.tocsr()
    dinv = 1.0 / M_im.diagonal()
    precond = spla.LinearOperator((n, n), matvec=lambda v: dinv * v,
                                  dtype=M_im.dtype)

    def solve(v):
        out, info = spla.bicgstab(M_im, v, x0=v, rtol=1e-10, atol=0.0,
                                  M=precond)
        if info != 0:
            resid = float(np.linalg.norm(M_im @ out - v))
            raise ConvergenceError(
                f"backward-Euler solve failed (info={info}, residual {resid:.3e})",
                history=[resid])
        return out

    return solve


_ENGINE_ALIASES = {
    "exact-exponential": "exact-exponential",
    "exact": "exact-exponential",
    "crank-nicolson": "crank-nicolson",
    "cn": "crank-nicolson",
    "backward-euler": "backward-euler",
    "be": "backward-euler",
}


def evolve(w_tilde0: np.ndarray, split: HermitianSplit, pgrid: PGrid, T: float,
           engine: str = "crank-nicolson", dt: float | None = None,
           max_dense_dim: int = EXACT_ENGINE_LIMIT,
           threads: int = 1) -> np.ndarray:
    """Advance every mode block by T under dw_l/dt = i*(H2 - mu_l*H1) w_l.

    Engines: "exact-exponential" diagonalizes each (dense) block, admissible
    only up to ``max_dense_dim``; "crank-nicolson" and "backward-euler" are
    stepped solvers that require dt and reuse one factorization per mode.
    The mode blocks are independent, so ``threads`` > 1 maps them over a
    thread pool without changing the result.
    """
    if threads < 1:
        raise ConfigError(f"threads must be at least 1, got {threads}")
    try:
        engine = _ENGINE_ALIASES[engine]
    except KeyError:
        raise ConfigError(f"unknown evolution engine {engine!r}") from None
    if T < 0.0:
        raise ConfigError(f"horizon must be nonnegative, got {T}")
    blocks = _as_blocks(w_tilde0, pgrid).astype(complex)
    if blocks.shape[0] != split.n:
        raise ConfigError(
            f"state has {blocks.shape[0]} system rows, split expects {split.n}")
    if T == 0.0:
        return blocks.ravel()
    if engine == "exact-exponential":
        if split.n > max_dense_dim:
            raise ConfigError(
                f"exact engine capped at dimension {max_dense_dim}, "
                f"system has {split.n}")
        out = _evolve_exact(blocks, split, pgrid.mu, T, threads)
    else:
        if dt is None or dt <= 0.0:
            raise ConfigError(f"{engine} engine needs a positive dt, got {dt}")
        out = _evolve_stepped(blocks, split, pgrid.mu, T, dt, engine, threads)
    return out.ravel()


def recover(w_T: np.ndarray, pgrid: PGrid, plan: RecoveryPlan) -> np.ndarray:
    """Read u = exp(p*) w(., p_k) off the warped state at the recovery point.

    The field is read at the grid node nearest p* (with a warning when that
    snap moves the point) but the damping is undone with the requested p*
    itself, so an off-node p* costs a relative error of order |p* - p_k|,
    first order in dp.  Reading below the validity threshold is allowed but
    warned about.  The returned vector is complex; the imaginary part is
    truncation noise.
    """
    if plan.p_star <= 0.0:
        raise DomainError(f"recovery point must be positive, got {plan.p_star}")
    blocks = _as_blocks(w_T, pgrid)
    p = pgrid.p
    k = int(np.argmin(np.abs(p - plan.p_star)))
    if abs(p[k] - plan.p_star) > 1e-12 * max(1.0, abs(plan.p_star)):
        warnings.warn(
            f"recovery point {plan.p_star:.6g} snapped to grid node "
            f"{p[k]:.6g}", RuntimeWarning, stacklevel=2)
    if not plan.valid:
        warnings.warn(
            f"recovery point {plan.p_star:.6g} is below the damping-validity "
            "threshold; the recovered state may be contaminated",
            RuntimeWarning, stacklevel=2)
    return math.exp(plan.p_star) * blocks[:, k]


def run_pipeline(system, f0, T: float, n_p: int = 1024,
                 eps_target: float = 1.0, margin: float = P_MARGIN,
                 alpha_minus: float = 1.0, p_star: float | None = None,
                 engine: str = "crank-nicolson", dt: float | None = None,
                 eig_tol: float = 1e-6, threads: int = 1,
                 report: dict | None = None):
    """Full chain: homogenize, split, warp, transform, evolve, recover.

    Returns a :class:`FieldSnapshot` when the system carries a mesh, else the
    bare recovered vector (real part).  The auxiliary half of the doubled
    state is dropped.  Pass a dict as ``report`` to collect the run record
    (spectral bounds, grid, recovery point, engine, stage timings).
    """
    timings: dict[str, float] = {}
    tic = time.perf_counter()
    homog = homogenize(system.A, system.b, f0)
    split = split_hermitian(homog.A_tilde)
    timings["setup"] = time.perf_counter() - tic

    tic = time.perf_counter()
    lam_plus, lam_minus = extreme_eigs(split.H1, tol=eig_tol)
    timings["spectral_bounds"] = time.perf_counter() - tic

    pgrid = design_p_grid((lam_plus, lam_minus), T, n_p,
                          eps_target=eps_target, margin=margin,
                          alpha_minus=alpha_minus)
    if p_star is None:
        above = pgrid.p[pgrid.p > lam_plus * T]
        if above.size == 0:
            raise ConfigError("p grid has no node above the validity threshold")
        p_star = float(above[0])
    plan = recovery_plan(p_star, lam_plus, T)

    tic = time.perf_counter()
    w0 = init_warped(homog.state0, pgrid)
    w_tilde = spectral_transform_p(w0, pgrid, "forward")
    w_tilde = evolve(w_tilde, split, pgrid, T, engine=engine, dt=dt,
                     threads=threads)
    w_T = spectral_transform_p(w_tilde, pgrid, "inverse")
    timings["evolution"] = time.perf_counter() - tic

    u = recover(w_T, pgrid, plan)
    f_T = u[:homog.n].real.copy()

    if report is not None:
        report.update({
            "lambda_plus_max": lam_plus,
            "lambda_minus_max": lam_minus,
            "L": pgrid.L,
            "R": pgrid.R,
            "n_p": pgrid.n_p,
            "dp": pgrid.dp,
            "p_star": plan.p_star,
            "recovery_valid": plan.valid,
            "engine": _ENGINE_ALIASES.get(engine, engine),
            "dt": dt,
            "eps": homog.eps,
            "timings": timings,
        })
    mesh = getattr(system, "mesh", None)
    if mesh is not None:
        return FieldSnapshot(t=T, values=f_T, mesh=mesh)
    return f_T
