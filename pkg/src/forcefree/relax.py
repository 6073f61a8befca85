"""Helicity-constrained minimisation of the magnetic energy.

The minimiser solves the semilinear Grad-Shafranov problem

    -L phi = mu^2 (phi - phi_inf)_+,   G = mu (phi - phi_inf)_+,

by a damped Picard iteration in which ``mu`` is recomputed at every step so
that the generalized helicity of the iterate equals the target exactly.  All
solves are carried out at W = 2 and the result is rescaled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.signal import correlate

from .clebsch import (
    ClebschField,
    HalfPlaneGrid,
    apply_L,
    energy,
    gen_helicity,
    green_F,
    weighted_l2,
    weighted_msp,
)
from .fields import FieldParams, helicity_constant_hC

__all__ = [
    "SeedBubble",
    "RelaxConfig",
    "RelaxReport",
    "DegenerateSupportError",
    "SolverError",
    "scaling_reduce",
    "recover_mu",
    "steiner_symmetrize",
    "gs_solve_step",
    "minimize",
    "minimum_curve",
    "align_z",
    "orbit_distance",
]


class DegenerateSupportError(ArithmeticError):
    """The positive set {phi > phi_inf} is empty, so mu cannot be recovered."""


class SolverError(ArithmeticError):
    """The linear solve missed its residual target."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class SeedBubble:
    """Initial bump a r^2 exp(-((z - z0)^2 + r^2) / sigma^2) added to phi_inf."""

    z0: float = 0.0
    sigma: float = 2.7
    amplitude: float = 4.0

    def __post_init__(self):
        if not (self.sigma > 0 and self.amplitude > 0):
            raise ValueError("seed sigma and amplitude must be positive")


@dataclass(frozen=True)
class RelaxConfig:
    """Settings for :func:`minimize`.

    Keep the box half-width and ``r_max`` at four ball radii or more; the
    truncated exterior then biases mu by well under one percent.
    ``boundary`` selects homogeneous Dirichlet data on the box (``"dirichlet"``)
    or free-space boundary values from the Green kernel (``"free"``).
    """

    target_h: float
    params: FieldParams
    grid: HalfPlaneGrid
    max_iters: int = 2000
    tol_phi: float = 1e-9
    tol_h: float = 1e-9
    under_relaxation: float = 0.25
    steiner_every: int = 0
    seed_bubble: SeedBubble = dc_field(default_factory=SeedBubble)
    boundary: str = "dirichlet"

    def __post_init__(self):
        if not math.isfinite(self.target_h):
            raise ValueError("target_h must be finite")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not (self.tol_phi > 0 and self.tol_h > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.under_relaxation <= 1:
            raise ValueError("under_relaxation must lie in (0, 1]")
        if self.steiner_every < 0:
            raise ValueError("steiner_every must be >= 0")
        if self.boundary not in ("dirichlet", "free"):
            raise ValueError("boundary must be 'dirichlet' or 'free'")

    @classmethod
    def benchmark(cls, params: FieldParams, n: int = 256, **kw) -> "RelaxConfig":
        """Chandrasekhar benchmark: target h_C on the box [-4R, 4R] x [0, 4R]."""
        R = params.R
        grid = HalfPlaneGrid.box(4 * R, 4 * R, n, n)
        seed = SeedBubble(0.0, 0.6 * R, params.W)
        return cls(helicity_constant_hC(params), params, grid, seed_bubble=seed, **kw)


@dataclass
class RelaxReport:
    field: ClebschField
    mu: float
    energy_history: list[float]
    helicity_history: list[float]
    gs_residual: float
    converged: bool
    iterations: int
    status: str = "converged"
    reseeds: int = 0
    mu_history: list[float] = dc_field(default_factory=list)
    change_history: list[float] = dc_field(default_factory=list)

    @property
    def energy(self) -> float:
        return self.energy_history[-1] if self.energy_history else 0.0

    def history_lines(self) -> list[str]:
        """One line per iteration: ``k energy H mu change``."""
        rows = zip(self.energy_history, self.helicity_history, self.mu_history, self.change_history)
        return [f"{k + 1} {e:.17g} {h:.17g} {m:.17g} {c:.17g}" for k, (e, h, m, c) in enumerate(rows)]


def scaling_reduce(h: float, W: float, gamma: float) -> tuple[float, float]:
    """Map (h, gamma) at far-field strength W to the equivalent problem at W = 2."""
    if not W > 0:
        raise ValueError("W must be positive")
    s = 0.5 * W
    return h / s**2, gamma / s


def recover_mu(phi: np.ndarray, target_h: float, params: FieldParams, grid: HalfPlaneGrid) -> float:
    """Multiplier that pins the helicity of (phi, mu (phi - phi_inf)_+) to ``target_h``."""
    if target_h == 0:
        return 0.0
    m2 = weighted_msp(phi, grid, params)
    if m2 == 0:
        raise DegenerateSupportError("empty positive set; the iteration needs a new seed")
    return target_h / (2.0 * m2)


@lru_cache(maxsize=8)
def _centre_order(nz: int) -> np.ndarray:
    # node indices ordered by distance from the midpoint, ties to the lower index
    return np.argsort(np.abs(np.arange(nz) - 0.5 * (nz - 1)), kind="stable")


def steiner_symmetrize(phi: np.ndarray) -> np.ndarray:
    """Symmetric decreasing rearrangement in z of every r-column about the grid midpoint."""
    a = np.maximum(np.asarray(phi, dtype=float), 0.0)
    out = np.empty_like(a)
    out[_centre_order(a.shape[0])] = -np.sort(-a, axis=0)
    return out


# --- linear solver --------------------------------------------------------

@lru_cache(maxsize=4)
def _factor(grid: HalfPlaneGrid):
    nz, nr = grid.shape
    hz, hr = grid.hz, grid.hr
    mi, mj = nz - 2, nr - 2
    I, J = np.meshgrid(np.arange(mi), np.arange(mj), indexing="ij")
    I, J = I.ravel(), J.ravel()
    k = I * mj + J
    r = grid.r[1:-1][J]
    rows, cols, vals = [k], [k], [np.full(k.size, 2 / hz**2 + 2 / hr**2)]
    for di, dj, c in ((1, 0, np.full(k.size, -1 / hz**2)),
                      (-1, 0, np.full(k.size, -1 / hz**2)),
                      (0, 1, -1 / hr**2 + 1 / (2 * hr * r)),
                      (0, -1, -1 / hr**2 - 1 / (2 * hr * r))):
        I2, J2 = I + di, J + dj
        ok = (I2 >= 0) & (I2 < mi) & (J2 >= 0) & (J2 < mj)
        rows.append(k[ok])
        cols.append(I2[ok] * mj + J2[ok])
        vals.append(c[ok])
    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(mi * mj, mi * mj))
    return A, spla.splu(A)


def gs_solve_step(rhs: np.ndarray, grid: HalfPlaneGrid, boundary: np.ndarray | None = None,
                  rtol: float = 1e-10) -> np.ndarray:
    """Solve -L phi = rhs with the 5-point stencil.

    ``phi`` vanishes on the axis.  On the outer box it is zero, or taken from
    ``boundary`` when given.  Raises :class:`SolverError` if the relative
    residual exceeds ``rtol``.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != grid.shape or not np.all(np.isfinite(rhs)):
        raise ValueError("rhs must be a finite array on the grid")
    hz, hr = grid.hz, grid.hr
    b = rhs[1:-1, 1:-1].copy()
    phi = np.zeros(grid.shape)
    if boundary is not None:
        phi[0], phi[-1], phi[:, -1] = boundary[0], boundary[-1], boundary[:, -1]
        phi[:, 0] = 0.0
        r_last = grid.r[-2]
        b[0] += phi[0, 1:-1] / hz**2
        b[-1] += phi[-1, 1:-1] / hz**2
        b[:, -1] += phi[1:-1, -1] * (1 / hr**2 - 1 / (2 * hr * r_last))
    A, lu = _factor(grid)
    x = lu.solve(b.ravel())
    bn = np.linalg.norm(b)
    if bn > 0:
        res = np.linalg.norm(A @ x - b.ravel()) / bn
        if not res <= rtol:
            raise SolverError(f"linear solve residual {res:.3e} above {rtol:.1e}", res)
    phi[1:-1, 1:-1] = x.reshape(b.shape)
    return phi


class _FreeSpaceBoundary:
    """Boundary values of the free-space solution of -L phi = rhs.

    Kernel columns are cached per source node, so the cost per iteration is
    one matrix-vector product once the positive set has settled.
    """

    def __init__(self, grid: HalfPlaneGrid):
        self.grid = grid
        Z, R = grid.mesh()
        mask = np.zeros(grid.shape, dtype=bool)
        mask[0] = mask[-1] = True
        mask[:, -1] = True
        mask[:, 0] = False
        self.mask = mask
        self.zb, self.rb = Z[mask], R[mask]
        self.zs, self.rs = Z.ravel(), R.ravel()
        self.w = grid.weights().ravel()
        self.cache: dict[int, np.ndarray] = {}

    def _column(self, k: int) -> np.ndarray:
        col = self.cache.get(k)
        if col is None:
            zs, rs = self.zs[k], self.rs[k]
            rr = self.rb * rs
            s = ((self.zb - zs) ** 2 + (self.rb - rs) ** 2) / rr
            col = np.sqrt(rr) / (2 * math.pi) * green_F(s) * self.w[k] / rs
            self.cache[k] = col
        return col

    def __call__(self, rhs: np.ndarray) -> np.ndarray:
        flat = rhs.ravel()
        src = np.flatnonzero((flat != 0) & (self.rs > 0))
        out = np.zeros(self.grid.shape)
        if src.size:
            K = np.stack([self._column(k) for k in src], axis=1)
            out[self.mask] = K @ flat[src]
        return out


# --- orbit comparison ------------------------------------------------------

def _positive_part(phi, params: FieldParams, grid: HalfPlaneGrid) -> np.ndarray:
    R = grid.mesh()[1]
    return np.maximum(np.asarray(phi, dtype=float) - params.phi_inf(R), 0.0)


def _shift_z(a: np.ndarray, shift: float) -> np.ndarray:
    """Translate column data by ``shift`` cells in z (linear interpolation, zero fill)."""
    n = round(shift)
    if abs(shift - n) < 1e-9:
        out = np.zeros_like(a)
        if n >= 0:
            out[n:] = a[:a.shape[0] - n]
        else:
            out[:n] = a[-n:]
        return out
    idx = np.arange(a.shape[0]) - shift
    lo = np.floor(idx).astype(int)
    t = (idx - lo)[:, None]
    def take(i):
        ok = (i >= 0) & (i < a.shape[0])
        v = np.zeros_like(a)
        v[ok] = a[i[ok]]
        return v
    return (1 - t) * take(lo) + t * take(lo + 1)


def align_z(a: np.ndarray, b: np.ndarray, grid: HalfPlaneGrid) -> float:
    """Shift in cells that best maps ``b`` onto ``a`` (cross-correlation, parabolic peak)."""
    w = np.zeros(grid.nr)
    w[1:] = 1.0 / grid.r[1:]
    c = correlate(a * w, b, mode="full", method="fft")[:, b.shape[1] - 1]
    k = int(np.argmax(c))
    lag = k - (b.shape[0] - 1)
    if 0 < k < c.size - 1:
        den = c[k - 1] - 2 * c[k] + c[k + 1]
        if den < 0:
            lag += 0.5 * (c[k - 1] - c[k + 1]) / den
    return float(lag)


def orbit_distance(phi_a: np.ndarray, phi_b: np.ndarray, grid: HalfPlaneGrid,
                   params_a: FieldParams, params_b: FieldParams | None = None) -> tuple[float, float]:
    """Relative weighted L2 distance between the z-aligned positive parts.

    Returns ``(distance, shift)`` where ``shift`` (in z units) moves field b
    onto field a and the distance is normalised by the norm of b's positive part.
    """
    pa = _positive_part(phi_a, params_a, grid)
    pb = _positive_part(phi_b, params_b or params_a, grid)
    nb = weighted_l2(pb, grid)
    if nb == 0:
        return (0.0 if weighted_l2(pa, grid) == 0 else math.inf), 0.0
    lag = align_z(pa, pb, grid)
    return weighted_l2(pa - _shift_z(pb, lag), grid) / nb, lag * grid.hz


# --- minimisation ------------------------------------------------------------

def _seed(grid: HalfPlaneGrid, params: FieldParams, seed: SeedBubble, amplitude: float) -> np.ndarray:
    Z, R = grid.mesh()
    phi = params.phi_inf(R) + amplitude * R**2 * np.exp(-((Z - seed.z0) ** 2 + R**2) / seed.sigma**2)
    phi[0] = phi[-1] = 0.0
    phi[:, -1] = 0.0
    phi[:, 0] = 0.0
    return phi


def _gs_residual(phi: np.ndarray, mu: float, params: FieldParams, grid: HalfPlaneGrid) -> float:
    res = -apply_L(phi, grid) - mu**2 * _positive_part(phi, params, grid)
    res[[0, -1]] = 0.0
    res[:, [0, -1]] = 0.0
    return weighted_l2(res, grid)


def _picard(cfg: RelaxConfig, h: float, params: FieldParams, amplitude: float, scale: float):
    grid = cfg.grid
    omega = cfg.under_relaxation
    R = grid.mesh()[1]
    phinf = params.phi_inf(R)
    free = _FreeSpaceBoundary(grid) if cfg.boundary == "free" else None
    symmetrize = cfg.steiner_every > 0 and params.gamma == 0 and cfg.seed_bubble.z0 == 0
    phi = _seed(grid, params, cfg.seed_bubble, amplitude)
    e_hist: list[float] = []
    h_hist: list[float] = []
    mu_hist: list[float] = []
    c_hist: list[float] = []
    converged = False
    k = 0
    for k in range(1, cfg.max_iters + 1):
        mu = recover_mu(phi, h, params, grid)
        rhs = mu**2 * np.maximum(phi - phinf, 0.0)
        raw = gs_solve_step(rhs, grid, free(rhs) if free is not None else None)
        new = (1 - omega) * phi + omega * raw
        if symmetrize and k % cfg.steiner_every == 0:
            new = steiner_symmetrize(new)
        change = np.linalg.norm(new - phi) / max(np.linalg.norm(new), 1e-300)
        phi = new
        mu = recover_mu(phi, h, params, grid)
        f = ClebschField(grid, phi, mu * np.maximum(phi - phinf, 0.0))
        H = gen_helicity(f, params)
        e_hist.append(scale**2 * energy(f))
        h_hist.append(scale**2 * H)
        mu_hist.append(mu)
        c_hist.append(change)
        if change <= cfg.tol_phi and abs(H - h) <= cfg.tol_h * abs(h):
            converged = True
            break
    return phi, mu, (e_hist, h_hist, mu_hist, c_hist), converged, k


def minimize(config: RelaxConfig) -> RelaxReport:
    """Minimise the magnetic energy at fixed generalized helicity ``config.target_h``."""
    p = config.params
    grid = config.grid
    if config.target_h == 0:
        zero = ClebschField(grid, np.zeros(grid.shape), np.zeros(grid.shape))
        return RelaxReport(zero, 0.0, [0.0], [0.0], 0.0, True, 0)
    h_red, g_red = scaling_reduce(config.target_h, p.W, p.gamma)
    reduced = FieldParams(2.0, p.lam, g_red)
    scale = 0.5 * p.W
    amplitude = config.seed_bubble.amplitude / scale
    reseeds = 0
    while True:
        try:
            phi, mu, hist, converged, k = _picard(config, h_red, reduced, amplitude, scale)
            break
        except DegenerateSupportError:
            if reseeds == 3:
                zero = ClebschField(grid, np.zeros(grid.shape), np.zeros(grid.shape))
                return RelaxReport(zero, math.nan, [], [], math.inf, False, 0,
                                   status="degenerate_support", reseeds=reseeds)
            reseeds += 1
            amplitude *= 2.0
    R = grid.mesh()[1]
    G = mu * np.maximum(phi - reduced.phi_inf(R), 0.0)
    field = ClebschField(grid, scale * phi, scale * G)
    res = scale * _gs_residual(phi, mu, reduced, grid)
    e_hist, h_hist, mu_hist, c_hist = hist
    return RelaxReport(field, mu, e_hist, h_hist, res, converged, k,
                       status="converged" if converged else "max_iters", reseeds=reseeds,
                       mu_history=mu_hist, change_history=c_hist)


def minimum_curve(h_values: Sequence[float], params: FieldParams, grid: HalfPlaneGrid,
                  config: RelaxConfig | None = None,
                  sigma_factors: Sequence[float] = (1.0, 0.7, 1.4)) -> list[float]:
    """Lowest converged energy I_h for each h over seeds of several widths.

    Raises ``RuntimeError`` when no seed converges for some h.
    """
    base = config or RelaxConfig(1.0, params, grid)
    out = []
    for h in h_values:
        if h == 0:
            raise ValueError("minimum_curve needs nonzero h")
        best = math.inf
        for f in sigma_factors:
            seed = replace(base.seed_bubble, sigma=f * base.seed_bubble.sigma)
            rep = minimize(replace(base, target_h=h, params=params, grid=grid, seed_bubble=seed))
            if rep.converged:
                best = min(best, rep.energy)
        if not math.isfinite(best):
            raise RuntimeError(f"no seed converged for h = {h!r}")
        out.append(best)
    return out
