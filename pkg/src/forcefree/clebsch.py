"""Clebsch potentials (phi, G) of axisymmetric solenoidal fields on a truncated half-plane.

A field b = curl(phi grad theta) + G grad theta is stored as two node arrays of
shape ``(nz, nr)``; row ``j = 0`` is the symmetry axis.  Integrals over R^3 are
reduced to the half-plane with dx = 2 pi r dz dr and evaluated with the
node-centred trapezoid rule.  Integrands carrying 1/r weights vanish on the axis
because phi and G are O(r^2) there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import FieldParams

__all__ = [
    "HalfPlaneGrid",
    "ClebschField",
    "Functionals",
    "DivergenceError",
    "energy",
    "gen_helicity",
    "mean_square_potential",
    "weighted_msp",
    "functionals",
    "field_components",
    "clebsch_from_components",
    "discrete_divergence",
    "green_F",
    "vector_potential_eta",
    "apply_L",
    "IsometryNorms",
    "lift_to_5d_norms",
    "weighted_l2",
    "dirichlet_energy",
    "DumpParseError",
    "format_dump",
    "write_dump",
    "parse_dump",
    "read_dump",
]


@dataclass(frozen=True)
class HalfPlaneGrid:
    """Uniform (z, r) grid on [z_min, z_max] x [0, r_max] including the axis row."""

    z_min: float
    z_max: float
    r_max: float
    nz: int
    nr: int

    def __post_init__(self):
        if self.nz < 4 or self.nr < 4:
            raise ValueError("HalfPlaneGrid needs nz, nr >= 4")
        if not self.z_max > self.z_min:
            raise ValueError("z_max must exceed z_min")
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")

    @classmethod
    def box(cls, half_width: float, r_max: float, nz: int, nr: int) -> "HalfPlaneGrid":
        return cls(-half_width, half_width, r_max, nz, nr)

    @property
    def hz(self) -> float:
        return (self.z_max - self.z_min) / (self.nz - 1)

    @property
    def hr(self) -> float:
        return self.r_max / (self.nr - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nz, self.nr)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.nz)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.nr)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.z, self.r, indexing="ij")

    def weights(self) -> np.ndarray:
        """Trapezoid weights for dz dr."""
        wz = np.full(self.nz, self.hz)
        wz[[0, -1]] *= 0.5
        wr = np.full(self.nr, self.hr)
        wr[[0, -1]] *= 0.5
        return np.outer(wz, wr)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values * self.weights()))

    def refine(self, factor: int = 2) -> "HalfPlaneGrid":
        return HalfPlaneGrid(self.z_min, self.z_max, self.r_max,
                             factor * (self.nz - 1) + 1, factor * (self.nr - 1) + 1)


@dataclass(frozen=True, eq=False)
class ClebschField:
    """Potentials ``phi`` and ``G`` sampled on ``grid`` (arrays are made read-only)."""

    grid: HalfPlaneGrid
    phi: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        for name in ("phi", "G"):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != self.grid.shape:
                raise ValueError(f"{name} has shape {a.shape}, expected {self.grid.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite values")
            if np.any(a[:, 0] != 0.0):
                raise ValueError(f"{name} must vanish on the axis row r = 0")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_functions(cls, grid: HalfPlaneGrid, phi_fn, G_fn=None) -> "ClebschField":
        Z, R = grid.mesh()
        phi = np.asarray(phi_fn(Z, R), dtype=float) * np.ones(grid.shape)
        G = np.zeros(grid.shape) if G_fn is None else np.asarray(G_fn(Z, R), dtype=float) * np.ones(grid.shape)
        phi[:, 0] = 0.0
        G[:, 0] = 0.0
        return cls(grid, phi, G)

    def with_G(self, G: np.ndarray) -> "ClebschField":
        return ClebschField(self.grid, self.phi, G)

    def boundary_max(self) -> float:
        """Largest |phi| on the outer box boundary (zero for a truncated field)."""
        p = self.phi
        return float(max(np.abs(p[0]).max(), np.abs(p[-1]).max(), np.abs(p[:, -1]).max()))


@dataclass(frozen=True)
class Functionals:
    E: float
    H: float
    M: float


class DivergenceError(ValueError):
    """Raised when component data are not discretely divergence-free."""


def _inv_r(grid: HalfPlaneGrid) -> np.ndarray:
    r = grid.r
    out = np.zeros_like(r)
    out[1:] = 1.0 / r[1:]
    return out


def _gradient(a: np.ndarray, grid: HalfPlaneGrid):
    dz, dr = np.gradient(a, grid.hz, grid.hr, edge_order=2)
    return dz, dr


def _excess(field: ClebschField, params: FieldParams) -> np.ndarray:
    Z, R = field.grid.mesh()
    return np.maximum(field.phi - params.phi_inf(R), 0.0)


def dirichlet_energy(phi: np.ndarray, grid: HalfPlaneGrid, stencil: str = "centered") -> float:
    """Weighted Dirichlet integral of |grad phi|^2 / r over the half-plane.

    ``stencil="centered"`` differentiates at the nodes (second order, used by
    :func:`energy`).  ``stencil="edge"`` sums squared nearest-neighbour
    differences over grid edges with 1/r taken at the edge midpoint; this form
    is the one that rearrangements in z provably do not increase.
    """
    if stencil == "centered":
        dz, dr = _gradient(phi, grid)
        return grid.integrate((dz**2 + dr**2) * _inv_r(grid))
    if stencil != "edge":
        raise ValueError(f"unknown stencil {stencil!r}")
    phi = np.asarray(phi, dtype=float)
    hz, hr = grid.hz, grid.hr
    r = grid.r
    inv = _inv_r(grid)
    z_part = np.sum((np.diff(phi, axis=0) / hz) ** 2 * inv) * hz * hr
    r_part = np.sum((np.diff(phi, axis=1) / hr) ** 2 / (0.5 * (r[1:] + r[:-1]))) * hz * hr
    return float(z_part + r_part)


def weighted_l2(a: np.ndarray, grid: HalfPlaneGrid) -> float:
    """Norm in L^2(R^2_+; r^-1)."""
    return math.sqrt(grid.integrate(a**2 * _inv_r(grid)))


def energy(field: ClebschField) -> float:
    """Magnetic energy (1/2) int |b|^2 dx = pi int (|grad phi|^2 + G^2) / r dz dr."""
    g = field.grid
    return math.pi * (dirichlet_energy(field.phi, g) + g.integrate(field.G**2 * _inv_r(g)))


def gen_helicity(field: ClebschField, params: FieldParams) -> float:
    """Generalized magnetic helicity 4 pi int (phi - phi_inf)_+ G / r dz dr."""
    g = field.grid
    return 4.0 * math.pi * g.integrate(_excess(field, params) * field.G * _inv_r(g))


def mean_square_potential(field: ClebschField, params: FieldParams) -> float:
    """Volume integral of (phi - phi_inf)_+^2 over R^3, i.e. 2 pi int (.)^2 r dz dr."""
    g = field.grid
    Z, R = g.mesh()
    return 2.0 * math.pi * g.integrate(_excess(field, params) ** 2 * R)


def weighted_msp(phi: np.ndarray, grid: HalfPlaneGrid, params: FieldParams) -> float:
    """int (phi - phi_inf)_+^2 r^-2 dx = 2 pi int (.)^2 / r dz dr."""
    Z, R = grid.mesh()
    ex = np.maximum(phi - params.phi_inf(R), 0.0)
    return 2.0 * math.pi * grid.integrate(ex**2 * _inv_r(grid))


def functionals(field: ClebschField, params: FieldParams) -> Functionals:
    return Functionals(energy(field), gen_helicity(field, params),
                       mean_square_potential(field, params))


def field_components(field: ClebschField):
    """(b_z, b_r, b_theta) = ((1/r) d_r phi, -(1/r) d_z phi, G / r).

    On the axis b_r = b_theta = 0 and b_z is twice the r^2 coefficient of a
    two-point fit phi ~ c r^2 + d r^4.
    """
    g = field.grid
    inv = _inv_r(g)
    dz, dr = _gradient(field.phi, g)
    bz = dr * inv
    br = -dz * inv
    bt = field.G * inv
    p1, p2 = field.phi[:, 1], field.phi[:, 2]
    bz[:, 0] = (16.0 * p1 - p2) / (6.0 * g.hr**2)
    br[:, 0] = 0.0
    bt[:, 0] = 0.0
    return bz, br, bt


def discrete_divergence(bz: np.ndarray, br: np.ndarray, grid: HalfPlaneGrid) -> np.ndarray:
    """(1/r) d_r(r b_r) + d_z b_z on interior nodes with r > 0."""
    R = grid.mesh()[1]
    dzbz = (bz[2:, 1:-1] - bz[:-2, 1:-1]) / (2 * grid.hz)
    rbr = R * br
    drbr = (rbr[1:-1, 2:] - rbr[1:-1, :-2]) / (2 * grid.hr) / R[1:-1, 1:-1]
    return dzbz + drbr


def _volume_l2(a: np.ndarray, R: np.ndarray, hz: float, hr: float) -> float:
    return math.sqrt(2 * math.pi * float(np.sum(a**2 * R)) * hz * hr)


def clebsch_from_components(bz, br, bt, grid: HalfPlaneGrid, div_tol: float = 1e-2) -> ClebschField:
    """Recover (phi, G): G = r b_theta and phi = int_0^r r' b_z dr' column by column.

    Raises :class:`DivergenceError` when the relative discrete divergence
    exceeds ``div_tol``.
    """
    bz, br, bt = (np.asarray(a, dtype=float) for a in (bz, br, bt))
    R = grid.mesh()[1]
    div = discrete_divergence(bz, br, grid)
    Ri = R[1:-1, 1:-1]
    scale = (_volume_l2((bz[2:, 1:-1] - bz[:-2, 1:-1]) / (2 * grid.hz), Ri, grid.hz, grid.hr)
             + _volume_l2(div - (bz[2:, 1:-1] - bz[:-2, 1:-1]) / (2 * grid.hz), Ri, grid.hz, grid.hr))
    resid = _volume_l2(div, Ri, grid.hz, grid.hr)
    if scale > 0 and resid > div_tol * scale:
        raise DivergenceError(
            f"volume-weighted L2 norm of div b is {resid:.3e}, "
            f"relative {resid / scale:.3e} exceeds tolerance {div_tol:.1e}")
    integrand = R * bz
    phi = np.zeros_like(bz)
    phi[:, 1:] = np.cumsum(0.5 * (integrand[:, 1:] + integrand[:, :-1]) * grid.hr, axis=1)
    G = R * bt
    G[:, 0] = 0.0
    return ClebschField(grid, phi, G)


def apply_L(phi: np.ndarray, grid: HalfPlaneGrid) -> np.ndarray:
    """L phi = phi_zz + phi_rr - phi_r / r at interior nodes (zero elsewhere)."""
    out = np.zeros_like(phi)
    hz, hr = grid.hz, grid.hr
    R = grid.mesh()[1][1:-1, 1:-1]
    c = phi[1:-1, 1:-1]
    out[1:-1, 1:-1] = ((phi[2:, 1:-1] - 2 * c + phi[:-2, 1:-1]) / hz**2
                       + (phi[1:-1, 2:] - 2 * c + phi[1:-1, :-2]) / hr**2
                       - (phi[1:-1, 2:] - phi[1:-1, :-2]) / (2 * hr * R))
    return out


# --- Green kernel of -L on the half-plane ------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_THETA = 0.5 * math.pi * (_GL_NODES + 1.0)
_THETA_W = 0.5 * math.pi * _GL_WEIGHTS
_LOG_ASYMPTOTE_S = 1e-8


def green_F(s) -> np.ndarray:
    """F(s) = int_0^pi cos t / sqrt(2(1 - cos t) + s) dt.

    The 1/sqrt(t^2 + s) peak is subtracted and integrated exactly; the smooth
    remainder uses 64-node Gauss-Legendre.  Below s = 1e-8 the logarithmic
    asymptote -log(s)/2 + log 8 - 2 is used.
    """
    s = np.asarray(s, dtype=float)
    flat = s.ravel()
    out = np.empty_like(flat)
    tiny = flat < _LOG_ASYMPTOTE_S
    out[tiny] = -0.5 * np.log(np.maximum(flat[tiny], 1e-300)) + math.log(8.0) - 2.0
    sv = flat[~tiny][:, None]
    t = _THETA[None, :]
    smooth = np.cos(t) / np.sqrt(4.0 * np.sin(0.5 * t) ** 2 + sv) - 1.0 / np.sqrt(t * t + sv)
    out[~tiny] = np.arcsinh(math.pi / np.sqrt(sv[:, 0])) + smooth @ _THETA_W
    return out.reshape(s.shape)


def _cell_log_mean(a: float, b: float) -> float:
    # mean of log(x^2 + y^2) over [-a, a] x [-b, b]
    integral = a * b * math.log(a * a + b * b) - 3 * a * b + a * a * math.atan(b / a) + b * b * math.atan(a / b)
    return integral / (a * b)


def vector_potential_eta(G: np.ndarray, grid: HalfPlaneGrid) -> np.ndarray:
    """Free-space solution of -L eta = G by convolution with the Green kernel.

    eta(z, r) = int Gk(z, r, z', r') G(z', r') / r' dz' dr' with
    Gk = sqrt(r r') / (2 pi) F(s), s = ((z - z')^2 + (r - r')^2) / (r r').
    The self-cell uses the cell average of the logarithmic singularity.
    """
    G = np.asarray(G, dtype=float)
    Z, R = grid.mesh()
    w = grid.weights()
    src = (G != 0.0) & (R > 0)
    eta = np.zeros_like(G)
    if not src.any():
        return eta
    zs, rs = Z[src], R[src]
    qs = G[src] / rs * w[src]
    hz, hr = grid.hz, grid.hr
    log_mean = _cell_log_mean(0.5 * hz, 0.5 * hr)
    for i in range(grid.nz):
        zt = Z[i, 1:][:, None]
        rt = R[i, 1:][:, None]
        rr = rt * rs[None, :]
        d2 = (zt - zs[None, :]) ** 2 + (rt - rs[None, :]) ** 2
        self_pair = d2 == 0.0
        s = np.where(self_pair, 1.0, d2 / rr)
        F = green_F(s)
        if self_pair.any():
            # cell average of -log(s)/2 + log 8 - 2 around the node
            r_self = np.broadcast_to(rt, self_pair.shape)[self_pair]
            F[self_pair] = -0.5 * (log_mean - 2.0 * np.log(r_self)) + math.log(8.0) - 2.0
        eta[i, 1:] = (np.sqrt(rr) / (2 * math.pi) * F) @ qs
    return eta


# --- weighted-space transform to R^5 ---------------------------------------

@dataclass(frozen=True)
class IsometryNorms:
    """Half-plane norms of phi next to the R^5 norms of phi / r^2."""

    l1_3d: float
    l2_weighted: float
    dirichlet_weighted: float
    l1_5d: float
    l2_5d: float
    dirichlet_5d: float

    def ratios(self) -> tuple[float, float, float]:
        """Ratios that equal 1 when the three isometries hold."""
        def q(a, b):
            return 1.0 if a == b == 0 else a / b
        return (q(self.l1_3d, self.l1_5d / math.pi),
                q(self.l2_weighted, self.l2_5d / (math.sqrt(2) * math.pi)),
                q(2 * math.pi**2 * self.dirichlet_weighted, self.dirichlet_5d))


def lift_to_5d_norms(field: ClebschField) -> IsometryNorms:
    g = field.grid
    Z, R = g.mesh()
    phi = field.phi
    lifted = np.zeros_like(phi)
    lifted[:, 1:] = phi[:, 1:] / R[:, 1:] ** 2
    lifted[:, 0] = (16.0 * phi[:, 1] - phi[:, 2]) / (12.0 * g.hr**2)
    sphere3 = 2 * math.pi**2
    l1_3d = 2 * math.pi * g.integrate(np.abs(phi) * R)
    l2_w = weighted_l2(phi, g)
    dir_w = dirichlet_energy(phi, g)
    l1_5d = sphere3 * g.integrate(np.abs(lifted) * R**3)
    l2_5d = math.sqrt(sphere3 * g.integrate(lifted**2 * R**3))
    dz, dr = _gradient(lifted, g)
    dir_5d = sphere3 * g.integrate((dz**2 + dr**2) * R**3)
    return IsometryNorms(l1_3d, l2_w, dir_w, l1_5d, l2_5d, dir_5d)


# --- dump files ----------------------------------------------------------------

_HEADER_KEYS = ("z_min", "z_max", "r_max", "nz", "nr", "W", "lambda", "gamma")


class DumpParseError(ValueError):
    """Malformed field dump; ``line`` is the 1-based offending line (0 if global)."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def format_dump(field: ClebschField, params: FieldParams) -> str:
    """Header of ``# key = value`` lines, then ``z r phi G`` rows, z-major."""
    g = field.grid
    values = (g.z_min, g.z_max, g.r_max, g.nz, g.nr, params.W, params.lam, params.gamma)
    lines = ["# clebsch field dump"]
    lines += [f"# {k} = {v:.17g}" if isinstance(v, float) else f"# {k} = {v}"
              for k, v in zip(_HEADER_KEYS, values)]
    Z, R = g.mesh()
    for z, r, p, G in zip(Z.ravel(), R.ravel(), field.phi.ravel(), field.G.ravel()):
        lines.append(f"{z:.17g} {r:.17g} {p:.17g} {G:.17g}")
    return "\n".join(lines) + "\n"


def write_dump(path, field: ClebschField, params: FieldParams) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_dump(field, params))


def parse_dump(text: str) -> tuple[ClebschField, FieldParams]:
    header: dict[str, tuple[str, int]] = {}
    rows: list[tuple[int, list[float]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, val = (t.strip() for t in body.partition("="))
                if key not in _HEADER_KEYS:
                    raise DumpParseError(f"unknown header key {key!r}", lineno)
                if key in header:
                    raise DumpParseError(f"duplicate header key {key!r}", lineno)
                header[key] = (val, lineno)
            continue
        parts = line.split()
        if len(parts) != 4:
            raise DumpParseError(f"expected 4 columns, found {len(parts)}", lineno)
        try:
            vals = [float(x) for x in parts]
        except ValueError:
            raise DumpParseError(f"non-numeric value in {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise DumpParseError("non-finite value", lineno)
        rows.append((lineno, vals))
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise DumpParseError(f"missing header keys {missing}")

    def number(key, kind=float):
        val, ln = header[key]
        try:
            return kind(val)
        except ValueError:
            raise DumpParseError(f"bad value {val!r} for {key}", ln) from None

    try:
        grid = HalfPlaneGrid(number("z_min"), number("z_max"), number("r_max"), number("nz", int), number("nr", int))
        params = FieldParams(number("W"), number("lambda"), number("gamma"))
    except ValueError as exc:
        if isinstance(exc, DumpParseError):
            raise
        raise DumpParseError(str(exc)) from None
    n = grid.nz * grid.nr
    if len(rows) != n:
        ln = rows[n][0] if len(rows) > n else (rows[-1][0] if rows else 0)
        raise DumpParseError(f"expected {n} data rows, found {len(rows)}", ln)
    data = np.array([v for _, v in rows])
    Z, R = grid.mesh()
    tol = 1e-9 * max(grid.z_max - grid.z_min, grid.r_max)
    bad = np.flatnonzero((np.abs(data[:, 0] - Z.ravel()) > tol) | (np.abs(data[:, 1] - R.ravel()) > tol))
    if bad.size:
        raise DumpParseError("node coordinates do not match the header grid", rows[bad[0]][0])
    phi = data[:, 2].reshape(grid.shape)
    G = data[:, 3].reshape(grid.shape)
    axis_bad = np.flatnonzero((phi[:, 0] != 0) | (G[:, 0] != 0))
    if axis_bad.size:
        raise DumpParseError("phi and G must vanish on the axis", rows[axis_bad[0] * grid.nr][0])
    return ClebschField(grid, phi, G), params


def read_dump(path) -> tuple[ClebschField, FieldParams]:
    with open(path, encoding="utf-8") as fh:
        return parse_dump(fh.read())
