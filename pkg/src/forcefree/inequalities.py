"""Seeded random Clebsch fields and empirical constants of the functional inequalities.

Every corpus member is an analytic recipe, so the same field can be sampled on
a sequence of refined grids and the empirical constants compared.  Fields are
r^2 times a random quadratic times a Gaussian envelope, multiplied by a smooth
cutoff that vanishes on the box edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .clebsch import ClebschField, HalfPlaneGrid, energy, gen_helicity, mean_square_potential

__all__ = [
    "RandomField",
    "compact_bump",
    "random_corpus",
    "sobolev_ratio",
    "measure_ratio",
    "helicity_ratio",
    "msp_ratio",
    "lipschitz_ratio",
    "InequalityConstants",
    "empirical_constants",
    "refinement_study",
]

_MONOMIALS = ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def compact_bump(z, r, radius: float = 2.0):
    """r^2 (1 - rho^2 / radius^2)_+^3: a C^2 bump supported in the half-disc rho < radius."""
    s = np.clip(1.0 - (np.asarray(z) ** 2 + np.asarray(r) ** 2) / radius**2, 0.0, None)
    return np.asarray(r) ** 2 * s**3


@dataclass(frozen=True)
class _Profile:
    amplitude: float
    zc: float
    width: float
    coeffs: tuple[float, ...]

    def __call__(self, Z, R, half_width, r_max):
        zs = (Z - self.zc) / self.width
        rs = R / self.width
        poly = 1.0 + sum(c * zs**i * rs**j for c, (i, j) in zip(self.coeffs, _MONOMIALS))
        env = np.exp(-(zs**2 + rs**2))
        cut = ((1 - (Z / half_width) ** 2) * (1 - (R / r_max) ** 2)) ** 2
        return self.amplitude * R**2 * poly * env * np.clip(cut, 0.0, None)


@dataclass(frozen=True)
class RandomField:
    """A random compactly supported pair (phi, G) on the box [-L, L] x [0, L]."""

    phi: _Profile
    G: _Profile
    half_width: float = 4.0
    nonneg: bool = False

    def sample(self, grid: HalfPlaneGrid) -> ClebschField:
        Z, R = grid.mesh()
        phi = self.phi(Z, R, self.half_width, self.half_width)
        if self.nonneg:
            phi = np.abs(phi)
        G = self.G(Z, R, self.half_width, self.half_width)
        for a in (phi, G):
            a[:, 0] = 0.0
            a[0] = a[-1] = 0.0
            a[:, -1] = 0.0
        return ClebschField(grid, phi, G)

    def grid(self, n: int) -> HalfPlaneGrid:
        return HalfPlaneGrid.box(self.half_width, self.half_width, 2 * n + 1, n + 1)


def _profile(rng: np.random.Generator, amp_range) -> _Profile:
    return _Profile(
        amplitude=float(rng.uniform(*amp_range)),
        zc=float(rng.uniform(-1.0, 1.0)),
        width=float(rng.uniform(0.7, 1.4)),
        coeffs=tuple(float(c) for c in 0.3 * rng.standard_normal(len(_MONOMIALS))),
    )


def random_corpus(n: int, seed: int = 0, nonneg: bool = False, half_width: float = 4.0) -> list[RandomField]:
    """``n`` reproducible random fields; phi is large enough to exceed phi_inf = r^2 somewhere."""
    rng = np.random.default_rng(seed)
    return [RandomField(_profile(rng, (1.5, 5.0)), _profile(rng, (-3.0, 3.0)), half_width, nonneg)
            for _ in range(n)]


# --- ratios; each is bounded by a constant independent of the field ----------

def _inv_r(grid):
    out = np.zeros(grid.nr)
    out[1:] = 1.0 / grid.r[1:]
    return out


def _grad_sq(phi, grid) -> float:
    dz, dr = np.gradient(phi, grid.hz, grid.hr, edge_order=2)
    return grid.integrate((dz**2 + dr**2) * _inv_r(grid))


def _b_norm(field: ClebschField) -> float:
    return math.sqrt(2.0 * energy(field))


def sobolev_ratio(phi: np.ndarray, grid: HalfPlaneGrid) -> float:
    """||phi||_{L^4(r^-4)} / ||grad phi||_{L^2(r^-1)}."""
    inv = _inv_r(grid)
    num = grid.integrate(phi**4 * inv**4) ** 0.25
    return num / math.sqrt(_grad_sq(phi, grid))


def measure_ratio(field: ClebschField, params) -> float:
    """|{phi > phi_inf}| / ||grad phi||^2_{L^2(r^-1)}."""
    g = field.grid
    R = g.mesh()[1]
    vol = 2 * math.pi * g.integrate((field.phi > params.phi_inf(R)) * R)
    return vol / _grad_sq(field.phi, g)


def helicity_ratio(field: ClebschField, params) -> float:
    """|H| / ||b||^{8/3}."""
    return abs(gen_helicity(field, params)) / _b_norm(field) ** (8 / 3)


def msp_ratio(field: ClebschField, params) -> float:
    """M / ||b||^{14/3}."""
    return mean_square_potential(field, params) / _b_norm(field) ** (14 / 3)


def lipschitz_ratio(f1: ClebschField, f2: ClebschField, params) -> float:
    """|H1 - H2| / (max ||b_i||^{5/3} ||b1 - b2||)."""
    diff = ClebschField(f1.grid, f1.phi - f2.phi, f1.G - f2.G)
    den = max(_b_norm(f1), _b_norm(f2)) ** (5 / 3) * _b_norm(diff)
    return abs(gen_helicity(f1, params) - gen_helicity(f2, params)) / den


@dataclass(frozen=True)
class InequalityConstants:
    """Largest observed ratio per inequality over a corpus."""

    sobolev: float
    measure: float
    helicity: float
    msp: float
    lipschitz: float

    def as_dict(self) -> dict[str, float]:
        return dict(sobolev=self.sobolev, measure=self.measure, helicity=self.helicity,
                    msp=self.msp, lipschitz=self.lipschitz)


def empirical_constants(corpus: Sequence[RandomField], n: int, params, seed: int = 0) -> InequalityConstants:
    """Sample ``corpus`` on the grid with ``n`` radial cells and take the max of each ratio.

    Lipschitz pairs join each field to a random multiple of its successor.
    """
    grid = corpus[0].grid(n)
    fields = [c.sample(grid) for c in corpus]
    rng = np.random.default_rng(seed)
    ts = rng.uniform(0.02, 1.0, len(fields))
    sob = max(sobolev_ratio(f.phi, grid) for f in fields)
    meas = max(measure_ratio(f, params) for f in fields)
    hel = max(helicity_ratio(f, params) for f in fields)
    msp = max(msp_ratio(f, params) for f in fields)
    lip = 0.0
    for i, f in enumerate(fields):
        g = fields[(i + 1) % len(fields)]
        pert = ClebschField(grid, f.phi + ts[i] * g.phi, f.G + ts[i] * g.G)
        lip = max(lip, lipschitz_ratio(f, pert, params))
    return InequalityConstants(sob, meas, hel, msp, lip)


def refinement_study(corpus: Sequence[RandomField], levels: Sequence[int], params,
                     seed: int = 0) -> tuple[list[InequalityConstants], dict[str, float]]:
    """Constants at each level and, per inequality, the max/min ratio across levels."""
    consts = [empirical_constants(corpus, n, params, seed) for n in levels]
    spread = {}
    for key in consts[0].as_dict():
        vals = [c.as_dict()[key] for c in consts]
        spread[key] = max(vals) / min(vals) if min(vals) > 0 else math.inf
    return consts, spread
