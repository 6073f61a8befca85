"""Analytic force-free fields: Chandrasekhar's ball solution and the Lundquist field.

All evaluators broadcast over numpy arrays of ``z`` and ``r``.  Components are
returned in (z, r, theta) order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad

from .specfun import C32, J52_AT_C32, bessel_j

__all__ = [
    "FieldParams",
    "CylindricalVector",
    "phi_C",
    "G_C",
    "U_C",
    "f_C",
    "helicity_constant_hC",
    "lundquist_field",
    "forcefree_residual",
    "ball_band",
]


@dataclass(frozen=True)
class FieldParams:
    """Far-field strength ``W``, current strength ``lam`` and gauge ``gamma``."""

    W: float = 2.0
    lam: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("W", "lam", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.W <= 0:
            raise ValueError("W must be positive")
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    @property
    def R(self) -> float:
        """Radius of the ball carrying the current."""
        return C32 / math.sqrt(self.lam)

    def phi_inf(self, r):
        return 0.5 * self.W * np.asarray(r, dtype=float) ** 2 + self.gamma


class CylindricalVector(NamedTuple):
    z: np.ndarray
    r: np.ndarray
    theta: np.ndarray


def _scaled_series(nu: float, x: np.ndarray, terms: int = 20) -> np.ndarray:
    # x^-nu J_nu(x) without the singular prefactor
    q = -0.25 * x * x
    term = np.full_like(x, 1.0 / (2.0**nu * math.gamma(nu + 1.0)))
    total = term.copy()
    for k in range(1, terms):
        term = term * q / (k * (k + nu))
        total = total + term
    return total


def _j32_scaled(x: np.ndarray) -> np.ndarray:
    """x^{-3/2} J_{3/2}(x), regular at the origin."""
    out = np.empty_like(x)
    small = x < 0.5
    out[small] = _scaled_series(1.5, x[small])
    xs = x[~small]
    out[~small] = bessel_j(1.5, xs) / xs**1.5
    return out


def _j52_scaled(x: np.ndarray) -> np.ndarray:
    """x^{-5/2} J_{5/2}(x), regular at the origin."""
    out = np.empty_like(x)
    small = x < 0.5
    out[small] = _scaled_series(2.5, x[small])
    xs = x[~small]
    out[~small] = bessel_j(2.5, xs) / xs**2.5
    return out


def _radial_profile(rho: np.ndarray, params: FieldParams):
    """psi(rho) = Phi_C / r^2 and psi'(rho) / rho for the two branches."""
    W, lam, R = params.W, params.lam, params.R
    amp = 1.5 * W * math.sqrt(C32) / J52_AT_C32
    psi = np.empty_like(rho)
    dpsi_over_rho = np.empty_like(rho)
    inside = rho < R
    x = math.sqrt(lam) * rho[inside]
    psi[inside] = amp * _j32_scaled(x)
    # d/dx[x^-3/2 J_3/2] = -x^-3/2 J_5/2
    dpsi_over_rho[inside] = -amp * lam * _j52_scaled(x)
    ro = rho[~inside]
    psi[~inside] = -0.5 * W * (1.0 - (R / ro) ** 3)
    dpsi_over_rho[~inside] = -1.5 * W * R**3 / ro**5
    return psi, dpsi_over_rho


def _broadcast(z, r):
    z, r = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    return z, r


def _maybe_scalar(a, like):
    return float(a) if np.ndim(like) == 0 else a


def phi_C(z, r, params: FieldParams):
    """Flux function Phi_C = phi - phi_inf of the Chandrasekhar field."""
    z, r = _broadcast(z, r)
    rho = np.hypot(z, r)
    psi, _ = _radial_profile(rho.ravel(), params)
    out = r**2 * psi.reshape(rho.shape)
    return _maybe_scalar(out, z)


def G_C(z, r, params: FieldParams):
    """Swirl potential lam^{1/2} * max(Phi_C, 0)."""
    phi = np.asarray(phi_C(z, r, params))
    out = math.sqrt(params.lam) * np.maximum(phi, 0.0)
    return _maybe_scalar(out, phi)


def f_C(z, r, params: FieldParams):
    """Proportionality factor lam^{1/2} on {Phi_C > 0}, zero elsewhere."""
    phi = np.asarray(phi_C(z, r, params))
    out = math.sqrt(params.lam) * (phi > 0)
    return _maybe_scalar(out, phi)


def U_C(z, r, params: FieldParams) -> CylindricalVector:
    """Chandrasekhar field (U_z, U_r, U_theta) with analytic derivatives."""
    z, r = _broadcast(z, r)
    rho = np.hypot(z, r)
    psi, dpr = (a.reshape(rho.shape) for a in _radial_profile(rho.ravel(), params))
    uz = 2.0 * psi + r**2 * dpr
    ur = -r * z * dpr
    ut = math.sqrt(params.lam) * r * np.maximum(psi, 0.0)
    if np.ndim(z) == 0:
        return CylindricalVector(float(uz), float(ur), float(ut))
    return CylindricalVector(uz, ur, ut)


def helicity_constant_hC(params: FieldParams) -> float:
    """Generalized magnetic helicity of the Chandrasekhar field, closed form."""
    integral, _ = quad(lambda t: t * bessel_j(1.5, t) ** 2 if t > 0 else 0.0,
                       0.0, C32, epsabs=0.0, epsrel=1e-13, limit=200)
    return (params.W / params.lam) ** 2 * 12.0 * math.pi * C32 / J52_AT_C32**2 * integral


def lundquist_field(f: float, r, z=None) -> CylindricalVector:
    """Linear force-free field J0(fr) e_z + J1(fr) e_theta.  ``z`` only sets the shape."""
    if not math.isfinite(f):
        raise ValueError("f must be finite")
    r = np.asarray(r, dtype=float)
    if z is not None:
        _, r = _broadcast(z, r)
    x = np.abs(f) * r
    j0 = np.asarray(bessel_j(0, x))
    j1 = np.sign(f) * np.asarray(bessel_j(1, x))
    if np.ndim(r) == 0:
        return CylindricalVector(float(j0), 0.0, float(j1))
    return CylindricalVector(j0, np.zeros_like(j0), j1)


def ball_band(radius: float, cells: float = 3.0):
    """Exclusion mask for a band of ``cells`` grid cells around the sphere rho = radius."""

    def mask(Z, R, grid):
        width = cells * max(grid.hz, grid.hr)
        return np.abs(np.hypot(Z, R) - radius) <= width

    return mask


def forcefree_residual(
    field_sampler: Callable,
    f_sampler: Callable,
    grid,
    exclude: Callable | None = None,
) -> float:
    """Volume-weighted L2 norm of curl U - f U over interior grid nodes.

    ``field_sampler(Z, R)`` returns the (z, r, theta) components and
    ``f_sampler(Z, R)`` the factor f on the node arrays.  ``exclude(Z, R, grid)``
    may mask out nodes near a discontinuity of f.
    """
    if grid.nz < 4 or grid.nr < 4:
        raise ValueError("forcefree_residual needs at least 4 nodes per direction")
    Z, R = grid.mesh()
    uz, ur, ut = (np.asarray(c, dtype=float) for c in field_sampler(Z, R))
    f = np.asarray(f_sampler(Z, R), dtype=float)
    hz, hr = grid.hz, grid.hr
    s = (slice(1, -1), slice(1, -1))

    def dz(a):
        return (a[2:, 1:-1] - a[:-2, 1:-1]) / (2 * hz)

    def dr(a):
        return (a[1:-1, 2:] - a[1:-1, :-2]) / (2 * hr)

    r_in = R[s]
    curl_t = dz(ur) - dr(uz)
    curl_r = -dz(ut)
    curl_z = dr(R * ut) / r_in
    res2 = (curl_z - f[s] * uz[s]) ** 2 + (curl_r - f[s] * ur[s]) ** 2 + (curl_t - f[s] * ut[s]) ** 2
    keep = np.ones_like(res2, dtype=bool)
    if exclude is not None:
        keep &= ~np.asarray(exclude(Z, R, grid))[s]
    integrand = np.where(keep, res2 * r_in, 0.0)
    total = 2.0 * np.pi * integrand.sum() * hz * hr
    return float(np.sqrt(total))
