"""Bessel functions of the first kind for the handful of orders the fields need.

Half-integer orders use their elementary closed forms; integer orders combine
an ascending series, Miller's backward recurrence and the Hankel asymptotic
expansion.  Everything is vectorised over ``x``.
"""
from __future__ import annotations

import enum
import math
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "BesselOrder",
    "bessel_j",
    "bessel_series",
    "first_positive_root",
    "C32",
    "J52_AT_C32",
]


class BesselOrder(enum.Enum):
    HALF = 0.5
    THREE_HALVES = 1.5
    FIVE_HALVES = 2.5
    ZERO = 0
    ONE = 1

    @classmethod
    def coerce(cls, order) -> "BesselOrder":
        if isinstance(order, cls):
            return order
        try:
            return cls(float(order)) if float(order) % 1 else cls(int(order))
        except (ValueError, TypeError):
            raise ValueError(f"unsupported Bessel order {order!r}") from None

    @property
    def is_half_integer(self) -> bool:
        return self in (BesselOrder.HALF, BesselOrder.THREE_HALVES, BesselOrder.FIVE_HALVES)


# below this the closed forms lose digits to cancellation
_SERIES_CUTOFF_HALF = 0.5
_SERIES_CUTOFF_INT = 8.0
_ASYMPTOTIC_CUTOFF_INT = 25.0


def bessel_series(nu: float, x, terms: int = 30):
    """Ascending power series sum_k (-1)^k (x/2)^(2k+nu) / (k! Gamma(k+nu+1))."""
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    term = half**nu / math.gamma(nu + 1.0)
    total = term.copy()
    sq = -(half * half)
    for k in range(1, terms):
        term = term * sq / (k * (k + nu))
        total = total + term
    return total


def _half_integer(order: BesselOrder, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF_HALF
    out[small] = bessel_series(order.value, x[small], terms=20)
    xs = x[~small]
    pref = np.sqrt(2.0 / (np.pi * xs))
    s, c = np.sin(xs), np.cos(xs)
    if order is BesselOrder.HALF:
        out[~small] = pref * s
    elif order is BesselOrder.THREE_HALVES:
        out[~small] = pref * (s / xs - c)
    else:
        out[~small] = pref * ((3.0 / xs**2 - 1.0) * s - 3.0 * c / xs)
    return out


def _miller(n: int, x: np.ndarray) -> np.ndarray:
    """J_n(x), n in {0, 1}, by backward recurrence normalised with J0 + 2 sum J_2k = 1."""
    top = 2 * int(math.ceil((float(x.max()) + 40.0) / 2.0))
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    jn = np.zeros_like(x)
    for k in range(top, 0, -1):
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the unnormalised J_{k-1}
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if k - 1 == n:
            jn = j_cur.copy()
    norm += j_cur
    return jn / norm


def _hankel(n: int, x: np.ndarray, terms: int = 12) -> np.ndarray:
    mu = 4.0 * n * n
    p = np.ones_like(x)
    q = np.zeros_like(x)
    coef = 1.0
    for k in range(1, 2 * terms):
        coef *= (mu - (2 * k - 1) ** 2) / (k * 8.0)
        term = coef / x**k
        if k % 2 == 1:
            q += (-1) ** ((k - 1) // 2) * term
        else:
            p += (-1) ** (k // 2) * term
    chi = x - (0.5 * n + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def _integer(order: BesselOrder, x: np.ndarray) -> np.ndarray:
    n = order.value
    out = np.empty_like(x)
    lo = x <= _SERIES_CUTOFF_INT
    hi = x >= _ASYMPTOTIC_CUTOFF_INT
    mid = ~(lo | hi)
    out[lo] = bessel_series(n, x[lo], terms=40)
    if mid.any():
        out[mid] = _miller(n, x[mid])
    if hi.any():
        out[hi] = _hankel(n, x[hi])
    return out


def bessel_j(order, x):
    """Bessel function of the first kind J_order(x) for x >= 0.

    Half-integer orders need x > 0 for the closed forms but the series branch
    covers x = 0 as well.  Scalars in, scalar out.
    """
    order = BesselOrder.coerce(order)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("bessel_j requires finite arguments")
    if np.any(arr < 0):
        raise ValueError("bessel_j is only defined here for x >= 0")
    flat = np.atleast_1d(arr).ravel()
    if order.is_half_integer:
        out = _half_integer(order, flat)
    else:
        out = _integer(order, flat)
    out = out.reshape(np.shape(arr))
    return float(out) if np.ndim(arr) == 0 else out


def _scalar_j(order: BesselOrder, x: float) -> float:
    # fast path for root polishing
    if order is BesselOrder.THREE_HALVES and x >= _SERIES_CUTOFF_HALF:
        return math.sqrt(2.0 / (math.pi * x)) * (math.sin(x) / x - math.cos(x))
    return bessel_j(order, x)


@lru_cache(maxsize=None)
def _root(order: BesselOrder, xtol: float) -> float:
    f = lambda t: _scalar_j(order, t)
    if order is BesselOrder.THREE_HALVES:
        a, b = 4.0, 5.0
    else:
        a, step = 0.25, 0.25
        while f(a) * f(a + step) > 0:
            a += step
        b = a + step
    return brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


def first_positive_root(order, tol: float = 1e-12) -> float:
    """Smallest positive zero of J_order; only orders 1 and 3/2 are supported."""
    order = BesselOrder.coerce(order)
    if order not in (BesselOrder.ONE, BesselOrder.THREE_HALVES):
        raise ValueError("first_positive_root supports orders 1 and 3/2 only")
    return _root(order, min(tol, 1e-13))


C32 = first_positive_root(1.5)
J52_AT_C32 = bessel_j(2.5, C32)
