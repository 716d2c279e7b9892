"""Scalar special functions: erfc, its inverse, Hill's function and its Taylor
coefficients.

All functions are pure and accept scalars or numpy arrays where noted.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
import sympy as sp
from scipy import special as _special

__all__ = ["HillParams", "erfc", "erfc_inv", "hill_F", "hill_taylor"]

#: Largest Taylor degree with an identifiability guarantee for the
#: polynomial-kernel current; higher degrees are rejected.
MAX_TAYLOR_DEGREE = 8


@dataclass(frozen=True)
class HillParams:
    """Sigmoid parameters: exponent ``n`` and half-activation ``K_half``."""

    n: float
    K_half: float

    def __post_init__(self):
        if not (np.isfinite(self.n) and self.n > 0):
            raise ValueError(f"Hill exponent n must be positive, got {self.n}")
        if not (np.isfinite(self.K_half) and self.K_half > 0):
            raise ValueError(f"K_half must be positive, got {self.K_half}")


def erfc(z):
    """Complementary error function, 1 - (2/sqrt(pi)) * int_0^z exp(-tau^2) dtau."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("erfc requires finite input")
    out = _special.erfc(z)
    return float(out) if out.ndim == 0 else out


def erfc_inv(y):
    """Inverse of :func:`erfc` on (0, 2)."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)) or np.any(y <= 0.0) or np.any(y >= 2.0):
        raise ValueError("erfc_inv requires y in the open interval (0, 2)")
    out = _special.erfcinv(y)
    if not np.all(np.isfinite(out)):
        # y denormal-close to 0 or 2 maps past the representable range
        raise ValueError("erfc_inv: y too close to the endpoints of (0, 2)")
    return float(out) if out.ndim == 0 else out


def hill_F(x, p: HillParams):
    """Hill saturation x^n / (x^n + K_half^n) for x >= 0; values in [0, 1)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("hill_F requires x >= 0")
    # 1/(1+(K/x)^n) is overflow-safe for large x; patch x=0 separately
    with np.errstate(divide="ignore", over="ignore"):
        ratio = np.where(x > 0, p.K_half / np.where(x > 0, x, 1.0), np.inf)
        out = np.where(x > 0, 1.0 / (1.0 + ratio**p.n), 0.0)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=64)
def _taylor_cached(c0: float, m: int, n: float, K_half: float):
    x = sp.Symbol("x", positive=True)
    f = x**sp.Float(n, 30) / (x**sp.Float(n, 30) + sp.Float(K_half, 30) ** sp.Float(n, 30))
    coeffs = []
    expr = f
    for k in range(m + 1):
        if k > 0:
            expr = sp.diff(expr, x)
        coeffs.append(float(expr.subs(x, sp.Float(c0, 30)).evalf(30)) / factorial(k))
    return tuple(coeffs)


def hill_taylor(c0: float, m: int, p: HillParams) -> tuple:
    """Taylor coefficients (F(c0), F'(c0), ..., F^(m)(c0)/m!) of Hill's function.

    Computed by exact symbolic differentiation; degree is capped at 8, the
    range for which the polynomial-kernel current is injective.
    """
    if not (np.isfinite(c0) and c0 > 0):
        raise ValueError(f"c0 must be positive, got {c0}")
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise ValueError(f"degree m must be a nonnegative integer, got {m}")
    if m > MAX_TAYLOR_DEGREE:
        raise ValueError(f"degree m={m} exceeds the supported maximum {MAX_TAYLOR_DEGREE}")
    return _taylor_cached(float(c0), int(m), float(p.n), float(p.K_half))
