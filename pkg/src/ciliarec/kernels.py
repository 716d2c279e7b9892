"""Step and polynomial kernel models.

Builds the threshold partition (alphas, weights, front speeds, horizon times),
the diffusive concentration approximations (erfc profile and eigenfunction
series), and the two kernels evaluated by the forward operators.
"""

from dataclasses import dataclass, field

import numpy as np

from .special import HillParams, erfc, erfc_inv, hill_F, hill_taylor

__all__ = [
    "PhysicalParams",
    "StepPartition",
    "GeometricMeshSpec",
    "PolynomialKernel",
    "default_params",
    "partition_from_alphas",
    "geometric_partition",
    "w",
    "step_F_m",
    "kernel_K_m",
    "concentration_series",
    "kernel_PK_m",
    "SeriesConvergenceError",
]


class SeriesConvergenceError(RuntimeError):
    """Eigenfunction series tail bound could not reach the requested tolerance."""


@dataclass(frozen=True)
class PhysicalParams:
    """Diffusivity, cilium length, boundary concentration, current density and
    Hill parameters."""

    D: float
    L: float
    c0: float
    J0: float
    hill: HillParams

    def __post_init__(self):
        for name in ("D", "L", "c0", "J0"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")


def default_params(D=1.0, L=1.0, c0=1.0, J0=1.0, n=2.0, K_half=0.5) -> PhysicalParams:
    """Dimensionless defaults used throughout the tests; all overridable."""
    return PhysicalParams(D=D, L=L, c0=c0, J0=J0, hill=HillParams(n=n, K_half=K_half))


@dataclass(frozen=True)
class StepPartition:
    """Threshold partition of (0, c0) with weights, front speeds and horizon
    times.

    betas[j] is the speed at which the concentration level set alpha_j moves,
    Lk[k] = L / betas[k-1] the time (in sqrt-time units) at which that front
    reaches the closed end; Lk[0] = 0.
    """

    m: int
    alphas: np.ndarray
    a: np.ndarray
    betas: np.ndarray
    Lk: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alphas", np.asarray(self.alphas, float))
        object.__setattr__(self, "a", np.asarray(self.a, float))
        object.__setattr__(self, "betas", np.asarray(self.betas, float))
        object.__setattr__(self, "Lk", np.asarray(self.Lk, float))
        if self.m < 1 or len(self.alphas) != self.m or len(self.a) != self.m:
            raise ValueError("inconsistent partition sizes")
        if len(self.betas) != self.m or len(self.Lk) != self.m + 1:
            raise ValueError("inconsistent partition sizes")
        if np.any(self.alphas <= 0) or np.any(np.diff(self.alphas) <= 0):
            raise ValueError("alphas must be positive and strictly ascending")
        if np.any(self.a <= 0) or abs(self.a.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        if np.any(np.diff(self.betas) >= 0):
            raise ValueError("betas must be strictly descending")
        if self.Lk[0] != 0.0 or np.any(np.diff(self.Lk) <= 0):
            raise ValueError("Lk must be strictly ascending with Lk[0] = 0")

    @property
    def L_m(self) -> float:
        """Largest horizon time L / betas[m-1]."""
        return float(self.Lk[-1])

    @property
    def length(self) -> float:
        """Cilium length recovered from betas and Lk."""
        return float(self.betas[-1] * self.Lk[-1])


@dataclass(frozen=True)
class GeometricMeshSpec:
    """Non-regular mesh (beta, beta0, m) inducing front speeds beta0 * beta^j."""

    beta: float
    beta0: float
    m: int

    def __post_init__(self):
        if not (0.0 < self.beta < 1.0):
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not (np.isfinite(self.beta0) and self.beta0 > 0):
            raise ValueError(f"beta0 must be positive, got {self.beta0}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")


@dataclass(frozen=True)
class PolynomialKernel:
    """Taylor polynomial of Hill's function around c0, applied to the series
    concentration."""

    coeffs: tuple
    c0: float
    tol: float = 1e-10
    k_max: int = 10_000

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def build(cls, m: int, pp: PhysicalParams, tol: float = 1e-10, k_max: int = 10_000):
        return cls(coeffs=hill_taylor(pp.c0, m, pp.hill), c0=pp.c0, tol=tol, k_max=k_max)


def partition_from_alphas(alphas, pp: PhysicalParams) -> StepPartition:
    """Partition with midpoint-rule weights a_j = (F_j - F_{j-1}) / F(c0).

    F_j is Hill's function at the midpoint of consecutive thresholds, with
    F_0 = 0 and F_m = F(c0), so the weights telescope to 1.
    """
    alphas = np.asarray(alphas, dtype=float)
    m = len(alphas)
    if m < 1 or np.any(alphas <= 0) or np.any(np.diff(alphas) <= 0):
        raise ValueError("alphas must be a nonempty strictly ascending positive sequence")
    if alphas[-1] >= pp.c0:
        raise ValueError(f"alphas must stay below c0 = {pp.c0}")
    Fc0 = hill_F(pp.c0, pp.hill)
    Fj = np.empty(m + 1)
    Fj[0] = 0.0
    if m > 1:
        Fj[1:m] = hill_F((alphas[:-1] + alphas[1:]) / 2.0, pp.hill)
    Fj[m] = Fc0
    a = np.diff(Fj) / Fc0
    betas = 2.0 * np.sqrt(pp.D) * erfc_inv(alphas / pp.c0)
    Lk = np.concatenate(([0.0], pp.L / betas))
    return StepPartition(m=m, alphas=alphas, a=a, betas=betas, Lk=Lk)


def geometric_partition(spec: GeometricMeshSpec, pp: PhysicalParams) -> StepPartition:
    """Partition induced by the geometric mesh: alpha_j = c0 * erfc(beta0*beta^j / (2*sqrt(D)))."""
    j = np.arange(1, spec.m + 1)
    betas = spec.beta0 * spec.beta**j
    alphas = pp.c0 * erfc(betas / (2.0 * np.sqrt(pp.D)))
    return partition_from_alphas(alphas, pp)


def w(t, x, pp: PhysicalParams):
    """Half-space concentration profile c0 * erfc(x / (2*sqrt(D*t)))."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("w requires t > 0")
    x = np.asarray(x, dtype=float)
    out = pp.c0 * erfc(x / (2.0 * np.sqrt(pp.D * t)))
    return float(out) if np.ndim(out) == 0 else out


def step_F_m(x, part: StepPartition, pp: PhysicalParams):
    """Step approximation F(c0) * sum_j a_j H(x - alpha_j), with H(0) = 1."""
    x = np.asarray(x, dtype=float)
    Fc0 = hill_F(pp.c0, pp.hill)
    # closed-left steps: threshold value included
    out = Fc0 * (part.a * (x[..., None] >= part.alphas)).sum(axis=-1)
    return float(out) if np.ndim(x) == 0 else out


def kernel_K_m(t, x, part: StepPartition, pp: PhysicalParams):
    """Step kernel F_m(w(t, x)); jumps sit at x = betas[j] * sqrt(t)."""
    return step_F_m(w(t, x, pp), part, pp)


def concentration_series(t, x, pp: PhysicalParams, tol: float = 1e-10, k_max: int = 10_000):
    """Eigenfunction series solution of the diffusion problem with held boundary
    concentration.

    Truncated once the analytic geometric tail bound drops below ``tol``;
    raises :class:`SeriesConvergenceError` when the bound cannot be met within
    ``k_max`` terms (short times: use :func:`w` instead).  The returned value
    is clamped to [0, c0].
    """
    t = float(t)
    x = np.asarray(x, dtype=float)
    if t < 0:
        raise ValueError("concentration_series requires t >= 0")
    if np.any(x < 0) or np.any(x > pp.L):
        raise ValueError("x must lie in [0, L]")
    D, L, c0 = pp.D, pp.L, pp.c0
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(x)
    acc = np.zeros_like(x)
    block = 64
    k0 = 0
    converged = False
    while k0 < k_max:
        k = np.arange(k0, min(k0 + block, k_max))
        mu = (2 * k + 1) * np.pi / (2 * L)
        damp = np.exp(-(mu**2) * D * t)
        acc += (damp / mu) @ np.sin(np.outer(mu, x))
        k0 = k[-1] + 1
        # tail <= c0*(2/L) * exp(-mu_{k0}^2 D t)/mu_{k0} / (1 - r), terms drop
        # at least geometrically with ratio r once t > 0
        mu_next = (2 * k0 + 1) * np.pi / (2 * L)
        r = np.exp(-2.0 * (k0 + 1) * np.pi**2 * D * t / L**2)
        if r < 1.0:
            tail = c0 * (2.0 / L) * np.exp(-(mu_next**2) * D * t) / mu_next / (1.0 - r)
            if tail < tol:
                converged = True
                break
    if not converged:
        raise SeriesConvergenceError(
            f"series tail bound not below tol={tol} within {k_max} terms at t={t}; "
            "use the erfc profile w for short times"
        )
    out = np.clip(c0 - c0 * (2.0 / L) * acc, 0.0, c0)
    return float(out[0]) if scalar else out


def kernel_PK_m(t, x, pk: PolynomialKernel, pp: PhysicalParams):
    """Polynomial kernel P_m(c(t, x) - c0), evaluated by Horner's rule."""
    if float(t) == 0.0:
        # c(0, x) = 0 on the open interval
        c = np.where(np.asarray(x, float) > 0, 0.0, pp.c0)
        c = float(c) if np.ndim(x) == 0 else c
    else:
        c = concentration_series(t, x, pp, tol=pk.tol, k_max=pk.k_max)
    z = np.asarray(c, dtype=float) - pk.c0
    out = np.zeros_like(z)
    for coef in reversed(pk.coeffs):
        out = out * z + coef
    return float(out) if np.ndim(x) == 0 else out
