"""Stability and identifiability diagnostics.

Mellin symbol modulus and its infimum, the sufficient weight threshold,
numerical Mellin transforms, the weighted / L^p / BV norm families, the
inequality verifiers, and the exact-integer eigenvalue collision scan.
"""

from dataclasses import dataclass, field
from math import isqrt

import numpy as np
from scipy import integrate
from scipy.linalg import solve_banded

from .forward import Phi_m, _quad
from .kernels import GeometricMeshSpec, PhysicalParams, StepPartition
from .special import hill_F

__all__ = [
    "NormFamilySpec",
    "StabilityReport",
    "MarginReport",
    "CGammaResult",
    "lambda_gamma",
    "c_gamma",
    "gamma0_bound",
    "mellin_numeric",
    "mellin_l2",
    "mellin_plancherel_ratio",
    "weighted_norm",
    "family_norm",
    "verify_stability_L2",
    "verify_operator_stability",
    "verify_levelwise_stability",
    "lemma9_scan",
    "Lemma9Report",
    "OperatorStabilityReport",
    "stability_report",
]


# ---------------------------------------------------------------------------
# Mellin symbol and stability constant

def lambda_gamma(s, gamma: float, part: StepPartition):
    """Modulus of the Mellin symbol  |sum_j a_j beta_j^{-(1/2+gamma-i s)}|."""
    s = np.asarray(s, dtype=float)
    amp = part.a * part.betas ** (-(0.5 + gamma))
    z = amp @ np.exp(1j * np.outer(np.log(part.betas), np.atleast_1d(s)))
    out = np.abs(z)
    return float(out[0]) if np.ndim(s) == 0 else out


def gamma0_bound(part: StepPartition) -> float:
    """Sufficient weight threshold  ln(a_m)/ln(beta_m/beta_{m-1}) - 1/2.

    Above this value the symbol infimum is provably positive.  For m = 1 the
    symbol is constant in s, so every gamma works: returns -inf.
    """
    if part.m == 1:
        return float("-inf")
    return float(np.log(part.a[-1]) / np.log(part.betas[-1] / part.betas[-2]) - 0.5)


def _analytic_lower_bound(gamma: float, part: StepPartition) -> float:
    bm, bm1 = part.betas[-1], part.betas[-2]
    return float(bm ** (-gamma - 0.5) * (part.a[-1] - (bm1 / bm) ** (-(gamma + 0.5))))


@dataclass(frozen=True)
class CGammaResult:
    """Grid infimum of the Mellin symbol modulus over s in [0, s_max]."""

    value: float
    s_argmin: float
    s_max: float
    n_samples: int
    spacing: float
    lower_bound: float | None  # analytic certificate, present when gamma > gamma0_bound

    def __float__(self):
        return self.value


def c_gamma(gamma: float, part: StepPartition, s_max: float | None = None,
            n_samples: int = 100_000) -> CGammaResult:
    """Sampled infimum of the symbol modulus (the symbol is even in s)."""
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    if part.m == 1:
        value = float(part.a[0] * part.betas[0] ** (-(0.5 + gamma)))
        return CGammaResult(value=value, s_argmin=0.0, s_max=0.0, n_samples=1,
                            spacing=0.0, lower_bound=value)
    if s_max is None:
        # window spanning many quasi-periods of the almost-periodic symbol
        s_max = 40.0 * np.pi / abs(np.log(part.betas[-1] / part.betas[0]))
    if s_max <= 0:
        raise ValueError("s_max must be positive")
    s = np.linspace(0.0, s_max, n_samples)
    vals = lambda_gamma(s, gamma, part)
    i = int(np.argmin(vals))
    lb = _analytic_lower_bound(gamma, part) if gamma > gamma0_bound(part) else None
    return CGammaResult(value=float(vals[i]), s_argmin=float(s[i]), s_max=float(s_max),
                        n_samples=n_samples, spacing=float(s[1] - s[0]), lower_bound=lb)


# ---------------------------------------------------------------------------
# Mellin transforms

def mellin_numeric(f, s, tol: float = 1e-10, support: tuple = (0.0, 1.0)) -> complex:
    """Mellin transform  int f(x) x^(s-1) dx  over the support of f.

    Implemented for bounded f supported in (0, b]; requires Re(s) > 0 so the
    integral converges at the origin.
    """
    s = complex(s)
    if s.real <= 0:
        raise ValueError("mellin_numeric requires Re(s) > 0 for compactly supported f")
    a, b = support
    re = _quad(lambda x: (f(x) * x ** (s - 1)).real, a, b, tol)
    im = _quad(lambda x: (f(x) * x ** (s - 1)).imag, a, b, tol)
    return complex(re, im)


def mellin_l2(f, s, tol: float = 1e-10, support: tuple = (0.0, 1.0)) -> complex:
    """L^2-normalized transform  M[f](1/2 - i s) / sqrt(2 pi)."""
    return mellin_numeric(f, 0.5 - 1j * float(s), tol, support) / np.sqrt(2.0 * np.pi)


def _mellin_line(f, s_grid, b: float, n_panels: int = 48, n_nodes: int = 24):
    """M[f](1/2 - i s) on a grid, via geometrically graded Gauss-Legendre panels.

    The grading toward 0 resolves the x^(-1/2) endpoint weight.  Each octave is
    split so the oscillation e^(-i s ln x) stays resolved at the largest
    frequency; the (x, s) product is evaluated in chunks to bound memory.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    # oscillations per octave at max frequency: s * ln2 / (2 pi)
    s_peak = float(np.max(np.abs(s_grid))) if len(s_grid) else 0.0
    n_sub = max(1, int(np.ceil(s_peak * np.log(2.0) / (2.0 * np.pi) / 3.0)))
    edges = b * 0.5 ** np.arange(n_panels + 1)[::-1]
    edges[0] = 0.0
    xs, ws = [], []
    for lo0, hi0 in zip(edges[:-1], edges[1:]):
        sub = np.linspace(lo0, hi0, n_sub + 1)
        for lo, hi in zip(sub[:-1], sub[1:]):
            xs.append(0.5 * (hi - lo) * nodes + 0.5 * (hi + lo))
            ws.append(0.5 * (hi - lo) * weights)
    x = np.concatenate(xs)
    wq = np.concatenate(ws)
    fx = np.array([f(v) for v in x], dtype=float)
    amp = fx * wq / np.sqrt(x)
    logx = np.log(x)
    out = np.empty(len(s_grid), dtype=complex)
    chunk = 256
    for i in range(0, len(s_grid), chunk):
        out[i:i + chunk] = amp @ np.exp(-1j * np.outer(logx, s_grid[i:i + chunk]))
    return out


def mellin_plancherel_ratio(f, support_b: float, l2_norm: float,
                            s_max: float = 400.0, n_s: int = 16001) -> float:
    """||M_tilde[f]||_L2(R) / ||f||_L2(0,inf), 1 for an exact isometry."""
    s = np.linspace(0.0, s_max, n_s)
    vals = np.abs(_mellin_line(f, s, support_b)) ** 2 / (2.0 * np.pi)
    # even integrand: integrate [0, s_max] and double
    norm_sq = 2.0 * integrate.simpson(vals, x=s)
    return float(np.sqrt(norm_sq) / l2_norm)


# ---------------------------------------------------------------------------
# Norm families

_FAMILY_KINDS = ("Lp", "BV", "weighted")


@dataclass(frozen=True)
class NormFamilySpec:
    """One member of the norm family: L^p, BV, or a weighted Sobolev norm.

    The scaling constant C(lambda) of family axiom (iii) is lambda^(1/p) for
    finite p and 1 for L^inf and BV.
    """

    kind: str
    p: float | None = None
    order: int | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in _FAMILY_KINDS:
            raise ValueError(f"kind must be one of {_FAMILY_KINDS}")
        if self.kind == "Lp" and not (self.p and self.p >= 1):
            raise ValueError("Lp family requires p >= 1 (np.inf for the sup norm)")
        if self.kind == "weighted" and self.order not in (-1, 0, 1):
            raise ValueError("weighted family requires order in {-1, 0, 1}")

    def C(self, lam: float) -> float:
        """Scaling constant: nondecreasing with C(1) = 1."""
        if lam <= 0:
            raise ValueError("lambda must be positive")
        if self.kind == "Lp" and np.isfinite(self.p):
            return float(lam ** (1.0 / self.p))
        return 1.0


def _sample(f, a, b, n):
    x = np.linspace(a, b, n, endpoint=False)
    return x, np.array([f(v) for v in x], dtype=float)


def family_norm(f, spec: NormFamilySpec, interval, n_samples: int = 2001,
                tol: float = 1e-10) -> float:
    """Norm of f over [a, b) for the L^p and BV families.

    ``f`` is a callable, or a (x, y) pair of tabulated values (used exactly:
    the BV variation is the sum of tabulated swings).
    """
    a, b = interval
    if not 0.0 <= a < b:
        raise ValueError(f"invalid interval [{a}, {b})")
    if isinstance(f, tuple):
        x, y = np.asarray(f[0], float), np.asarray(f[1], float)
        sel = (x >= a) & (x < b)
        x, y = x[sel], y[sel]
        tabulated = True
    else:
        x, y = _sample(f, a, b, n_samples)
        tabulated = False
    if spec.kind == "BV":
        return float(np.max(np.abs(y)) + np.sum(np.abs(np.diff(y))))
    if spec.kind != "Lp":
        raise ValueError("family_norm handles the Lp and BV kinds; use weighted_norm")
    if np.isinf(spec.p):
        return float(np.max(np.abs(y)))
    if tabulated:
        return float(np.trapezoid(np.abs(y) ** spec.p, x) ** (1.0 / spec.p))
    # |f|^p has kinks at sign changes; the relative fallback keeps the
    # adaptive rule from flagging roundoff there
    return float(_quad(lambda v: abs(f(v)) ** spec.p, a, b, tol,
                       rel=1e-8) ** (1.0 / spec.p))


def weighted_norm(f, order: int, gamma: float, b: float, fprime=None,
                  tol: float = 1e-10, n_grid: int = 4001, points=None) -> float:
    """Weighted Sobolev norm  || |x|^gamma f ||  in L^2, H^1 or H^-1 over (0, b).

    Order 1 requires the derivative of f (callable ``fprime``, else central
    finite differences).  Order -1 is a discrete dual norm: solve the
    two-point problem -u'' + u = |x|^gamma f with u(0) = u(b) = 0 on a uniform
    grid and return the discrete H^1 norm of u.
    """
    # the weight can make the integrand large; a relative fallback keeps the
    # adaptive quadrature from flagging roundoff on well-behaved integrals
    rel = 1e-10
    if order == 0:
        return float(np.sqrt(_quad(lambda x: x ** (2 * gamma) * f(x) ** 2, 0.0, b,
                                   tol, points=points, rel=rel)))
    if order == 1:
        if fprime is None:
            h = b * 1e-7

            def fprime(x):
                return (f(min(x + h, b)) - f(max(x - h, 0.0))) / (
                    min(x + h, b) - max(x - h, 0.0))

        def dsig(x):
            return gamma * x ** (gamma - 1) * f(x) + x**gamma * fprime(x)

        l2 = _quad(lambda x: x ** (2 * gamma) * f(x) ** 2, 0.0, b, tol,
                   points=points, rel=rel)
        d2 = _quad(lambda x: dsig(x) ** 2, 0.0, b, tol, points=points, rel=rel)
        return float(np.sqrt(l2 + d2))
    if order == -1:
        x = np.linspace(0.0, b, n_grid)
        h = x[1] - x[0]
        v = np.array([xx**gamma * f(xx) for xx in x])
        n = n_grid - 2  # interior unknowns
        ab = np.zeros((3, n))
        ab[0, 1:] = -1.0 / h**2
        ab[1, :] = 2.0 / h**2 + 1.0
        ab[2, :-1] = -1.0 / h**2
        u = np.zeros(n_grid)
        u[1:-1] = solve_banded((1, 1), ab, v[1:-1])
        du = np.diff(u) / h
        h1_sq = np.trapezoid(u**2, x) + np.sum(du**2) * h
        return float(np.sqrt(h1_sq))
    raise ValueError(f"order must be -1, 0 or 1, got {order}")


# ---------------------------------------------------------------------------
# Inequality verifiers

@dataclass(frozen=True)
class MarginReport:
    """One verified inequality: margin = rhs - constant * lhs."""

    lhs: float
    rhs: float
    constant: float
    margin: float

    @property
    def holds(self) -> bool:
        return self.margin >= -1e-9 * self.rhs


def verify_stability_L2(phi, gamma: float, part: StepPartition,
                        tol: float = 1e-10) -> MarginReport:
    """Inverse inequality  C_gamma * ||phi - phi(L)||_{0,gamma,L} <=
    ||Phi_m[phi] - Phi_m[phi](L_m)||_{0,gamma,L_m}."""
    L, Lm = part.length, part.L_m
    phiL = phi(L)
    cg = c_gamma(gamma, part).value
    lhs = weighted_norm(lambda x: phi(x) - phiL, 0, gamma, L, tol=tol)
    clamped = lambda x: phi(min(x, L))
    kinks = [float(t) for t in part.Lk[1:-1] if 0.0 < t < Lm]
    rhs = weighted_norm(lambda t: Phi_m(clamped, t, part) - phiL, 0, gamma, Lm,
                        tol=tol, points=kinks or None)
    return MarginReport(lhs=lhs, rhs=rhs, constant=cg, margin=rhs - cg * lhs)


@dataclass(frozen=True)
class OperatorStabilityReport:
    """Weighted norms entering the continuity and stability inequalities of
    the step-kernel current, with their empirical ratios."""

    norm_rho_L2: float
    norm_I_1_gamma: float        # ||I_m[rho]||_{1,gamma,L_m^2}
    norm_rho_dual: float         # ||rho||_{-1,gamma+1,L}
    norm_I_1_half: float         # ||I_m[rho]||_{1,gamma/2-1/4,L_m^2}
    continuity_ratio: float
    stability_ratio: float


def verify_operator_stability(rho, gamma: float, part: StepPartition,
                              pp: PhysicalParams, tol: float = 1e-9,
                              n_grid: int = 4001) -> OperatorStabilityReport:
    """Evaluate both sides of the current continuity/stability inequalities.

    The abstract constants are not computed; callers check that the ratios are
    finite and stable under refinement.
    """
    from .forward import CumulativeFn, I_m_formula

    L, Lm = part.length, part.L_m
    phi = CumulativeFn.from_density(rho, L, tol=min(tol, 1e-10))
    Fc0 = pp.J0 * hill_F(pp.c0, pp.hill)

    def current(x):
        return I_m_formula(phi, x, part, pp)

    def dcurrent(x):
        if x <= 0:
            return 0.0
        rt = np.sqrt(x)
        active = part.betas * rt < L
        return Fc0 * float(np.sum(part.a[active] * part.betas[active]
                                  * np.array([rho(b * rt) for b in part.betas[active]])
                                  )) / (2.0 * rt)

    kinks = [float(t**2) for t in part.Lk[1:-1]]
    norm_rho = float(np.sqrt(_quad(lambda x: rho(x) ** 2, 0.0, L, tol)))

    def h1(gam):
        return weighted_norm(current, 1, gam, Lm**2, fprime=dcurrent, tol=tol,
                             points=kinks or None)

    nI = h1(gamma)
    nI_half = h1(gamma / 2.0 - 0.25)
    n_dual = weighted_norm(rho, -1, gamma + 1.0, L, n_grid=n_grid)
    return OperatorStabilityReport(
        norm_rho_L2=norm_rho,
        norm_I_1_gamma=nI,
        norm_rho_dual=n_dual,
        norm_I_1_half=nI_half,
        continuity_ratio=nI / norm_rho if norm_rho else 0.0,
        stability_ratio=n_dual / nI_half if nI_half else 0.0,
    )


def verify_levelwise_stability(phi, k: int, family: NormFamilySpec,
                               spec: GeometricMeshSpec, part: StepPartition,
                               n_samples: int = 2001) -> MarginReport:
    """Level-wise bound: the cumulative on [beta^(k+1) L, beta^k L) is
    controlled by the recentred dilation sum on [beta^(k+1) L_m, L_m), with
    constant C(beta0) * C(beta^m) / a_m^(k+1)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    L, Lm = part.length, part.L_m
    beta = spec.beta
    phiL = phi(L)
    const = (family.C(spec.beta0) * family.C(beta**spec.m)
             / part.a[-1] ** (k + 1))
    lhs = family_norm(lambda x: phi(x) - phiL, family,
                      (beta ** (k + 1) * L, beta**k * L), n_samples)
    clamped = lambda x: phi(min(x, L))
    rhs_norm = family_norm(lambda t: Phi_m(clamped, t, part) - phiL, family,
                           (beta ** (k + 1) * Lm, Lm), n_samples)
    rhs = const * rhs_norm
    return MarginReport(lhs=lhs, rhs=rhs, constant=const, margin=rhs - lhs)


# ---------------------------------------------------------------------------
# Eigenvalue collision scan (polynomial-kernel identifiability witness)

def _phi_int(v: int) -> int:
    return v * v + v


@dataclass(frozen=True)
class Lemma9Report:
    """Exact-integer scan for collisions  sum_i mu_{n_i}^2 = mu_n^2."""

    k_max: int
    n_max: int
    solutions: dict = field(default_factory=dict)   # k -> list of (multiset, n)
    certificates: dict = field(default_factory=dict)  # k -> congruence note

    def collision_free(self, k: int) -> bool:
        return not self.solutions.get(k)


def _enumerate_multisets(target: int, k: int, n_max: int, lo: int = 0, prefix=()):
    """All nondecreasing k-tuples of values in [lo, n_max] whose phi-sums hit
    target; target is small enough that pruning keeps this cheap."""
    if k == 0:
        if target == 0:
            yield prefix
        return
    for v in range(lo, n_max + 1):
        pv = _phi_int(v)
        if pv * k > target and v > lo:
            break
        if pv > target:
            break
        yield from _enumerate_multisets(target - pv, k - 1, n_max, v, prefix + (v,))


def lemma9_scan(k_max: int = 8, n_max: int = 30, pp: PhysicalParams | None = None) -> Lemma9Report:
    """Search for exact identities  k + 4*sum phi(n_i) = 1 + 4*phi(n)  with
    phi(v) = v^2 + v, in integer arithmetic.

    The eigenvalue scale cancels, so the scan is independent of the physical
    parameters.  A congruence certificate accompanies each k: since phi is
    even, the left side is k mod 8 and the right side 1 mod 8, so collisions
    require k = 1 mod 8.
    """
    if not 1 <= k_max <= 8:
        raise ValueError("k_max must lie in 1..8")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    solutions = {}
    certificates = {}
    for k in range(1, k_max + 1):
        certificates[k] = (
            f"k + 4*sum(phi) = {k} (mod 8) on the left, 1 (mod 8) on the right; "
            f"k = {k} is {'consistent' if k % 8 == 1 else 'inconsistent'} with k = 1 (mod 8)"
        )
        sols = []
        # achievable sums of k phi-values, as a boolean table
        max_sum = k * _phi_int(n_max)
        reach = np.zeros(max_sum + 1, dtype=bool)
        reach[0] = True
        phis = [_phi_int(v) for v in range(n_max + 1)]
        for _ in range(k):
            nxt = np.zeros_like(reach)
            for pv in phis:
                nxt[pv:] |= reach[: max_sum + 1 - pv]
            reach = nxt
        # derived bound on the target index n
        n_bound = (isqrt(1 + (k - 1) + 4 * max_sum) - 1) // 2 + 1
        for n in range(n_bound + 1):
            lhs_sum = _phi_int(n) - (k - 1) // 4  # valid only when 4 | (k-1)
            if (k - 1) % 4 != 0:
                continue
            if 0 <= lhs_sum <= max_sum and reach[lhs_sum]:
                for ms in _enumerate_multisets(lhs_sum, k, n_max):
                    sols.append((ms, n))
        solutions[k] = sorted(sols)
    return Lemma9Report(k_max=k_max, n_max=n_max, solutions=solutions,
                        certificates=certificates)


# ---------------------------------------------------------------------------
# Aggregate report

@dataclass(frozen=True)
class StabilityReport:
    """Bundle of stability diagnostics for one partition."""

    gamma: float
    gamma0: float
    c_gamma: CGammaResult
    lambda_s: np.ndarray
    lambda_values: np.ndarray

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "gamma0_bound": self.gamma0,
            "c_gamma": self.c_gamma.value,
            "c_gamma_argmin": self.c_gamma.s_argmin,
            "c_gamma_lower_bound": self.c_gamma.lower_bound,
            "s_max": self.c_gamma.s_max,
            "n_samples": self.c_gamma.n_samples,
        }


def stability_report(part: StepPartition, gamma: float | None = None,
                     n_profile: int = 2001) -> StabilityReport:
    """C_gamma profile at gamma (default: sufficient threshold + 1)."""
    g0 = gamma0_bound(part)
    if gamma is None:
        gamma = (g0 + 1.0) if np.isfinite(g0) else 1.0
    cg = c_gamma(gamma, part)
    s = np.linspace(0.0, cg.s_max if cg.s_max > 0 else 1.0, n_profile)
    return StabilityReport(gamma=gamma, gamma0=g0, c_gamma=cg, lambda_s=s,
                           lambda_values=lambda_gamma(s, gamma, part))
