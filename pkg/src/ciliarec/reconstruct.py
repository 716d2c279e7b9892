"""Explicit inversion on the geometric mesh.

From a measured current trace: normalize and recenter into g, run the level
recursion for the shifted cumulative phi-tilde, assemble the mesh values G,
and recover the density by clamped forward differences.  The lower-triangular
discretization matrix is built only as a diagnostic witness of invertibility.
"""

from dataclasses import dataclass

import numpy as np

from .forward import SampledSignal
from .kernels import GeometricMeshSpec, PhysicalParams, StepPartition
from .special import hill_F

__all__ = [
    "ReconstructionMesh",
    "DensityEstimate",
    "g_from_signal",
    "interpolation_error_bound",
    "phi_recursion",
    "build_mesh",
    "reconstruct_G",
    "density_from_G",
    "assemble_matrix",
]


@dataclass(frozen=True)
class ReconstructionMesh:
    """Geometric mesh: p scaled copies of a base level of q+1 points.

    ``base`` lies in [beta*L, L) with base[0] = beta*L; level j is
    beta^(j-1) * base; ``P`` concatenates the levels in level-major order
    (finest-in-time level first, matching the recursion).
    """

    p: int
    q: int
    beta: float
    L: float
    base: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, float))
        object.__setattr__(self, "P", np.asarray(self.P, float))

    @property
    def n_points(self) -> int:
        return self.p * (self.q + 1)

    def levels(self):
        """Iterate over the p level vectors."""
        return self.P.reshape(self.p, self.q + 1)


@dataclass(frozen=True)
class DensityEstimate:
    """Reconstructed density on ascending abscissae.

    ``Y`` holds the clamped forward differences (nonnegative), ``raw_diff``
    the unclamped values for diagnostics; ``phi_tilde`` is the shifted
    cumulative at ``X``.  The cumulative density itself is phi_tilde + offset.
    """

    X: np.ndarray
    Y: np.ndarray
    phi_tilde: np.ndarray
    raw_diff: np.ndarray
    offset: float

    def __post_init__(self):
        if np.any(np.diff(self.X) <= 0):
            raise ValueError("X must be strictly ascending")
        if np.any(self.Y < 0):
            raise ValueError("Y must be nonnegative")

    def cumulative(self):
        """Recovered cumulative density values at X."""
        return self.phi_tilde + self.offset


def g_from_signal(sig: SampledSignal, part: StepPartition, spec: GeometricMeshSpec,
                  pp: PhysicalParams):
    """Normalized recentred current  g(t) = (I(t^2/beta0^2) - I(L_m^2)) / (J0*F(c0)).

    The signal is interpolated piecewise-linearly in time (monotone data stay
    monotone, no overshoot); it must cover [0, L_m^2].  g is defined on
    [0, beta0*L_m], with g(beta0*L_m) = 0 by construction.
    """
    if len(sig) < 2:
        raise ValueError("signal must contain at least two samples")
    Lm = part.L_m
    t_end = Lm**2
    if sig.times[0] > 1e-12 * t_end or sig.times[-1] < t_end * (1 - 1e-12):
        raise ValueError(f"signal must cover [0, {t_end}] (got [{sig.times[0]}, {sig.times[-1]}])")
    norm = pp.J0 * hill_F(pp.c0, pp.hill)
    I_end = float(np.interp(t_end, sig.times, sig.values))
    t_max = spec.beta0 * Lm

    def g(t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > t_max * (1 + 1e-12)):
            raise ValueError(f"g is defined on [0, {t_max}]")
        out = (np.interp(t**2 / spec.beta0**2, sig.times, sig.values) - I_end) / norm
        return float(out) if np.ndim(out) == 0 else out

    return g


def interpolation_error_bound(sig: SampledSignal) -> float:
    """Bound on the piecewise-linear interpolation error of the signal.

    Per interval, (h^2/8) * |I''| with the curvature estimated from second
    differences of neighbouring samples.
    """
    t, v = sig.times, sig.values
    if len(t) < 3:
        return float("inf")
    slopes = np.diff(v) / np.diff(t)
    # curvature estimate shared by the two intervals around each interior node
    curv = 2.0 * np.abs(np.diff(slopes)) / (t[2:] - t[:-2])
    h = np.diff(t)
    h2 = np.maximum(h[:-1], h[1:]) ** 2
    return float(np.max(h2 * curv / 8.0)) if len(curv) else 0.0


def _check_geometric(part: StepPartition, spec: GeometricMeshSpec):
    expected = spec.beta0 * spec.beta ** np.arange(1, spec.m + 1)
    if part.m != spec.m or np.max(np.abs(part.betas - expected)) > 1e-12 * spec.beta0:
        raise ValueError("partition is not the geometric partition of the given mesh spec")


def phi_recursion(g, spec: GeometricMeshSpec, part: StepPartition, x: float,
                  k_max: int = 10_000) -> float:
    """Shifted cumulative at x in (0, L) via the level recursion.

    Evaluates phi_k at the unique level k = ceil(ln(x/L)/ln(beta)) whose
    support [beta^k L, beta^(k-1) L) contains x; lower levels are resolved
    recursively with memoization.  Out-of-support evaluations are zero.
    """
    _check_geometric(part, spec)
    L = part.length
    if not (0.0 < x < L):
        raise ValueError(f"x={x} outside (0, L={L})")
    beta, m, a = spec.beta, spec.m, part.a
    a_m = a[-1]
    # snap: roundoff on level boundaries must not shift the level index
    k_star = max(int(np.ceil(np.log(x / L) / np.log(beta) - 1e-12)), 1)
    if k_star > k_max:
        raise ValueError(f"recursion depth {k_star} exceeds k_max={k_max}")
    memo = {}

    def phi_k(k, y):
        # support of phi_k is [beta^k L, beta^(k-1) L); callers construct
        # in-support arguments, anything else contributes zero
        if not (beta**k * L - 1e-12 * L <= y < beta ** (k - 1) * L):
            return 0.0
        key = (k, y)
        if key in memo:
            return memo[key]
        val = g(y / beta**m)
        if k == 1:
            val /= a_m
        elif k <= m:
            # phi_{kk+1} with kk = k-1 < m
            kk = k - 1
            val -= sum(a[m - kk - 2 + j] * phi_k(j, beta**j * y / beta**k)
                       for j in range(1, kk + 1))
            val /= a_m
        else:
            val -= sum(a[j - 1] * phi_k(j + k - m, beta**j * y / beta**m)
                       for j in range(1, m))
            val /= a_m
        memo[key] = val
        return val

    return phi_k(k_star, x)


def build_mesh(spec: GeometricMeshSpec, pp: PhysicalParams, p: int, q: int,
               base_rule: str = "uniform") -> ReconstructionMesh:
    """Assemble the p-level geometric mesh with q+1 points per level."""
    if p < 1 or q < 1:
        raise ValueError(f"p and q must be >= 1, got p={p}, q={q}")
    if base_rule != "uniform":
        raise ValueError(f"unknown base rule: {base_rule!r}")
    L, beta = pp.L, spec.beta
    base = beta * L + (L - beta * L) * np.arange(q + 1) / (q + 1)
    P = np.concatenate([beta**k * base for k in range(p)])
    return ReconstructionMesh(p=p, q=q, beta=beta, L=L, base=base, P=P)


def reconstruct_G(g, mesh: ReconstructionMesh, part: StepPartition,
                  spec: GeometricMeshSpec) -> np.ndarray:
    """Level-by-level mesh values of the shifted cumulative.

    Algebraically identical to solving the lower-triangular system of
    :func:`assemble_matrix`, but in O(p*q*m).
    """
    _check_geometric(part, spec)
    a = part.a
    m, a_m = spec.m, a[-1]
    beta = spec.beta
    levels = mesh.levels()
    G = np.empty_like(levels)
    for k in range(mesh.p):  # computing level k+1 (1-based)
        args = levels[k] / beta**m
        try:
            rhs = np.asarray(g(args), dtype=float).reshape(args.shape).copy()
        except (TypeError, ValueError):
            rhs = np.array([g(t) for t in args], dtype=float)
        if k + 1 <= m:
            for j in range(1, k + 1):
                rhs -= a[m - k - 2 + j] * G[j - 1]
        else:
            for j in range(1, m):
                rhs -= a[j - 1] * G[j + k - m]
        G[k] = rhs / a_m
    return G.ravel()


def density_from_G(mesh: ReconstructionMesh, G, offset: float) -> DensityEstimate:
    """Density by clamped forward differences on the ascending mesh."""
    G = np.asarray(G, dtype=float)
    if G.shape != mesh.P.shape:
        raise ValueError("G must align with the mesh point vector")
    order = np.argsort(mesh.P)
    X = mesh.P[order]
    phi_t = G[order]
    raw = np.diff(phi_t) / np.diff(X)
    Y = np.maximum(raw, 0.0)
    return DensityEstimate(X=X[:-1], Y=Y, phi_tilde=phi_t[:-1], raw_diff=raw,
                           offset=float(offset))


def assemble_matrix(mesh: ReconstructionMesh, part: StepPartition,
                    spec: GeometricMeshSpec) -> np.ndarray:
    """Discretization matrix A with A @ G = g(P / beta^m), in level-major order.

    Row (level k, point s) expands the dilation sum at t = P_{k,s}/beta^m:
    entry a_j in the column of level k-m+j (levels below 1 correspond to
    arguments at or beyond L, where the shifted cumulative vanishes).  A is
    lower triangular with every diagonal entry a_m.
    """
    _check_geometric(part, spec)
    n = mesh.n_points
    qq = mesh.q + 1
    A = np.zeros((n, n))
    for k in range(1, mesh.p + 1):
        for j in range(1, spec.m + 1):
            lvl = k - spec.m + j
            if lvl < 1:
                continue
            for s in range(qq):
                A[(k - 1) * qq + s, (lvl - 1) * qq + s] += part.a[j - 1]
    return A
