"""Forward current models and explicit geometric-mesh density reconstruction
for the olfactory-cilium inverse problem, with stability diagnostics."""

from .analysis import (
    NormFamilySpec,
    c_gamma,
    family_norm,
    gamma0_bound,
    lambda_gamma,
    lemma9_scan,
    mellin_numeric,
    stability_report,
    verify_levelwise_stability,
    verify_operator_stability,
    verify_stability_L2,
    weighted_norm,
)
from .config import ConfigError, RunConfig, load_config
from .estimator import DensityReconstructor
from .forward import (
    CumulativeFn,
    I_exact,
    I_m_formula,
    I_m_quadrature,
    PI_m,
    Phi_m,
    QuadratureError,
    SampledSignal,
    phi_from_rho,
    sample_current,
)
from .kernels import (
    GeometricMeshSpec,
    PhysicalParams,
    PolynomialKernel,
    SeriesConvergenceError,
    StepPartition,
    concentration_series,
    default_params,
    geometric_partition,
    kernel_K_m,
    kernel_PK_m,
    partition_from_alphas,
    step_F_m,
    w,
)
from .reconstruct import (
    DensityEstimate,
    ReconstructionMesh,
    assemble_matrix,
    build_mesh,
    density_from_G,
    g_from_signal,
    interpolation_error_bound,
    phi_recursion,
    reconstruct_G,
)
from .special import HillParams, erfc, erfc_inv, hill_F, hill_taylor

__version__ = "0.1.0"
