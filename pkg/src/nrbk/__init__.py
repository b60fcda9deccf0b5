"""Nonreflecting boundary kernels for the wave equation on circles and spheres.

The package computes the exact time-domain boundary kernels as sums of
decaying exponentials, advances their convolutions with O(1) work per
time step, and solves the truncated radial wave equation with a
Legendre-Galerkin discretization and Newmark time integration.
"""

from .convolution import (
    PANEL_RULES,
    ExpState,
    KernelConvolver,
    advance,
)
from .errors import (
    AccuracyError,
    AssemblyError,
    ConfigurationError,
    IntegrationError,
    NrbkError,
    ResolutionError,
    ZeroFindingError,
)
from .kernel import (
    BranchCutRule,
    KernelDecomposition,
    KernelParams,
    build_kernel,
    eval_W,
    eval_W_asymptotic,
    eval_omega,
    eval_sigma,
    theta,
)
from .oracle import (
    DirichletData,
    ExactModalSolution,
    ModalBoundaryCoefficient,
    boundary_residual,
    dump_field_csv,
    dump_residual_csv,
    eval_exact_mode,
    eval_Hn,
    exact_field,
    modal_coefficients,
    residual_metrics,
)
from .solver import (
    ModalProblem,
    ModalSolution,
    NewmarkState,
    SpectralOperator,
    assemble,
    discrete_norms,
    dump_snapshot_csv,
    dump_synthesis_csv,
    energy_diagnostics,
    lift_dirichlet,
    lobatto_grid,
    newmark_init,
    newmark_step,
    solve_mode,
    solve_modes,
    synthesize_field,
)
from .specfun import (
    BesselOrder,
    ZeroSet,
    bessel_k_complex,
    bessel_k_half,
    decay_exponent,
    find_zeros,
    log_bessel_i,
    log_bessel_k,
    zero_count,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "AssemblyError", "ConfigurationError", "IntegrationError",
    "NrbkError", "ResolutionError", "ZeroFindingError",
    "PANEL_RULES", "ExpState", "KernelConvolver", "advance",
    "DirichletData", "ExactModalSolution", "ModalBoundaryCoefficient",
    "boundary_residual", "dump_field_csv", "dump_residual_csv",
    "eval_exact_mode", "eval_Hn", "exact_field", "modal_coefficients",
    "residual_metrics",
    "BranchCutRule", "KernelDecomposition", "KernelParams", "build_kernel",
    "eval_W", "eval_W_asymptotic", "eval_omega", "eval_sigma", "theta",
    "ModalProblem", "ModalSolution", "NewmarkState", "SpectralOperator",
    "assemble", "discrete_norms", "dump_snapshot_csv", "dump_synthesis_csv",
    "energy_diagnostics", "lift_dirichlet", "lobatto_grid", "newmark_init",
    "newmark_step", "solve_mode", "solve_modes", "synthesize_field",
    "BesselOrder", "ZeroSet", "bessel_k_complex", "bessel_k_half",
    "decay_exponent", "find_zeros", "log_bessel_i", "log_bessel_k", "zero_count",
    "__version__",
]
