"""Robin Laplacian eigenvalues for a large negative boundary parameter."""

from .corrections import build_operator_series, run_iteration, zeta_coefficients
from .errors import RobinSpecError
from .expansion import (
    ExpansionCoefficients,
    gamma_to_h,
    h_to_gamma,
    lambda_expansion,
    mu_expansion,
)
from .geometry import (
    CurvatureProfile,
    ParametricCurve,
    arc_length_reparam,
    check_assumption_A,
    localize_max,
)
from .harness import ConvergenceReport, SweepSpec, fit_exponent, verify
from .model1d import Model1DConfig, fd_eigs_H0h, fd_eigs_Hbetah, solve_transcendental
from .solvers import boundary_operator_eigs, collar_2d_eigs, shooting_disc
from .wkb import solve_eikonal, wkb_iterate

__all__ = [
    "ConvergenceReport", "CurvatureProfile", "ExpansionCoefficients", "Model1DConfig",
    "ParametricCurve", "RobinSpecError", "SweepSpec", "arc_length_reparam",
    "boundary_operator_eigs", "build_operator_series", "check_assumption_A",
    "collar_2d_eigs", "fd_eigs_H0h", "fd_eigs_Hbetah", "fit_exponent", "gamma_to_h",
    "h_to_gamma", "lambda_expansion", "localize_max", "mu_expansion", "run_iteration",
    "shooting_disc", "solve_eikonal", "solve_transcendental", "verify", "wkb_iterate",
    "zeta_coefficients",
]
