"""Spectral-Galerkin principal eigenvalues of 2x2 cooperative systems with
spectral fractional Laplacians, asymptotic sweeps, and an endemic
reaction-diffusion model built on them."""

from .basis import DIRICHLET, NEUMANN, Domain, EigenBasis, build_basis, scale_domain
from .eigen import (
    PrincipalEigenpair,
    certify_bound,
    check_weak_max_principle,
    grad_lambda_d,
    principal_eigenpair,
    principal_krein_rutman,
    principal_symmetric,
    rayleigh_quotient,
)
from .epidemic import (
    EpidemicModel,
    Nonlinearity,
    classify_long_time,
    compute_R0,
    evolve,
    steady_state,
    sub_solution,
    super_solution,
)
from .errors import CoopFracError, NumericalError, ValidationError
from .field import MatrixField, ScalarField
from .operator import CooperativeOperator, assemble, krein_rutman_radius, limit_s0_assemble

__version__ = "0.1.0"

__all__ = [
    "DIRICHLET", "NEUMANN", "Domain", "EigenBasis", "build_basis", "scale_domain",
    "PrincipalEigenpair", "certify_bound", "check_weak_max_principle", "grad_lambda_d",
    "principal_eigenpair", "principal_krein_rutman", "principal_symmetric", "rayleigh_quotient",
    "EpidemicModel", "Nonlinearity", "classify_long_time", "compute_R0", "evolve", "steady_state",
    "sub_solution", "super_solution", "CoopFracError", "NumericalError", "ValidationError",
    "MatrixField", "ScalarField", "CooperativeOperator", "assemble", "krein_rutman_radius",
    "limit_s0_assemble",
]
