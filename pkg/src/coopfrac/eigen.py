"""Principal eigenpairs, Rayleigh quotients, diffusion gradients, certificates
and maximum-principle checks for the assembled cooperative operator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import NEUMANN, EigenBasis
from .errors import BracketError, StaleEigenpairError, ValidationError
from .field import MatrixField
from .operator import (
    CooperativeOperator,
    _as_pair,
    assemble,
    default_beta,
    kr_power,
)

BISECTION_TOL = 1e-10
STALE_RESIDUAL = 1e-6
BORDERLINE = 1e-12


@dataclass(frozen=True, eq=False)
class PrincipalEigenpair:
    lambda_p: float
    coeffs: np.ndarray   # (2, N), unit Euclidean norm
    phi1: np.ndarray     # (2, P) grid pair
    residual: float
    positivity_margin: float
    spectral_gap: float
    nonconstancy_margin: tuple[float, float]
    method: str

    def report(self) -> dict:
        return {
            "lambda_p": self.lambda_p,
            "residual": self.residual,
            "positivity_margin": self.positivity_margin,
            "spectral_gap": self.spectral_gap,
            "nonconstancy_margin": list(self.nonconstancy_margin),
            "method": self.method,
        }


def _fix_sign(basis: EigenBasis, coeffs: np.ndarray) -> np.ndarray:
    grid = basis.grid
    for comp in range(2):
        mean = float(basis.synthesize(coeffs[comp]) @ grid.weights)
        if abs(mean) > 1e-14:
            return coeffs if mean > 0 else -coeffs
    return coeffs


def _package(op: CooperativeOperator, lam: float, vec: np.ndarray, gap: float, method: str) -> PrincipalEigenpair:
    basis = op.basis
    coeffs = vec.reshape(2, -1)
    coeffs = coeffs / np.linalg.norm(coeffs)
    coeffs = _fix_sign(basis, coeffs)
    phi = basis.synthesize(coeffs)
    residual = float(np.max(np.abs(basis.synthesize(op.apply(coeffs) - lam * coeffs))))
    mask = basis.interior_mask()
    margin = float(np.min(phi[:, mask]))
    spread = tuple(float(np.max(phi[i]) - np.min(phi[i])) for i in range(2))
    coeffs.setflags(write=False)
    phi.setflags(write=False)
    return PrincipalEigenpair(float(lam), coeffs, phi, residual, margin, float(gap), spread, method)


def principal_symmetric(op: CooperativeOperator) -> PrincipalEigenpair:
    """Smallest eigenpair by a dense symmetric eigensolve."""
    if not op.symmetric:
        raise ValidationError("operator is not symmetric; use principal_krein_rutman", "op")
    w, v = scipy.linalg.eigh(op.matrix, subset_by_index=[0, 1])
    return _package(op, float(w[0]), v[:, 0], float(w[1] - w[0]), "symmetric_eigh")


def _gershgorin(matrix: np.ndarray) -> tuple[float, float]:
    diag = np.diag(matrix)
    radii = np.sum(np.abs(matrix), axis=1) - np.abs(diag)
    return float(np.min(diag - radii)), float(np.max(diag + radii))


def principal_krein_rutman(basis: EigenBasis, d, s, A: MatrixField, tol: float = BISECTION_TOL,
                           op: CooperativeOperator | None = None) -> PrincipalEigenpair:
    """Principal eigenpair by bisection on r(K_{lam,beta}) = 1.

    Works for asymmetric coupling.  The radius is computed by power iteration
    on the positive cone; the eigenfunction is the converged direction after
    one inverse-iteration step.
    """
    if op is None:
        op = assemble(basis, d, s, A)
    lo, hi = _gershgorin(op.matrix)
    lo, hi = lo - 1.0, hi + 1.0
    start = None

    def radius(lam, decide_only=True):
        nonlocal start
        res = kr_power(op, lam, default_beta(lam, A, basis), start=start, decide_only=decide_only)
        start = res.coeffs
        return res

    r_lo, r_hi = radius(lo).radius, radius(hi).radius
    if not (r_lo < 1.0 < r_hi):
        raise BracketError("Krein-Rutman radius does not cross 1 on the Gershgorin bracket",
                           {"lower": lo, "upper": hi, "radius_lower": r_lo, "radius_upper": r_hi})
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if radius(mid).radius < 1.0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    direction = radius(lam, decide_only=False).coeffs
    n2 = op.matrix.shape[0]
    shifted = op.matrix - lam * np.eye(n2)
    try:
        refined = scipy.linalg.solve(shifted, direction)
    except (scipy.linalg.LinAlgError, ValueError):
        refined = direction
    if not np.all(np.isfinite(refined)):
        refined = direction
    others = np.sort(np.linalg.eigvals(op.matrix).real)
    gap = float(others[1] - others[0]) if others.size > 1 else math.inf
    return _package(op, lam, refined, gap, "krein_rutman_bisection")


def principal_eigenpair(op: CooperativeOperator) -> PrincipalEigenpair:
    """Dispatch on symmetry: dense symmetric solve or the Krein-Rutman path."""
    if op.symmetric:
        return principal_symmetric(op)
    return principal_krein_rutman(op.basis, op.d, op.s, op.A, op=op)


def principal_value(basis: EigenBasis, d, s, A: MatrixField) -> float:
    return principal_eigenpair(assemble(basis, d, s, A)).lambda_p


def rayleigh_quotient(op: CooperativeOperator, u) -> float:
    c = _as_pair(u, op.n_modes).ravel()
    denom = float(c @ c)
    if denom == 0.0:
        raise ValidationError("Rayleigh quotient of the zero vector", "u")
    return float(c @ (op.matrix @ c)) / denom


def grad_lambda_d(basis: EigenBasis, d, s, A: MatrixField, eigenpair: PrincipalEigenpair) -> tuple[float, float]:
    """Derivative of the principal eigenvalue in each diffusion rate.

    Evaluates s_i/d_i * <(-d_i Laplacian)^{s_i} phi_i, phi_i> / ||phi||^2 in
    coefficient space; needs symmetric coupling.
    """
    op = assemble(basis, d, s, A)
    if not op.symmetric:
        raise ValidationError("the diffusion-gradient formula needs a12 == a21", "A")
    c = eigenpair.coeffs
    if c.shape != (2, basis.n_modes):
        raise StaleEigenpairError("eigenpair does not belong to this basis", {"shape": list(c.shape)})
    residual = float(np.max(np.abs(basis.synthesize(op.apply(c) - eigenpair.lambda_p * c))))
    if residual > STALE_RESIDUAL:
        raise StaleEigenpairError("eigenpair does not solve the operator for these parameters",
                                  {"residual": residual})
    norm2 = float(np.sum(c * c))
    return tuple(float(op.s[i] / op.d[i] * np.sum(op.symbols[i] * c[i] ** 2) / norm2) for i in range(2))


def certify_bound(basis: EigenBasis, d, s, A: MatrixField, phi, direction: str) -> float:
    """Certified bound from a positive test pair.

    ``lower`` returns min over points and components of (K phi)_i / phi_i,
    which cannot exceed the principal eigenvalue; ``upper`` returns the max,
    which cannot fall below it.  ``phi`` is a grid pair, represented in the
    truncated basis before use.
    """
    if direction not in ("lower", "upper"):
        raise ValidationError(f"direction must be 'lower' or 'upper', got {direction!r}", "direction")
    op = assemble(basis, d, s, A)
    coeffs = basis.project(np.asarray(phi, dtype=float).reshape(2, -1))
    values = basis.synthesize(coeffs)
    mask = basis.interior_mask()
    inner = values[:, mask]
    if not np.all(inner > 0):
        raise ValidationError("test function must be positive on the (interior) grid", "phi")
    ratio = op.apply_grid(coeffs)[:, mask] / inner
    return float(np.min(ratio) if direction == "lower" else np.max(ratio))


def random_nonnegative(basis: EigenBasis, rng: np.random.Generator) -> np.ndarray:
    """Band-limited nonnegative grid function: squares of low modes (times the first sine for Dirichlet)."""
    low = [i for i, idx in enumerate(basis.indices) if max(idx) <= (3 if basis.domain.dim == 1 else 1)]
    q = rng.normal(size=len(low)) @ basis.values[low]
    f = q * q
    if basis.bc != NEUMANN:
        f = f * basis.values[0] / np.max(basis.values[0])
    return f


def _random_forcing(basis: EigenBasis, rng: np.random.Generator) -> np.ndarray:
    pair = np.array([random_nonnegative(basis, rng), random_nonnegative(basis, rng)])
    if rng.random() < 0.25:
        pair[rng.integers(2)] = 0.0
    coeffs = basis.project(pair)
    used = basis.synthesize(coeffs)
    if np.min(used) < -1e-13:
        raise ValidationError("too few modes to represent the random nonnegative forcing", "n_modes")
    return coeffs


@dataclass(frozen=True)
class MaxPrincipleReport:
    lambda_p: float
    status: str                   # holds | fails | borderline
    trials: int
    min_solution: float | None    # over all trials, grid minimum of u
    counterexample: dict | None

    def to_dict(self) -> dict:
        return {
            "lambda_p": self.lambda_p,
            "status": self.status,
            "trials": self.trials,
            "min_solution": self.min_solution,
            "counterexample": self.counterexample,
        }


def check_weak_max_principle(basis: EigenBasis, d, s, A: MatrixField, trials: int = 20,
                             seed: int = 0, tol: float = 1e-10) -> MaxPrincipleReport:
    """Test 'K u = f >= 0 implies u >= 0' by solving random nonnegative problems.

    When the principal eigenvalue is nonpositive the principle fails and the
    explicit witness u = -phi_1 is returned instead.
    """
    op = assemble(basis, d, s, A)
    pair = principal_eigenpair(op)
    lam = pair.lambda_p
    if abs(lam) <= BORDERLINE:
        return MaxPrincipleReport(lam, "borderline", 0, None, None)
    if lam < 0:
        u = -pair.coeffs
        ku = op.apply_grid(u)
        witness = {
            "u_min": float(np.min(basis.synthesize(u))),
            "Ku_min": float(np.min(ku)),
            "Ku_equals": "-lambda_p * phi_1",
        }
        return MaxPrincipleReport(lam, "fails", 0, None, witness)
    rng = np.random.default_rng(seed)
    lu = scipy.linalg.lu_factor(op.matrix)
    worst = math.inf
    for _ in range(trials):
        f = _random_forcing(basis, rng)
        u = scipy.linalg.lu_solve(lu, f.ravel()).reshape(2, -1)
        worst = min(worst, float(np.min(basis.synthesize(u))))
    status = "holds" if worst >= -tol else "violated"
    return MaxPrincipleReport(lam, status, trials, worst, None)
