"""Galerkin assembly of (-d Laplacian)^s + A and the maps built from it.

Coefficient pairs are arrays of shape (2, N) (component-major); the assembled
matrix acts on their flattening of length 2N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import NEUMANN, EigenBasis
from .errors import ConvergenceError, GridMismatchError, ValidationError
from .field import MatrixField, check_cooperative

POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000


def _check_pair(name: str, value, lo_open: float, hi: float | None) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in value)
    except (TypeError, ValueError):
        raise ValidationError(f"expected a pair of reals, got {value!r}", name) from None
    for v in (a, b):
        if not math.isfinite(v) or v <= lo_open or (hi is not None and v > hi):
            bound = f"in ({lo_open}, {hi}]" if hi is not None else f"> {lo_open}"
            raise ValidationError(f"entries must be {bound}, got {v!r}", name)
    return a, b


def check_d(d) -> tuple[float, float]:
    return _check_pair("d", d, 0.0, None)


def check_s(s) -> tuple[float, float]:
    return _check_pair("s", s, 0.0, 1.0)


def fractional_symbol(basis: EigenBasis, d: float, s: float) -> np.ndarray:
    """Diagonal entries d^s mu_k^s (exactly 0 on the Neumann constant mode)."""
    return (d * basis.mu) ** s


def galerkin_matrix(basis: EigenBasis, values: np.ndarray) -> np.ndarray:
    """G[k, l] = <a phi_l, phi_k> by quadrature for grid values of a."""
    weighted = basis.values * (basis.grid.weights * values)
    return weighted @ basis.values.T


def _as_pair(coeffs, n: int) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    if c.shape == (2 * n,):
        return c.reshape(2, n)
    if c.shape != (2, n):
        raise ValidationError(f"expected coefficient pair of shape (2, {n}), got {c.shape}", "coeffs")
    return c


@dataclass(frozen=True, eq=False)
class CooperativeOperator:
    basis: EigenBasis
    d: tuple[float, float]
    s: tuple[float, float]
    A: MatrixField | None
    matrix: np.ndarray     # (2N, 2N)
    coupling: np.ndarray   # Galerkin matrix of A alone
    symbols: np.ndarray    # (2, N) diagonal fractional part
    symmetric: bool
    kind: str = "fractional"

    @property
    def bc(self) -> str:
        return self.basis.bc

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    def apply(self, coeffs) -> np.ndarray:
        c = _as_pair(coeffs, self.n_modes)
        return (self.matrix @ c.ravel()).reshape(2, -1)

    def apply_grid(self, coeffs) -> np.ndarray:
        return self.basis.synthesize(self.apply(coeffs))


def _coupling_matrix(basis: EigenBasis, A: MatrixField) -> np.ndarray:
    if tuple(A.lengths) != tuple(basis.domain.lengths):
        raise GridMismatchError(
            f"coefficient field lives on {A.lengths}, basis on {basis.domain.lengths}", "A")
    check_cooperative(A, basis.grid)
    vals = A.values(basis.grid)
    n = basis.n_modes
    out = np.empty((2 * n, 2 * n))
    entries = A.entries
    for i in range(2):
        for j in range(2):
            f = entries[2 * i + j]
            # the Gram matrix is the identity analytically; skip its rounding noise
            block = f.mean * np.eye(n) if f.is_constant else galerkin_matrix(basis, vals[i, j])
            out[i * n:(i + 1) * n, j * n:(j + 1) * n] = block
    return out


def _finish(basis, d, s, A, symbols, coupling, kind) -> CooperativeOperator:
    matrix = coupling + np.diag(symbols.ravel())
    symmetric = bool(A.symmetric)
    if symmetric:
        matrix = 0.5 * (matrix + matrix.T)
    matrix.setflags(write=False)
    coupling.setflags(write=False)
    symbols.setflags(write=False)
    return CooperativeOperator(basis, d, s, A, matrix, coupling, symbols, symmetric, kind)


def assemble(basis: EigenBasis, d, s, A: MatrixField) -> CooperativeOperator:
    """Assemble the 2N x 2N Galerkin matrix of (-d Laplacian)^s + A."""
    d = check_d(d)
    s = check_s(s)
    symbols = np.array([fractional_symbol(basis, d[i], s[i]) for i in range(2)])
    return _finish(basis, d, s, A, symbols, _coupling_matrix(basis, A), "fractional")


def limit_s0_assemble(basis: EigenBasis, A: MatrixField) -> CooperativeOperator:
    """Galerkin matrix of A + I - P0, the limit of the operator as both orders go to 0."""
    if basis.bc != NEUMANN:
        raise ValidationError("the order-zero limit operator is defined for Neumann bases only", "basis")
    step = np.ones(basis.n_modes)
    step[0] = 0.0
    symbols = np.array([step, step])
    return _finish(basis, (1.0, 1.0), (0.0, 0.0), A, symbols, _coupling_matrix(basis, A), "limit_s0")


def apply_fractional(basis: EigenBasis, d: float, s: float, coeffs) -> np.ndarray:
    d, s = check_d((d, d))[0], check_s((s, s))[0]
    c = np.asarray(coeffs, dtype=float)
    return c * fractional_symbol(basis, d, s)[: c.shape[-1]]


def resolvent_apply(basis: EigenBasis, d, s, beta: float, f) -> np.ndarray:
    """((-d Laplacian)^s + beta)^{-1} applied componentwise to a coefficient pair."""
    d, s = check_d(d), check_s(s)
    if not beta > 0:
        raise ValidationError(f"beta must be positive, got {beta!r}", "beta")
    c = _as_pair(f, basis.n_modes)
    denom = np.array([fractional_symbol(basis, d[i], s[i]) + beta for i in range(2)])
    return c / denom


def semigroup_step(basis: EigenBasis, d, s, t: float, coeffs) -> np.ndarray:
    """exp(-t (-d Laplacian)^s) applied componentwise to a coefficient pair."""
    d, s = check_d(d), check_s(s)
    if not t >= 0:
        raise ValidationError(f"t must be nonnegative, got {t!r}", "t")
    c = _as_pair(coeffs, basis.n_modes)
    factors = np.array([np.exp(-t * fractional_symbol(basis, d[i], s[i])) for i in range(2)])
    return c * factors


def default_beta(lam: float, A: MatrixField, basis: EigenBasis) -> float:
    return 2.0 * (abs(lam) + A.max_row_sum(basis.grid) + 1.0)


@dataclass
class PowerResult:
    radius: float
    coeffs: np.ndarray  # (2N,) direction normalized to unit sup norm
    iterations: int
    decided_early: bool = False


def _kr_matrix(op: CooperativeOperator, lam: float, beta: float) -> np.ndarray:
    n2 = op.matrix.shape[0]
    numer = (lam + beta) * np.eye(n2) - op.coupling
    return numer / (op.symbols.ravel() + beta)[:, None]


def _sup(op: CooperativeOperator, c: np.ndarray) -> float:
    return float(np.max(np.abs(op.basis.synthesize(c.reshape(2, -1)))))


def kr_power(op: CooperativeOperator, lam: float, beta: float, start=None,
             tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER,
             decide_only: bool = False) -> PowerResult:
    """Power iteration for the spectral radius of K_{lam,beta} with sup-norm normalization.

    With ``decide_only`` the loop stops as soon as the radius is clearly on
    one side of 1 (the distance exceeds ten times a geometric tail estimate).
    """
    diag_min = float(np.min(-op.A.values(op.basis.grid)[[0, 1], [0, 1]])) + lam + beta
    if not diag_min > 0:
        raise ValidationError(
            f"beta = {beta!r} too small: -a_ii + lambda + beta has minimum {diag_min!r}", "beta")
    K = _kr_matrix(op, lam, beta)
    if start is None:
        start = op.basis.project(np.ones((2, op.basis.grid.size))).ravel()
    u = np.asarray(start, dtype=float).ravel().copy()
    u /= _sup(op, u)
    prev = math.nan
    prev_inc = math.nan
    for it in range(1, max_iter + 1):
        w = K @ u
        r = _sup(op, w)
        if not (math.isfinite(r) and r > 0):
            raise ConvergenceError("power iteration collapsed", {"lambda": lam, "beta": beta, "iteration": it})
        u = w / r
        inc = abs(r - prev)
        if inc <= tol:
            return PowerResult(r, u, it)
        if decide_only and it >= 8 and math.isfinite(prev_inc) and inc < prev_inc:
            q = inc / prev_inc
            tail = inc * q / (1.0 - q)
            if abs(r - 1.0) > 10.0 * tail + 10.0 * tol:
                return PowerResult(r, u, it, decided_early=True)
        prev, prev_inc = r, inc
    raise ConvergenceError(
        "power iteration did not converge",
        {"lambda": lam, "beta": beta, "iterations": max_iter, "last_increment": prev_inc})


def krein_rutman_radius(basis: EigenBasis, d, s, A: MatrixField, lam: float, beta: float | None = None,
                        op: CooperativeOperator | None = None) -> tuple[float, np.ndarray]:
    """Spectral radius of K_{lam,beta} = (S + beta)^{-1}(-A + (lam + beta)) and its positive direction.

    Returns the radius and the fixed direction as a grid pair with unit sup norm.
    """
    if op is None:
        op = assemble(basis, d, s, A)
    if beta is None:
        beta = default_beta(lam, A, basis)
    res = kr_power(op, lam, beta)
    direction = basis.synthesize(res.coeffs.reshape(2, -1))
    if np.sum(direction) < 0:
        direction = -direction
    return res.radius, direction
