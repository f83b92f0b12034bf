"""Cosine-series coefficient fields and 2x2 Perron-Frobenius utilities.

A ``ScalarField`` is c0 + sum c_k cos(k pi x / L) on an interval, or a sum of
tensor cosines on a rectangle.  Every such field has zero normal derivative on
the boundary, which is what the cooperative-system theory asks of the
coefficients.  A ``MatrixField`` bundles four of them and enforces strictly
negative off-diagonal coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .basis import Domain, Grid, make_grid
from .errors import CooperativityError, GridMismatchError, ValidationError

SYMMETRY_TOL = 1e-14


def _normalize_terms(terms, dim: int) -> tuple[tuple[tuple[int, ...], float], ...]:
    merged: dict[tuple[int, ...], float] = {}
    for term in terms:
        term = tuple(term)
        if len(term) != dim + 1:
            raise ValidationError(
                f"cosine term {list(term)} needs {dim} index(es) and one amplitude")
        idx = tuple(int(v) for v in term[:dim])
        if any(i != v or i < 0 for i, v in zip(idx, term[:dim])):
            raise ValidationError(f"mode indices must be nonnegative integers, got {list(term[:dim])}")
        amp = float(term[dim])
        if not math.isfinite(amp):
            raise ValidationError(f"amplitude must be finite, got {term[dim]!r}")
        merged[idx] = merged.get(idx, 0.0) + amp
    return tuple(sorted(merged.items()))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Finite cosine series bound to domain lengths."""

    lengths: tuple[float, ...]
    terms: tuple[tuple[tuple[int, ...], float], ...]
    _cache: dict = dc_field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))
        object.__setattr__(self, "terms", _normalize_terms(
            [(*idx, amp) for idx, amp in self.terms], len(self.lengths)))

    @classmethod
    def from_pairs(cls, domain: Domain | tuple, pairs) -> "ScalarField":
        """Build from config-style rows ``[k, amp]`` (or ``[k, m, amp]`` on rectangles)."""
        lengths = domain.lengths if isinstance(domain, Domain) else tuple(domain)
        dim = len(lengths)
        terms = _normalize_terms(pairs, dim)
        return cls(lengths, terms)

    @classmethod
    def constant(cls, domain: Domain | tuple, value: float) -> "ScalarField":
        lengths = domain.lengths if isinstance(domain, Domain) else tuple(domain)
        return cls(lengths, (((0,) * len(lengths), float(value)),))

    @property
    def dim(self) -> int:
        return len(self.lengths)

    @property
    def is_constant(self) -> bool:
        return all(all(i == 0 for i in idx) or amp == 0.0 for idx, amp in self.terms)

    @property
    def mean(self) -> float:
        """Exact spatial average (the constant term)."""
        return sum(amp for idx, amp in self.terms if all(i == 0 for i in idx))

    @property
    def max_index(self) -> int:
        return max((max(idx) for idx, amp in self.terms), default=0)

    def pairs(self) -> list[list[float]]:
        return [[*idx, amp] for idx, amp in self.terms]

    def evaluate_at(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        out = np.zeros(pts.shape[0])
        for idx, amp in self.terms:
            term = np.full(pts.shape[0], amp)
            for axis, k in enumerate(idx):
                if k:
                    term = term * np.cos(k * math.pi * pts[:, axis] / self.lengths[axis])
            out += term
        return out

    def evaluate(self, grid: Grid) -> np.ndarray:
        if tuple(grid.lengths) != self.lengths:
            raise GridMismatchError(
                f"field lives on lengths {self.lengths}, grid has {grid.lengths}", "grid")
        cached = self._cache.get(grid.key)
        if cached is None:
            cached = self.evaluate_at(grid.points)
            cached.setflags(write=False)
            self._cache[grid.key] = cached
        return cached

    def with_lengths(self, lengths) -> "ScalarField":
        """Same series on new domain lengths, i.e. the field x -> a(x / l) for a scaled domain."""
        lengths = lengths.lengths if isinstance(lengths, Domain) else tuple(lengths)
        return ScalarField(lengths, self.terms)

    def shifted(self, c: float) -> "ScalarField":
        return ScalarField(self.lengths, self.terms + (((0,) * self.dim, float(c)),))

    def scaled(self, factor: float) -> "ScalarField":
        return ScalarField(self.lengths, tuple((idx, amp * factor) for idx, amp in self.terms))

    def __add__(self, other):
        if isinstance(other, ScalarField):
            if other.lengths != self.lengths:
                raise GridMismatchError("cannot add fields on different domains")
            return ScalarField(self.lengths, self.terms + other.terms)
        return self.shifted(float(other))

    __radd__ = __add__

    def __neg__(self):
        return self.scaled(-1.0)

    def __mul__(self, factor: float):
        return self.scaled(float(factor))

    __rmul__ = __mul__

    def normal_derivative_residual(self, resolution: int | None = None) -> float:
        """Largest one-sided finite-difference normal derivative on the boundary.

        Uses a 7-point one-sided stencil (6th order) along each axis at both
        ends; zero up to discretization error for any cosine series.
        """
        if resolution is None:
            resolution = max(401, 40 * (self.max_index + 1) + 1)
        offsets = np.arange(7, dtype=float)
        vander = np.vander(offsets, 7, increasing=True).T
        rhs = np.zeros(7)
        rhs[1] = 1.0
        stencil = np.linalg.solve(vander, rhs)
        worst = 0.0
        for axis in range(self.dim):
            length = self.lengths[axis]
            h = length / (resolution - 1)
            # sample a few transverse lines on rectangles
            transverse = [0.0] if self.dim == 1 else list(
                np.linspace(0.0, self.lengths[1 - axis], 7))
            for t in transverse:
                for side in (0.0, length):
                    sign = 1.0 if side == 0.0 else -1.0
                    along = side + sign * h * offsets
                    pts = np.zeros((7, self.dim))
                    pts[:, axis] = along
                    if self.dim == 2:
                        pts[:, 1 - axis] = t
                    deriv = sign * (stencil @ self.evaluate_at(pts)) / h
                    worst = max(worst, abs(deriv))
        return worst


def validation_grid(lengths: tuple[float, ...], max_index: int) -> Grid:
    resolution = max(65, 8 * (max_index + 1) + 1)
    return make_grid(tuple(lengths), resolution)


@dataclass(frozen=True, eq=False)
class MatrixField:
    """Coefficient matrix A(x) with strictly negative off-diagonal entries."""

    a11: ScalarField
    a12: ScalarField
    a21: ScalarField
    a22: ScalarField
    symmetric: bool = dc_field(init=False)

    def __post_init__(self):
        lengths = self.a11.lengths
        for name in ("a12", "a21", "a22"):
            if getattr(self, name).lengths != lengths:
                raise GridMismatchError("all entries must live on the same domain", name)
        grid = validation_grid(lengths, self.max_index)
        check_cooperative(self, grid)
        gap = np.max(np.abs(self.a12.evaluate(grid) - self.a21.evaluate(grid)))
        object.__setattr__(self, "symmetric", bool(gap <= SYMMETRY_TOL))

    @classmethod
    def from_pairs(cls, domain: Domain | tuple, a11, a12, a21, a22) -> "MatrixField":
        return cls(*(ScalarField.from_pairs(domain, p) for p in (a11, a12, a21, a22)))

    @classmethod
    def constant(cls, domain: Domain | tuple, m) -> "MatrixField":
        m = np.asarray(m, dtype=float)
        return cls(*(ScalarField.constant(domain, m[i, j]) for i, j in ((0, 0), (0, 1), (1, 0), (1, 1))))

    @property
    def lengths(self) -> tuple[float, ...]:
        return self.a11.lengths

    @property
    def entries(self) -> tuple[ScalarField, ScalarField, ScalarField, ScalarField]:
        return (self.a11, self.a12, self.a21, self.a22)

    @property
    def max_index(self) -> int:
        return max(f.max_index for f in self.entries)

    @property
    def is_constant(self) -> bool:
        return all(f.is_constant for f in self.entries)

    def constant_matrix(self) -> np.ndarray:
        if not self.is_constant:
            raise ValidationError("field is not constant")
        return np.array([[self.a11.mean, self.a12.mean], [self.a21.mean, self.a22.mean]])

    def values(self, grid: Grid) -> np.ndarray:
        """Entries on the grid, shape (2, 2, P)."""
        a11, a12, a21, a22 = (f.evaluate(grid) for f in self.entries)
        return np.array([[a11, a12], [a21, a22]])

    def shifted(self, c: float) -> "MatrixField":
        return MatrixField(self.a11.shifted(c), self.a12, self.a21, self.a22.shifted(c))

    def with_lengths(self, lengths) -> "MatrixField":
        return MatrixField(*(f.with_lengths(lengths) for f in self.entries))

    def max_row_sum(self, grid: Grid) -> float:
        """max over grid points of the infinity norm of A(x)."""
        v = np.abs(self.values(grid))
        return float(np.max(np.maximum(v[0, 0] + v[0, 1], v[1, 0] + v[1, 1])))

    def max_spectral_norm(self, grid: Grid) -> float:
        v = self.values(grid)
        mats = np.moveaxis(v, -1, 0)
        return float(np.max(np.linalg.norm(mats, ord=2, axis=(1, 2))))


def check_cooperative(A: MatrixField, grid: Grid) -> None:
    """Raise unless a12 < 0 and a21 < 0 at every grid point."""
    for name in ("a12", "a21"):
        vals = getattr(A, name).evaluate_at(grid.points)
        worst = float(np.max(vals))
        if not worst < 0.0:
            at = grid.points[int(np.argmax(vals))].tolist()
            raise CooperativityError(
                f"condition (A2) requires {name} < 0 everywhere; found {name} = {worst!r} at x = {at}",
                f"coefficients.{name}")


def _perron_lambda(a, b, c, d):
    """Smallest eigenvalue of [[a, b], [c, d]] with b, c <= 0, cancellation-free."""
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    delta = a - d
    bc = b * c
    disc = np.sqrt(delta * delta + 4.0 * bc)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_hi = np.where(disc + delta > 0, d - 2.0 * bc / (disc + delta), d)
        lam_lo = np.where(disc - delta > 0, a - 2.0 * bc / (disc - delta), a)
    return np.where(delta >= 0, lam_hi, lam_lo)


def perron_2x2(m) -> tuple[float, np.ndarray]:
    """Perron-Frobenius eigenvalue (smallest real part) and nonnegative unit eigenvector."""
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 matrix, got shape {m.shape}")
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if b > 0 or c > 0:
        raise CooperativityError(f"off-diagonal entries must be nonpositive, got {b!r}, {c!r}")
    lam = float(_perron_lambda(a, b, c, d))
    v1 = np.array([-b, a - lam])
    v2 = np.array([d - lam, -c])
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if max(n1, n2) == 0.0:
        vec = np.array([1.0, 0.0])
    else:
        vec = v1 / n1 if n1 >= n2 else v2 / n2
    return lam, np.abs(vec)


def pointwise_principal(A: MatrixField, grid: Grid) -> np.ndarray:
    """lambda_bar(A(x)) at every grid point."""
    v = A.values(grid)
    return _perron_lambda(v[0, 0], v[0, 1], v[1, 0], v[1, 1])


def min_principal_over_domain(A: MatrixField, grid: Grid) -> tuple[float, np.ndarray]:
    """Minimum of lambda_bar(A(x)) over grid points; first (smallest) point on ties."""
    lam = pointwise_principal(A, grid)
    i = int(np.argmin(lam))
    return float(lam[i]), grid.points[i].copy()


def matrix_average(A: MatrixField, grid: Grid) -> np.ndarray:
    """Entrywise quadrature average of A over the domain."""
    measure = float(np.sum(grid.weights))
    out = np.empty((2, 2))
    for (i, j), f in zip(((0, 0), (0, 1), (1, 0), (1, 1)), A.entries):
        if f.is_constant:
            out[i, j] = f.mean
        else:
            out[i, j] = float(f.evaluate(grid) @ grid.weights) / measure
    return out
