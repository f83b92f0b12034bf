"""Model domains, trapezoid grids and analytic Laplacian eigenbases.

Intervals (0, L) and rectangles (0, lx) x (0, ly) with Neumann (cosine) or
Dirichlet (sine) boundary conditions.  Grid functions are flat arrays whose
last axis runs over grid points; rectangles are flattened x-major.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    GridMismatchError,
    ResolutionTooCoarseError,
    UnsupportedDomainError,
    ValidationError,
)

NEUMANN = "neumann"
DIRICHLET = "dirichlet"
OVERSAMPLING = 4
DEFAULT_MODES = 64


@dataclass(frozen=True)
class Domain:
    kind: str
    lengths: tuple[float, ...]
    bc: str

    def __post_init__(self):
        if self.kind not in ("interval", "rectangle"):
            raise UnsupportedDomainError(f"unknown domain kind {self.kind!r}", "domain.kind")
        if self.bc not in (NEUMANN, DIRICHLET):
            raise UnsupportedDomainError(f"unknown boundary condition {self.bc!r}", "domain.bc")
        expected = 1 if self.kind == "interval" else 2
        if len(self.lengths) != expected:
            raise UnsupportedDomainError(
                f"{self.kind} needs {expected} length(s), got {len(self.lengths)}", "domain")
        for length in self.lengths:
            if not (math.isfinite(length) and length > 0):
                raise ValidationError(f"lengths must be positive, got {length!r}", "domain")
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))

    @classmethod
    def interval(cls, length: float, bc: str = NEUMANN) -> "Domain":
        return cls("interval", (length,), bc)

    @classmethod
    def rectangle(cls, lx: float, ly: float, bc: str = NEUMANN) -> "Domain":
        return cls("rectangle", (lx, ly), bc)

    @property
    def dim(self) -> int:
        return len(self.lengths)

    @property
    def measure(self) -> float:
        return float(math.prod(self.lengths))

    def with_bc(self, bc: str) -> "Domain":
        return Domain(self.kind, self.lengths, bc)


def scale_domain(domain: Domain, l: float) -> Domain:
    """Return l * domain, keeping the boundary condition."""
    if not (math.isfinite(l) and l > 0):
        raise ValidationError(f"scale factor must be positive, got {l!r}", "l")
    return Domain(domain.kind, tuple(l * v for v in domain.lengths), domain.bc)


@dataclass(frozen=True, eq=False)
class Grid:
    """Tensor trapezoid grid including the boundary points."""

    lengths: tuple[float, ...]
    resolution: int
    axes: tuple[np.ndarray, ...]
    points: np.ndarray   # (P, dim)
    weights: np.ndarray  # (P,)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def key(self) -> tuple:
        return (self.lengths, self.resolution)

    def same_as(self, other: "Grid") -> bool:
        return self is other or self.key == other.key

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        n = self.resolution
        idx = np.arange(self.size)
        if len(self.lengths) == 1:
            mask[[0, n - 1]] = True
        else:
            i, j = np.divmod(idx, n)
            mask = (i == 0) | (i == n - 1) | (j == 0) | (j == n - 1)
        return mask


def make_grid(lengths: tuple[float, ...], resolution: int) -> Grid:
    if resolution < 2:
        raise ResolutionTooCoarseError("need at least 2 points per dimension", "resolution")
    axes, w1 = [], []
    for length in lengths:
        x = np.linspace(0.0, length, resolution)
        w = np.full(resolution, length / (resolution - 1))
        w[[0, -1]] *= 0.5
        axes.append(x)
        w1.append(w)
    if len(lengths) == 1:
        points = axes[0][:, None]
        weights = w1[0]
    else:
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        points = np.column_stack([gx.ravel(), gy.ravel()])
        weights = np.outer(w1[0], w1[1]).ravel()
    for a in axes:
        a.setflags(write=False)
    points.setflags(write=False)
    weights.setflags(write=False)
    return Grid(tuple(lengths), int(resolution), tuple(axes), points, weights)


def _mode_1d(k: int, x: np.ndarray, length: float, bc: str) -> np.ndarray:
    if bc == NEUMANN:
        if k == 0:
            return np.full_like(x, 1.0 / math.sqrt(length))
        return math.sqrt(2.0 / length) * np.cos(k * math.pi * x / length)
    out = math.sqrt(2.0 / length) * np.sin(k * math.pi * x / length)
    out[[0, -1]] = 0.0  # sin(k pi) is only ~1e-16 in floating point
    return out


@dataclass(frozen=True, eq=False)
class EigenBasis:
    domain: Domain
    grid: Grid
    indices: np.ndarray  # (N, dim) integer mode indices
    mu: np.ndarray       # (N,) Laplacian eigenvalues, nondecreasing
    values: np.ndarray   # (N, P) L2-normalized modes on the grid

    @property
    def n_modes(self) -> int:
        return self.mu.shape[0]

    @property
    def bc(self) -> str:
        return self.domain.bc

    def project(self, field_values) -> np.ndarray:
        return project(field_values, self)

    def synthesize(self, coeffs) -> np.ndarray:
        return synthesize(coeffs, self)

    def interior_mask(self) -> np.ndarray:
        """Grid points where positivity is meaningful (all points for Neumann)."""
        if self.bc == NEUMANN:
            return np.ones(self.grid.size, dtype=bool)
        return ~self.grid.boundary_mask()

    def gram(self) -> np.ndarray:
        return (self.values * self.grid.weights) @ self.values.T


def _select_modes(domain: Domain, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    start = 0 if domain.bc == NEUMANN else 1
    ks = np.arange(start, start + n_modes)
    if domain.dim == 1:
        idx = ks[:, None]
        mu = (ks * math.pi / domain.lengths[0]) ** 2
        return idx, mu
    lx, ly = domain.lengths
    kk, mm = np.meshgrid(ks, ks, indexing="ij")
    kk, mm = kk.ravel(), mm.ravel()
    mu = (kk * math.pi / lx) ** 2 + (mm * math.pi / ly) ** 2
    order = np.lexsort((mm, kk, mu))[:n_modes]
    return np.column_stack([kk[order], mm[order]]), mu[order]


def required_resolution(domain: Domain, n_modes: int) -> int:
    """Smallest admissible points-per-dimension for the first n_modes modes."""
    idx, _ = _select_modes(domain, n_modes)
    count = int(idx.max()) + (1 if domain.bc == NEUMANN else 0)
    return OVERSAMPLING * count


def build_basis(domain: Domain, n_modes: int = DEFAULT_MODES, resolution: int | None = None) -> EigenBasis:
    """Analytic eigenpairs of -Laplacian with the domain's boundary condition.

    ``resolution`` is points per dimension and must be at least four times
    the number of distinct 1-D modes used along each axis.
    """
    if not isinstance(domain, Domain):
        raise UnsupportedDomainError(f"expected Domain, got {type(domain).__name__}", "domain")
    if int(n_modes) != n_modes or n_modes < 1:
        raise ValidationError(f"n_modes must be a positive integer, got {n_modes!r}", "n_modes")
    n_modes = int(n_modes)
    indices, mu = _select_modes(domain, n_modes)
    need = required_resolution(domain, n_modes)
    if resolution is None:
        resolution = need
    if resolution < need:
        raise ResolutionTooCoarseError(
            f"resolution {resolution} below {OVERSAMPLING}x the per-dimension mode count ({need} required)",
            "resolution")
    grid = make_grid(domain.lengths, int(resolution))
    if domain.dim == 1:
        values = np.array([_mode_1d(int(k), grid.axes[0], domain.lengths[0], domain.bc)
                           for k in indices[:, 0]])
    else:
        cache_x, cache_y = {}, {}
        rows = []
        for k, m in indices:
            k, m = int(k), int(m)
            if k not in cache_x:
                cache_x[k] = _mode_1d(k, grid.axes[0], domain.lengths[0], domain.bc)
            if m not in cache_y:
                cache_y[m] = _mode_1d(m, grid.axes[1], domain.lengths[1], domain.bc)
            rows.append(np.outer(cache_x[k], cache_y[m]).ravel())
        values = np.array(rows)
    # the analytic normalization is already exact for the trapezoid rule;
    # renormalizing removes the last rounding differences
    norms = np.sqrt((values**2) @ grid.weights)
    values = values / norms[:, None]
    if domain.bc == NEUMANN:
        values[0] = 1.0 / math.sqrt(domain.measure)
    values.setflags(write=False)
    mu.setflags(write=False)
    indices.setflags(write=False)
    return EigenBasis(domain, grid, indices, mu, values)


def _check_grid_values(values: np.ndarray, grid: Grid, name: str) -> None:
    if values.shape[-1] != grid.size:
        raise GridMismatchError(
            f"expected {grid.size} grid values on the last axis, got shape {values.shape}", name)


def project(field_values, basis: EigenBasis) -> np.ndarray:
    """Spectral coefficients u_k = <u, phi_k> by quadrature; works row-wise."""
    values = np.asarray(field_values, dtype=float)
    _check_grid_values(values, basis.grid, "field_values")
    return (values * basis.grid.weights) @ basis.values.T


def synthesize(coeffs, basis: EigenBasis) -> np.ndarray:
    """Evaluate sum_k u_k phi_k on the grid; shorter vectors are zero-padded."""
    c = np.asarray(coeffs, dtype=float)
    n = c.shape[-1]
    if n > basis.n_modes:
        raise ValidationError(f"{n} coefficients for a {basis.n_modes}-mode basis", "coeffs")
    return c @ basis.values[:n]


def inner_product(f, g, grid: Grid) -> float:
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    _check_grid_values(f, grid, "f")
    _check_grid_values(g, grid, "g")
    if f.shape != g.shape:
        raise GridMismatchError(f"shape mismatch {f.shape} vs {g.shape}", "g")
    return float(np.sum(f * g * grid.weights))
