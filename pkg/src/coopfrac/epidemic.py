"""Endemic reaction-diffusion model with fractional diffusion.

    u_t + (-d1 Laplacian)^s1 u = -a(x) u + H(v)
    v_t + (-d2 Laplacian)^s2 v = -b(x) v + G(u)

with Neumann conditions.  Provides the linearization at zero, the basic
reproduction number, sub/super-solutions, steady states by monotone iteration,
exponential-Euler time stepping and threshold classification.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.optimize

from .basis import NEUMANN, Domain, EigenBasis, make_grid
from .eigen import PrincipalEigenpair, principal_symmetric
from .errors import (
    ConvergenceError,
    InvariantBreach,
    NonExistence,
    NumericalError,
    SingularOperatorError,
    TrajectoryTooShort,
    ValidationError,
)
from .field import MatrixField, ScalarField
from .operator import assemble, check_d, check_s, fractional_symbol, galerkin_matrix

log = logging.getLogger(__name__)

FAMILIES = ("log_saturating", "michaelis_menten", "linear")
CLIP_LIMIT = 1e-8
BORDERLINE_R0 = 1e-6


@dataclass(frozen=True)
class Nonlinearity:
    """One of z -> p ln(1+z), p z / (1 + z/kappa), p z."""

    family: str
    p: float
    kappa: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}; expected one of {FAMILIES}", "family")
        if not (math.isfinite(self.p) and self.p > 0):
            raise ValidationError(f"p must be positive, got {self.p!r}", "p")
        if self.family == "michaelis_menten":
            kappa = 1.0 if self.kappa is None else float(self.kappa)
            if not (math.isfinite(kappa) and kappa > 0):
                raise ValidationError(f"kappa must be positive, got {self.kappa!r}", "kappa")
            object.__setattr__(self, "kappa", kappa)
        elif self.kappa is not None:
            raise ValidationError("kappa only applies to michaelis_menten", "kappa")
        object.__setattr__(self, "p", float(self.p))

    @classmethod
    def from_spec(cls, spec: dict) -> "Nonlinearity":
        unknown = set(spec) - {"family", "p", "kappa"}
        if unknown:
            raise ValidationError(f"unknown keys {sorted(unknown)}")
        if "family" not in spec:
            raise ValidationError("missing 'family'")
        return cls(spec["family"], float(spec.get("p", 1.0)), spec.get("kappa"))

    def to_spec(self) -> dict:
        out = {"family": self.family, "p": self.p}
        if self.kappa is not None:
            out["kappa"] = self.kappa
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.family == "log_saturating":
            return self.p * np.log1p(z)
        if self.family == "michaelis_menten":
            return self.p * z / (1.0 + z / self.kappa)
        return self.p * z

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        if self.family == "log_saturating":
            return self.p / (1.0 + z)
        if self.family == "michaelis_menten":
            return self.p / (1.0 + z / self.kappa) ** 2
        return np.full_like(z, self.p)

    @property
    def slope_at_zero(self) -> float:
        return self.p

    @property
    def unbounded(self) -> bool:
        return self.family != "michaelis_menten"

    @property
    def strictly_concave(self) -> bool:
        return self.family != "linear"


def check_nonlinearity(f: Nonlinearity, name: str, samples: int = 200) -> list[str]:
    """Lipschitz bound by the slope at 0 and strict decrease of f(z)/z on sampled points.

    Returns flags for properties that only hold weakly (linear family).
    """
    z = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, samples)])
    fz = f(z)
    dz = np.abs(z[:, None] - z[None, :])
    df = np.abs(fz[:, None] - fz[None, :])
    if np.any(df > f.slope_at_zero * dz * (1 + 1e-12) + 1e-300):
        raise ValidationError(f"{name} is not Lipschitz with constant {name}'(0)", name)
    ratio = fz[1:] / z[1:]
    steps = np.diff(ratio)
    flags = []
    if f.strictly_concave:
        if np.any(steps > 0):
            raise ValidationError(f"{name}(z)/z must be decreasing", name)
    else:
        flags.append(f"{name} is linear: {name}(z)/z is constant, strict concavity fails")
    return flags


def _fine_grid(lengths: tuple[float, ...], max_index: int):
    per_dim = 2049 if len(lengths) == 1 else 257
    return make_grid(tuple(lengths), max(per_dim, 16 * (max_index + 1) + 1))


@dataclass(frozen=True, eq=False)
class EpidemicModel:
    domain: Domain
    a: ScalarField
    b: ScalarField
    H: Nonlinearity
    G: Nonlinearity
    d: tuple[float, float] = (1.0, 1.0)
    s: tuple[float, float] = (0.5, 0.5)
    flags: tuple[str, ...] = dc_field(init=False)
    witness: float = dc_field(init=False)
    a_range: tuple[float, float] = dc_field(init=False)
    b_range: tuple[float, float] = dc_field(init=False)

    def __post_init__(self):
        if self.domain.bc != NEUMANN:
            raise ValidationError("the epidemic model uses Neumann conditions", "domain.bc")
        object.__setattr__(self, "d", check_d(self.d))
        object.__setattr__(self, "s", check_s(self.s))
        for name in ("a", "b"):
            if getattr(self, name).lengths != self.domain.lengths:
                raise ValidationError("field lives on a different domain", f"epidemic.{name}")
        grid = _fine_grid(self.domain.lengths, max(self.a.max_index, self.b.max_index))
        av, bv = self.a.evaluate(grid), self.b.evaluate(grid)
        for name, vals in (("a", av), ("b", bv)):
            if not np.min(vals) > 0:
                raise ValidationError(f"removal rate must be positive (condition (B1)); min {float(np.min(vals))!r}",
                                      f"epidemic.{name}")
        object.__setattr__(self, "a_range", (float(np.min(av)), float(np.max(av))))
        object.__setattr__(self, "b_range", (float(np.min(bv)), float(np.max(bv))))
        if not self.H.unbounded:
            raise ValidationError("H must be unbounded (condition (B4)); use log_saturating or linear",
                                  "epidemic.H")
        flags = check_nonlinearity(self.H, "H") + check_nonlinearity(self.G, "G")
        object.__setattr__(self, "flags", tuple(flags))
        object.__setattr__(self, "witness", self._find_witness())

    @property
    def a_min(self) -> float:
        return self.a_range[0]

    @property
    def a_max(self) -> float:
        return self.a_range[1]

    @property
    def b_min(self) -> float:
        return self.b_range[0]

    @property
    def b_max(self) -> float:
        return self.b_range[1]

    @property
    def h0(self) -> float:
        return self.H.slope_at_zero

    @property
    def g0(self) -> float:
        return self.G.slope_at_zero

    def h_function(self, z):
        """G(H(z)/a_min) - b_min z, negative at the (B3) witness."""
        return self.G(self.H(z) / self.a_min) - self.b_min * np.asarray(z, dtype=float)

    def _find_witness(self) -> float:
        z = 1.0
        for _ in range(200):
            if self.h_function(z) < 0:
                return z
            z *= 2.0
        raise ValidationError("no z with G(H(z)/a_min) < b_min z found (condition (B3))", "epidemic")

    def reaction(self, u, v, grid) -> tuple[np.ndarray, np.ndarray]:
        """(-a u + H(v), -b v + G(u)) pointwise on the grid."""
        a, b = self.a.evaluate(grid), self.b.evaluate(grid)
        return -a * u + self.H(v), -b * v + self.G(u)

    def lipschitz_constant(self) -> float:
        """Sup-norm Lipschitz constant of the reaction term."""
        return max(self.a_max + self.h0, self.b_max + self.g0)


def _require_basis(model: EpidemicModel, basis: EigenBasis) -> None:
    if basis.domain != model.domain:
        raise ValidationError(f"basis domain {basis.domain} differs from model domain {model.domain}", "basis")


@dataclass(frozen=True, eq=False)
class LinearizationData:
    A_lin: MatrixField
    D_entries: tuple[ScalarField, ScalarField, ScalarField, ScalarField]
    F_mat: np.ndarray
    h0: float
    g0: float


def linearize(model: EpidemicModel) -> LinearizationData:
    h0, g0 = model.h0, model.g0
    if not (h0 > 0 and g0 > 0):
        raise ValidationError("nonlinearities need positive slope at 0", "epidemic")
    lengths = model.domain.lengths
    A_lin = MatrixField(model.a, ScalarField.constant(lengths, -h0), ScalarField.constant(lengths, -g0), model.b)
    D = (-model.a, ScalarField.constant(lengths, h0), ScalarField.constant(lengths, 0.0), -model.b)
    F = np.array([[0.0, 0.0], [g0, 0.0]])
    return LinearizationData(A_lin, D, F, h0, g0)


def _symmetrized(model: EpidemicModel, mu: float = 1.0) -> tuple[MatrixField, float]:
    """Coupling [[a, -h0], [-g0/mu, b]] made symmetric by the similarity diag(1, t)."""
    h0, g = model.h0, model.g0 / mu
    lengths = model.domain.lengths
    off = ScalarField.constant(lengths, -math.sqrt(h0 * g))
    return MatrixField(model.a, off, off, model.b), math.sqrt(g / h0)


def linear_principal(model: EpidemicModel, basis: EigenBasis, mu: float = 1.0) -> PrincipalEigenpair:
    """Principal eigenpair of (-d Laplacian)^s + [[a, -H'(0)], [-G'(0)/mu, b]].

    The constant off-diagonal entries make the problem similar to a
    symmetric one; the eigenvector is mapped back and renormalized.
    """
    _require_basis(model, basis)
    sym, t = _symmetrized(model, mu)
    pair = principal_symmetric(assemble(basis, model.d, model.s, sym))
    coeffs = pair.coeffs * np.array([[1.0], [t]])
    coeffs = coeffs / np.linalg.norm(coeffs)
    phi = basis.synthesize(coeffs)
    lin = linearize(model).A_lin if mu == 1.0 else MatrixField(
        model.a, ScalarField.constant(model.domain.lengths, -model.h0),
        ScalarField.constant(model.domain.lengths, -model.g0 / mu), model.b)
    op = assemble(basis, model.d, model.s, lin)
    residual = float(np.max(np.abs(basis.synthesize(op.apply(coeffs) - pair.lambda_p * coeffs))))
    spread = tuple(float(np.max(phi[i]) - np.min(phi[i])) for i in range(2))
    return PrincipalEigenpair(pair.lambda_p, coeffs, phi, residual, float(np.min(phi)),
                              pair.spectral_gap, spread, "symmetrized_eigh")


def _b_blocks(model: EpidemicModel, basis: EigenBasis) -> tuple[np.ndarray, np.ndarray]:
    """S_i + G(a), S_i + G(b): minus the diagonal blocks of the discretized B."""
    grid = basis.grid
    m1 = np.diag(fractional_symbol(basis, model.d[0], model.s[0])) + galerkin_matrix(basis, model.a.evaluate(grid))
    m2 = np.diag(fractional_symbol(basis, model.d[1], model.s[1])) + galerkin_matrix(basis, model.b.evaluate(grid))
    return 0.5 * (m1 + m1.T), 0.5 * (m2 + m2.T)


def spectral_bound_B(model: EpidemicModel, basis: EigenBasis) -> float:
    """Largest eigenvalue of the block-triangular discretization of B."""
    m1, m2 = _b_blocks(model, basis)
    return float(max(-np.linalg.eigvalsh(m1)[0], -np.linalg.eigvalsh(m2)[0]))


def compute_R0(model: EpidemicModel, basis: EigenBasis, tol: float = 1e-14, max_iter: int = 10_000) -> float:
    """Spectral radius of the next-generation matrix -F B^{-1} by power iteration."""
    _require_basis(model, basis)
    sb = spectral_bound_B(model, basis)
    if not sb < 0:
        raise SingularOperatorError("B must have negative spectral bound", {"spectral_bound": sb})
    m1, m2 = _b_blocks(model, basis)
    n = basis.n_modes
    B = np.zeros((2 * n, 2 * n))
    B[:n, :n] = -m1
    B[:n, n:] = model.h0 * np.eye(n)
    B[n:, n:] = -m2
    lin = linearize(model)
    F = np.kron(lin.F_mat, np.eye(n))
    L = -F @ np.linalg.inv(B)
    x = basis.project(np.ones((2, basis.grid.size))).ravel()
    prev = math.nan
    for _ in range(max_iter):
        y = L @ x
        r = float(np.max(np.abs(basis.synthesize(y.reshape(2, -1)))))
        if r == 0.0:
            return 0.0
        x = y / r
        if abs(r - prev) <= tol * max(1.0, r):
            return r
        prev = r
    raise ConvergenceError("next-generation power iteration did not converge", {"last": prev})


def spectral_bound_shifted(model: EpidemicModel, basis: EigenBasis, mu: float) -> float:
    """s(B + F/mu), equal to minus the principal eigenvalue of the scaled linearization."""
    return -linear_principal(model, basis, mu).lambda_p


def r0_fixed_point_check(model: EpidemicModel, basis: EigenBasis, r0: float) -> dict:
    if not r0 > 0:
        raise ValidationError(f"r0 must be positive, got {r0!r}", "r0")
    s_at = spectral_bound_shifted(model, basis, r0)
    s_lo = spectral_bound_shifted(model, basis, 0.9 * r0)
    s_hi = spectral_bound_shifted(model, basis, 1.1 * r0)
    return {
        "residual": abs(s_at),
        "s_at_0.9": s_lo,
        "s_at_1.1": s_hi,
        "sign_change_ok": bool(s_lo > 0 > s_hi),
    }


@dataclass(frozen=True)
class SuperSolution:
    M1: float
    M2: float
    case: int
    K2: float | None
    worst_first: float    # max over grid of -a M1 + H(M2), must be <= 0
    worst_second: float   # max over grid of -b M2 + G(M1), must be <= 0

    @property
    def pair(self) -> tuple[float, float]:
        return (self.M1, self.M2)


def _largest_root(model: EpidemicModel) -> float:
    zbar = model.witness
    zs = np.geomspace(zbar * 1e-12, zbar, 4001)
    hv = model.h_function(zs)
    pos = np.nonzero(hv > 0)[0]
    if pos.size == 0:
        raise NumericalError("h has no positive values below the witness", {"witness": zbar})
    i = int(pos[-1])
    if i == zs.size - 1:
        raise NumericalError("h does not change sign before the witness", {"witness": zbar})
    return float(scipy.optimize.bisect(model.h_function, zs[i], zs[i + 1], xtol=1e-12, maxiter=500))


def super_solution(model: EpidemicModel, floor=(0.0, 0.0), grid=None) -> SuperSolution:
    """Constant pair (M1, M2) with -a M1 + H(M2) <= 0 and -b M2 + G(M1) <= 0 everywhere."""
    f1, f2 = (float(v) for v in floor)
    a_min, b_min = model.a_min, model.b_min
    h0, g0 = model.h0, model.g0
    if h0 * g0 > a_min * b_min:
        case = 1
        K2 = _largest_root(model)
        M2 = max(2.0 * K2, f2)
        M1 = float(model.H(M2)) / a_min
        while M1 < f1:
            M2 *= 2.0
            M1 = float(model.H(M2)) / a_min
    else:
        case, K2 = 2, None
        M2 = 1.0
        if h0 * g0 < a_min * b_min:
            M1 = math.sqrt((h0 / a_min) * (b_min / g0))
        else:
            M1 = h0 / a_min
        alpha = max(1.0, f1 / M1, f2 / M2)
        M1, M2 = alpha * M1, alpha * M2
    if grid is None:
        grid = _fine_grid(model.domain.lengths, max(model.a.max_index, model.b.max_index))
    first, second = model.reaction(np.full(grid.size, M1), np.full(grid.size, M2), grid)
    return SuperSolution(M1, M2, case, K2, float(np.max(first)), float(np.max(second)))


@dataclass(frozen=True, eq=False)
class SubSolution:
    epsilon: float
    values: np.ndarray   # (2, P)
    coeffs: np.ndarray   # (2, N)
    margin: float
    lambda_p: float


def _sub_margin(model: EpidemicModel, basis: EigenBasis, coeffs: np.ndarray) -> float:
    grid = basis.grid
    values = basis.synthesize(coeffs)
    frac = np.array([fractional_symbol(basis, model.d[i], model.s[i]) for i in range(2)])
    lhs = basis.synthesize(frac * coeffs)
    r1, r2 = model.reaction(values[0], values[1], grid)
    return float(min(np.min(r1 - lhs[0]), np.min(r2 - lhs[1])))


def sub_solution(model: EpidemicModel, basis: EigenBasis, epsilon_init: float = 1.0) -> SubSolution | None:
    """Small multiple of the linearized principal eigenfunction satisfying the sub-solution inequalities.

    Returns None when the linearized principal eigenvalue is nonnegative.
    """
    pair = linear_principal(model, basis)
    if pair.lambda_p >= 0:
        return None
    if pair.positivity_margin <= 0:
        raise NumericalError("linearized eigenfunction is not positive on the grid",
                             {"positivity_margin": pair.positivity_margin})
    eps = float(epsilon_init)
    while eps >= 1e-12:
        coeffs = eps * pair.coeffs
        margin = _sub_margin(model, basis, coeffs)
        if margin >= 0:
            return SubSolution(eps, basis.synthesize(coeffs), coeffs, margin, pair.lambda_p)
        eps *= 0.5
    raise ConvergenceError("no admissible epsilon above 1e-12", {"lambda_p": pair.lambda_p})


@dataclass(frozen=True, eq=False)
class SteadyState:
    values: np.ndarray   # (2, P)
    coeffs: np.ndarray
    residual: float
    gap: float
    iterations: int
    monotone_ok: bool
    lower: np.ndarray
    upper: np.ndarray
    history: list = dc_field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {
            "residual": self.residual,
            "gap": self.gap,
            "iterations": self.iterations,
            "monotone_ok": self.monotone_ok,
            "sup": [float(np.max(self.values[0])), float(np.max(self.values[1]))],
            "min": [float(np.min(self.values[0])), float(np.min(self.values[1]))],
        }


def steady_residual(model: EpidemicModel, basis: EigenBasis, coeffs: np.ndarray) -> float:
    """Sup norm of -(-d Laplacian)^s u + reaction(u) on the grid."""
    return float(np.max(np.abs(_steady_defect(model, basis, coeffs))))


def _steady_defect(model: EpidemicModel, basis: EigenBasis, coeffs: np.ndarray) -> np.ndarray:
    values = basis.synthesize(coeffs)
    frac = np.array([fractional_symbol(basis, model.d[i], model.s[i]) for i in range(2)])
    r1, r2 = model.reaction(values[0], values[1], basis.grid)
    return np.array([r1, r2]) - basis.synthesize(frac * coeffs)


def steady_state(model: EpidemicModel, basis: EigenBasis, tol: float = 1e-6, max_iter: int = 20_000,
                 step_tol: float = 1e-14, record: bool = False) -> SteadyState:
    """Positive steady state by monotone iteration from a sub- and a super-solution."""
    _require_basis(model, basis)
    r0 = compute_R0(model, basis)
    if r0 <= 1.0:
        raise NonExistence("no positive steady state: R0 <= 1", {"R0": r0})
    sub = sub_solution(model, basis)
    if sub is None:
        raise NumericalError("R0 > 1 but the linearized principal eigenvalue is nonnegative", {"R0": r0})
    sup = super_solution(model, grid=basis.grid)
    grid = basis.grid
    beta = max(model.a_max, model.b_max) + 1.0
    a, b = model.a.evaluate(grid), model.b.evaluate(grid)
    frac = np.array([fractional_symbol(basis, model.d[i], model.s[i]) for i in range(2)])
    denom = frac + beta

    def T(values):
        u, v = values
        rhs = np.array([(beta - a) * u + model.H(v), (beta - b) * v + model.G(u)])
        c = basis.project(rhs) / denom
        return c

    lower = sub.values
    upper = np.array([np.full(grid.size, sup.M1), np.full(grid.size, sup.M2)])
    monotone_ok = True
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        cl, cu = T(lower), T(upper)
        new_lower, new_upper = basis.synthesize(cl), basis.synthesize(cu)
        if (np.min(new_lower - lower) < -1e-10 or np.max(new_upper - upper) > 1e-10
                or np.min(new_upper - new_lower) < -1e-10):
            monotone_ok = False
        step = max(float(np.max(np.abs(new_lower - lower))), float(np.max(np.abs(new_upper - upper))))
        lower, upper = new_lower, new_upper
        if record:
            history.append((float(np.max(upper - lower)), step))
        if step <= step_tol * max(1.0, float(np.max(upper))):
            break
    else:
        raise ConvergenceError("monotone iteration did not settle", {"iterations": max_iter})
    gap = float(np.max(np.abs(upper - lower)))
    if gap > tol:
        raise NumericalError("upper and lower iterations have different limits", {"gap": gap, "tol": tol})
    mid = 0.5 * (lower + upper)
    coeffs = basis.project(mid)
    residual = float(np.max(np.abs(_steady_defect(model, basis, coeffs))))
    return SteadyState(basis.synthesize(coeffs), coeffs, residual, gap, it, monotone_ok, lower, upper, history)


@dataclass
class Trajectory:
    times: np.ndarray        # (n,)
    states: np.ndarray       # (n, 2, P)
    sup_norms: np.ndarray    # (n, 2)
    min_values: np.ndarray   # (n, 2)
    dt: float
    scheme: str
    bounds: tuple[float, float]
    max_clip: float = 0.0

    def distance_to(self, target: np.ndarray) -> np.ndarray:
        return np.max(np.abs(self.states - np.asarray(target)[None]), axis=(1, 2))

    def csv_rows(self, steady: np.ndarray | None = None) -> list[list]:
        dist = self.distance_to(steady) if steady is not None else np.full(self.times.size, math.nan)
        return [[float(t), float(s[0]), float(s[1]), float(m[0]), float(m[1]), float(x)]
                for t, s, m, x in zip(self.times, self.sup_norms, self.min_values, dist)]


def evolve(model: EpidemicModel, basis: EigenBasis, u0, dt: float, T: float, scheme: str = "etd1",
           store_every: int | None = None) -> Trajectory:
    """Exponential Euler: u <- S(dt) [u + dt (B + G)(u)] in spectral coefficients."""
    _require_basis(model, basis)
    if scheme != "etd1":
        raise ValidationError(f"unsupported scheme {scheme!r}", "scheme")
    if not (math.isfinite(dt) and dt > 0):
        raise ValidationError(f"dt must be positive, got {dt!r}", "dt")
    if not (math.isfinite(T) and T >= 0):
        raise ValidationError(f"T must be nonnegative, got {T!r}", "T")
    steps = int(round(T / dt))
    if abs(steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValidationError(f"T = {T!r} is not a multiple of dt = {dt!r}", "T")
    grid = basis.grid
    u = np.asarray(u0, dtype=float)
    if u.shape != (2, grid.size):
        raise ValidationError(f"initial data must have shape (2, {grid.size}), got {u.shape}", "u0")
    if np.min(u) < -CLIP_LIMIT:
        raise ValidationError("initial data must be nonnegative", "u0")
    sup = super_solution(model, floor=(float(np.max(u[0])), float(np.max(u[1]))), grid=grid)
    bound = np.array([sup.M1, sup.M2])[:, None]
    if store_every is None:
        store_every = max(1, int(round(max(dt, T / 1000.0) / dt)))
    frac = np.array([fractional_symbol(basis, model.d[i], model.s[i]) for i in range(2)])
    decay = np.exp(-dt * frac)
    a, b = model.a.evaluate(grid), model.b.evaluate(grid)
    c = basis.project(u)
    values = basis.synthesize(c)
    times, states = [], []
    max_clip = 0.0

    def store(t, vals):
        times.append(t)
        states.append(vals.copy())

    for n in range(steps + 1):
        low = float(np.min(values))
        if low < 0:
            if low < -CLIP_LIMIT:
                raise InvariantBreach("state became negative", {"t": n * dt, "min": low})
            max_clip = max(max_clip, -low)
            if low < -1e-12:
                log.debug("clipped negative state %.3e at t=%.6g", low, n * dt)
            values = np.maximum(values, 0.0)
            c = basis.project(values)
        excess = float(np.max(values - bound))
        if excess > CLIP_LIMIT:
            raise InvariantBreach("state exceeded the super-solution", {"t": n * dt, "excess": excess})
        if n % store_every == 0 or n == steps:
            store(n * dt, values)
        if n == steps:
            break
        u, v = values
        rhs = np.array([-a * u + model.H(v), -b * v + model.G(u)])
        c = decay * (c + dt * basis.project(rhs))
        values = basis.synthesize(c)
    states = np.array(states)
    return Trajectory(np.array(times), states, states.max(axis=2), states.min(axis=2), dt, scheme,
                      (sup.M1, sup.M2), max_clip)


@dataclass(frozen=True)
class Classification:
    kind: str                  # persistence | extinction | borderline
    R0: float
    lambda_p: float
    distance: float | None     # sup distance to the steady state at the final time
    rate: float | None         # decay exponent of the sup norm over the tail half
    envelope_ok: bool | None   # rate >= 0.9 lambda_p for extinction
    consistent: bool | None    # observed kind agrees with the R0 threshold

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def decay_rate(traj: Trajectory) -> float:
    """Least-squares decay exponent of the sup norm over the tail half of the trajectory."""
    t = traj.times
    mid = 0.5 * (t[0] + t[-1])
    if t[-1] - mid < 5.0:
        raise TrajectoryTooShort(f"tail half spans {t[-1] - mid!r} < 5 time units", "T")
    sup = traj.sup_norms.max(axis=1)
    keep = (t >= mid) & (sup > 0)
    if np.count_nonzero(keep) < 2:
        return math.inf
    slope = np.polyfit(t[keep], np.log(sup[keep]), 1)[0]
    return float(-slope)


def classify_long_time(model: EpidemicModel, basis: EigenBasis, traj: Trajectory,
                       u1: np.ndarray | None = None) -> Classification:
    """Classify a trajectory as persisting or going extinct from its observed behavior."""
    rate = decay_rate(traj)
    r0 = compute_R0(model, basis)
    lam = linear_principal(model, basis).lambda_p
    if abs(r0 - 1.0) <= BORDERLINE_R0:
        return Classification("borderline", r0, lam, None, rate, None, None)
    sup = traj.sup_norms.max(axis=1)
    peak = float(np.max(sup))
    extinct = peak == 0.0 or (rate > 1e-3 and sup[-1] <= 1e-3 * peak)
    if extinct:
        kind, distance = "extinction", None
        envelope = bool(rate >= 0.9 * lam)
    else:
        kind, envelope = "persistence", None
        if u1 is None and r0 > 1.0:
            u1 = steady_state(model, basis).values
        distance = float(traj.distance_to(u1)[-1]) if u1 is not None else None
    consistent = (kind == "persistence") == (r0 > 1.0)
    return Classification(kind, r0, lam, distance, rate, envelope, consistent)
