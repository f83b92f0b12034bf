"""Parameter sweeps of the principal eigenvalue and structural checks.

Sweeps move the diffusion rates, the fractional orders or the domain size
toward a limit and tabulate the distance ("gap") between the principal
eigenvalue and the limiting value.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .basis import DIRICHLET, NEUMANN, Domain, EigenBasis, build_basis, scale_domain
from .eigen import PrincipalEigenpair, principal_eigenpair
from .errors import NestingError, NonConstantFieldError, ValidationError
from .field import MatrixField, matrix_average, min_principal_over_domain, perron_2x2
from .operator import assemble, check_d, check_s, limit_s0_assemble

D_PARAMETERS = ("d_joint", "d1", "d2")
S_PARAMETERS = ("s_joint",)
TARGETS = ("min_principal", "perron_of_average", "classical_laplacian",
           "limit_s0_operator", "perron_constant", "divergence")
SMALL_D_FLOOR = 1e-6
SMALL_D_MODES = 256
SLACK = 1e-10
S0_PROBE = 1e-10


@lru_cache(maxsize=64)
def cached_basis(domain: Domain, n_modes: int, resolution: int | None = None) -> EigenBasis:
    return build_basis(domain, n_modes, resolution)


@dataclass(frozen=True)
class Instance:
    domain: Domain
    A: MatrixField
    d: tuple[float, float] = (1.0, 1.0)
    s: tuple[float, float] = (0.5, 0.5)
    n_modes: int = 64
    resolution: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "d", check_d(self.d))
        object.__setattr__(self, "s", check_s(self.s))

    def basis(self, n_modes: int | None = None, domain: Domain | None = None) -> EigenBasis:
        n = n_modes or self.n_modes
        res = self.resolution if (n_modes is None and domain is None) else None
        return cached_basis(domain or self.domain, n, res)

    def principal(self, d=None, s=None, n_modes: int | None = None) -> PrincipalEigenpair:
        basis = self.basis(n_modes)
        return principal_eigenpair(assemble(basis, d or self.d, s or self.s, self.A))


@dataclass(frozen=True)
class SweepSpec:
    instance: Instance
    parameter: str
    values: tuple[float, ...]
    target: str
    workers: int = 1

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if self.parameter not in D_PARAMETERS + S_PARAMETERS + ("domain_scale",):
            raise ValidationError(f"unknown sweep parameter {self.parameter!r}", "sweep.parameter")
        if self.target not in TARGETS:
            raise ValidationError(f"unknown sweep target {self.target!r}", "sweep.target")
        if len(vals) < 4:
            raise ValidationError("a sweep needs at least 4 values", "sweep.values")
        if any(not (math.isfinite(v) and v > 0) for v in vals):
            raise ValidationError("sweep values must be positive", "sweep.values")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValidationError("sweep values must be strictly increasing", "sweep.values")


@dataclass(frozen=True)
class SweepRow:
    param: float
    lambda_p: float
    target: float
    gap: float
    monotone_ok: bool


@dataclass
class SweepResult:
    parameter: str
    target_kind: str
    target_value: float
    rows: list[SweepRow]
    checks: dict = dc_field(default_factory=dict)
    profiles: list[tuple[float, np.ndarray, np.ndarray]] = dc_field(default_factory=list)

    @property
    def monotone_ok(self) -> bool:
        return all(r.monotone_ok for r in self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def tail_monotone(self, count: int = 3) -> bool:
        """|gap| nonincreasing over the last ``count`` points in the direction of approach."""
        gaps = np.abs(self.column("gap"))
        toward_small = self.checks.get("approach") == "decreasing"
        seq = gaps[:count][::-1] if toward_small else gaps[-count:]
        return bool(np.all(np.diff(seq) <= SLACK))

    def csv_rows(self) -> list[list]:
        return [[r.param, r.lambda_p, r.target, r.gap, r.monotone_ok] for r in self.rows]


def _map(fn, items, workers: int):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _flags(values: np.ndarray, approach: str, slack: float = SLACK) -> list[bool]:
    """Per-row flag: value at this row no larger than at its predecessor along the approach."""
    n = len(values)
    flags = [True] * n
    for i in range(n):
        j = i + 1 if approach == "decreasing" else i - 1
        if 0 <= j < n:
            flags[i] = bool(values[i] <= values[j] + slack)
    return flags


def _d_pair(spec: SweepSpec, v: float) -> tuple[float, float]:
    d1, d2 = spec.instance.d
    if spec.parameter == "d_joint":
        return (v, v)
    if spec.parameter == "d1":
        return (v, d2)
    return (d1, v)


def dirichlet_bounds(instance: Instance, basis: EigenBasis, d) -> dict:
    """Lower bounds for the Dirichlet principal eigenvalue at diffusion ``d``.

    ``stated`` is (d1^s1 + d2^s2) min(mu1^s1, mu1^s2) - H with H the largest
    pointwise spectral norm of A; ``perturbative`` is min_i d_i^s_i mu1^s_i - H,
    which follows from a Bauer-Fike perturbation argument.
    """
    (d1, d2), (s1, s2) = d, instance.s
    mu1 = float(basis.mu[0])
    H = instance.A.max_spectral_norm(basis.grid)
    stated = (d1**s1 + d2**s2) * min(mu1**s1, mu1**s2) - H
    perturbative = min((d1 * mu1) ** s1, (d2 * mu1) ** s2) - H
    return {"stated": stated, "perturbative": perturbative, "H": H}


def sweep_diffusion(spec: SweepSpec, profiles: bool = False) -> SweepResult:
    """Principal eigenvalue along a diffusion-rate sweep with its limiting value."""
    if spec.parameter not in D_PARAMETERS:
        raise ValidationError(f"diffusion sweep needs a d parameter, got {spec.parameter!r}", "sweep.parameter")
    inst = spec.instance
    basis = inst.basis()
    values = spec.values
    if spec.target == "min_principal":
        if values[0] < SMALL_D_FLOOR:
            raise ValidationError(f"small-diffusion sweeps stop at d = {SMALL_D_FLOOR}", "sweep.values")
        target, _ = min_principal_over_domain(inst.A, basis.grid)
        approach = "decreasing"
    elif spec.target == "perron_of_average":
        if inst.domain.bc != NEUMANN:
            raise ValidationError("the averaged-matrix limit holds for Neumann conditions", "sweep.target")
        target = perron_2x2(matrix_average(inst.A, basis.grid))[0]
        approach = "increasing"
    elif spec.target == "divergence":
        if inst.domain.bc != DIRICHLET:
            raise ValidationError("divergence sweeps need Dirichlet conditions", "sweep.target")
        target = math.inf
        approach = "increasing"
    else:
        raise ValidationError(f"target {spec.target!r} does not apply to diffusion sweeps", "sweep.target")

    small = set(values[:2]) if spec.target == "min_principal" else set()

    def point(v):
        n = max(inst.n_modes, SMALL_D_MODES) if v in small else None
        return v, inst.principal(d=_d_pair(spec, v), n_modes=n)

    results = _map(point, values, spec.workers)
    lam = np.array([p.lambda_p for _, p in results])
    checks: dict = {"approach": approach}
    if spec.target == "min_principal":
        gaps = lam - target
        flags = _flags(np.abs(gaps), approach)
    elif spec.target == "perron_of_average":
        gaps = target - lam
        flags = _flags(np.abs(gaps), approach)
    else:
        gaps = np.full(len(values), math.inf)
        flags = _flags(-lam, approach)  # lambda nondecreasing in d
        bounds = [dirichlet_bounds(inst, basis, _d_pair(spec, v)) for v in values]
        checks["stated_bound"] = [b["stated"] for b in bounds]
        checks["perturbative_bound"] = [b["perturbative"] for b in bounds]
        checks["stated_bound_ok"] = bool(lam[-1] >= bounds[-1]["stated"])
        checks["perturbative_bound_ok"] = all(l >= b["perturbative"] - SLACK for l, b in zip(lam, bounds))
    rows = [SweepRow(v, float(l), float(target), float(g), f)
            for v, l, g, f in zip(values, lam, gaps, flags)]
    out = SweepResult(spec.parameter, spec.target, float(target), rows, checks)
    if profiles:
        for v, p in results:
            b = basis if v not in small else inst.basis(max(inst.n_modes, SMALL_D_MODES))
            out.profiles.append((v, b.grid.points, np.asarray(p.phi1)))
    return out


def limit_s0_value(instance: Instance) -> float:
    basis = instance.basis()
    return principal_eigenpair(limit_s0_assemble(basis, instance.A)).lambda_p


def sweep_order(spec: SweepSpec) -> SweepResult:
    """Principal eigenvalue along a fractional-order sweep toward s = 1 or s = 0."""
    inst = spec.instance
    if inst.domain.bc != NEUMANN:
        raise ValidationError("order sweeps are defined for Neumann conditions", "domain.bc")
    if spec.parameter not in S_PARAMETERS:
        raise ValidationError(f"order sweep needs s_joint, got {spec.parameter!r}", "sweep.parameter")
    if any(v >= 1.0 for v in spec.values):
        raise ValidationError("orders must lie in (0, 1)", "sweep.values")
    checks: dict = {}
    if spec.target == "classical_laplacian":
        target = inst.principal(s=(1.0, 1.0)).lambda_p
        approach = "increasing"
    elif spec.target == "limit_s0_operator":
        target = limit_s0_value(inst)
        approach = "decreasing"
        d1, d2 = inst.d
        near = inst.principal(s=(S0_PROBE, S0_PROBE)).lambda_p
        near10 = inst.principal(d=(10 * d1, 10 * d2), s=(S0_PROBE, S0_PROBE)).lambda_p
        checks["d_independence"] = abs(near - near10)
        checks["d_independence_ok"] = bool(abs(near - near10) <= 1e-8)
    else:
        raise ValidationError(f"target {spec.target!r} does not apply to order sweeps", "sweep.target")
    checks["approach"] = approach
    results = _map(lambda v: inst.principal(s=(v, v)).lambda_p, spec.values, spec.workers)
    lam = np.array(results)
    gaps = np.abs(lam - target)
    flags = _flags(gaps, approach)
    rows = [SweepRow(v, float(l), float(target), float(g), f)
            for v, l, g, f in zip(spec.values, lam, gaps, flags)]
    return SweepResult(spec.parameter, spec.target, float(target), rows, checks)


def sweep_domain_scale(A: MatrixField | np.ndarray, base: Domain, d, s, l_values, n_modes: int = 64,
                       workers: int = 1) -> SweepResult:
    """Dirichlet principal eigenvalue on l * base for each l, against lambda_bar(A)."""
    if base.bc != DIRICHLET:
        raise ValidationError("domain-scaling sweeps need Dirichlet conditions", "domain.bc")
    if isinstance(A, MatrixField):
        if not A.is_constant:
            raise NonConstantFieldError("domain scaling needs a constant coefficient matrix", "A")
        m = A.constant_matrix()
    else:
        m = np.asarray(A, dtype=float)
    d, s = check_d(d), check_s(s)
    values = tuple(float(v) for v in l_values)
    SweepSpec(Instance(base, MatrixField.constant(base, m), d, s, n_modes), "domain_scale", values, "perron_constant")
    target = perron_2x2(m)[0]
    mu1 = float(cached_basis(base, n_modes).mu[0])

    def point(l):
        dom = scale_domain(base, l)
        inst = Instance(dom, MatrixField.constant(dom, m), d, s, n_modes)
        return inst.principal().lambda_p

    lam = np.array(_map(point, values, workers))
    bounds = [d[0] ** s[0] * l ** (-2 * s[0]) * mu1 ** s[0] + target for l in values]
    gaps = lam - target
    flags = _flags(lam, "increasing")  # lambda nonincreasing in l
    rows = [SweepRow(v, float(x), float(target), float(g), f) for v, x, g, f in zip(values, lam, gaps, flags)]
    checks = {
        "approach": "increasing",
        "lower_bound": bounds,
        "lower_bound_ok": all(x >= b - SLACK * max(1.0, abs(b)) for x, b in zip(lam, bounds)),
    }
    return SweepResult("domain_scale", "perron_constant", float(target), rows, checks)


@dataclass
class ShapeReport:
    d_values: list[float]
    lambda_grid: np.ndarray
    monotone_ok: bool
    concave_ok: bool
    strict_ok: bool
    worst_monotone: float
    worst_concave: float
    strict_pairs: int
    violations: list[str]

    @property
    def ok(self) -> bool:
        return self.monotone_ok and self.concave_ok and self.strict_ok

    def to_dict(self) -> dict:
        return {
            "d_values": list(self.d_values),
            "lambda_grid": self.lambda_grid.tolist(),
            "monotone_ok": self.monotone_ok,
            "concave_ok": self.concave_ok,
            "strict_ok": self.strict_ok,
            "worst_monotone": self.worst_monotone,
            "worst_concave": self.worst_concave,
            "strict_pairs": self.strict_pairs,
            "violations": self.violations,
        }


def check_shape_properties(instance: Instance, d_values, strict_margin: float = 1e-6,
                           workers: int = 1) -> ShapeReport:
    """Monotonicity and midpoint concavity of the principal eigenvalue in (d1, d2)."""
    if not instance.A.symmetric:
        raise ValidationError("shape checks need symmetric coupling", "A")
    dv = sorted(float(v) for v in d_values)
    n = len(dv)
    points = [(i, j) for i in range(n) for j in range(n)]
    pairs = _map(lambda ij: instance.principal(d=(dv[ij[0]], dv[ij[1]])), points, workers)
    lam = np.empty((n, n))
    spread = np.empty((n, n, 2))
    for (i, j), p in zip(points, pairs):
        lam[i, j] = p.lambda_p
        spread[i, j] = p.nonconstancy_margin
    violations = []
    worst_mono = 0.0
    strict_ok, strict_pairs = True, 0
    for axis in range(2):
        diffs = np.diff(lam, axis=axis)
        worst_mono = min(worst_mono, float(np.min(diffs)))
        for idx in zip(*np.nonzero(diffs < -SLACK)):
            violations.append(f"monotone axis {axis + 1} at {tuple(int(v) for v in idx)}")
        for i in range(n):
            for j in range(n - 1):
                a = (j, i) if axis == 0 else (i, j)
                b = (j + 1, i) if axis == 0 else (i, j + 1)
                if max(spread[a][axis], spread[b][axis]) > strict_margin:
                    strict_pairs += 1
                    if not lam[b] > lam[a]:
                        strict_ok = False
                        violations.append(f"strict axis {axis + 1} between {a} and {b}")
    segments = []
    for p in points:
        for q in points:
            if q <= p:
                continue
            di, dj = q[0] - p[0], q[1] - p[1]
            if di == 0 or dj == 0 or abs(di) == abs(dj):
                segments.append((p, q))
    mids = _map(lambda pq: instance.principal(
        d=(0.5 * (dv[pq[0][0]] + dv[pq[1][0]]), 0.5 * (dv[pq[0][1]] + dv[pq[1][1]]))).lambda_p,
        segments, workers)
    worst_conc = 0.0
    for (p, q), mid in zip(segments, mids):
        excess = mid - 0.5 * (lam[p] + lam[q])
        worst_conc = min(worst_conc, float(excess))
        if excess < -SLACK:
            violations.append(f"concavity between {p} and {q}")
    return ShapeReport(dv, lam, worst_mono >= -SLACK, worst_conc >= -SLACK, strict_ok,
                       worst_mono, worst_conc, strict_pairs, violations)


@dataclass
class DomainMonotonicityReport:
    dirichlet_inner: float
    dirichlet_outer: float
    neumann_outer: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "dirichlet_inner": self.dirichlet_inner,
            "dirichlet_outer": self.dirichlet_outer,
            "neumann_outer": self.neumann_outer,
            "ok": self.ok,
        }


def check_domain_monotonicity(A: MatrixField | np.ndarray, d, s, inner: Domain, outer: Domain,
                              n_modes: int = 64) -> DomainMonotonicityReport:
    """Dirichlet value on the inner domain >= Dirichlet on the outer >= Neumann on the outer."""
    if inner.kind != outer.kind or any(a > b for a, b in zip(inner.lengths, outer.lengths)):
        raise NestingError(f"{inner.lengths} is not contained in {outer.lengths}", "domains")
    if isinstance(A, MatrixField):
        if not A.is_constant:
            raise NonConstantFieldError("domain monotonicity is checked for constant matrices", "A")
        m = A.constant_matrix()
    else:
        m = np.asarray(A, dtype=float)

    def value(domain: Domain, bc: str) -> float:
        dom = domain.with_bc(bc)
        return Instance(dom, MatrixField.constant(dom, m), d, s, n_modes).principal().lambda_p

    di, do, no = value(inner, DIRICHLET), value(outer, DIRICHLET), value(outer, NEUMANN)
    return DomainMonotonicityReport(di, do, no, bool(di >= do - SLACK and do >= no - SLACK))

