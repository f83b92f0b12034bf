"""Named reproducible experiments.

Each preset builds its instances, runs the library, writes CSV/JSON artifacts
to the output directory and returns a summary with a list of checks
(name, measured value, threshold, passed).  ``coopfrac preset --list`` shows
them all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.integrate
import scipy.optimize

from . import asymptotics as asy
from .basis import DIRICHLET, NEUMANN, Domain, build_basis, project, scale_domain, synthesize
from .eigen import (
    check_weak_max_principle,
    grad_lambda_d,
    principal_eigenpair,
    principal_krein_rutman,
    principal_symmetric,
    rayleigh_quotient,
)
from .emit import write_csv, write_json
from .epidemic import (
    EpidemicModel,
    Nonlinearity,
    classify_long_time,
    compute_R0,
    evolve,
    linear_principal,
    r0_fixed_point_check,
    steady_state,
)
from .errors import NonExistence, ValidationError
from .field import MatrixField, ScalarField
from .operator import assemble, default_beta, krein_rutman_radius

SWEEP_HEADER = ["param", "lambda_p", "target", "gap", "monotone_ok"]
TRAJECTORY_HEADER = ["t", "sup_u", "sup_v", "min_u", "min_v", "dist_to_steady"]
CONSTANT_A = ((2.0, -1.0), (-1.0, 2.0))
ASYMMETRIC_A = ((1.0, -2.0), (-1.0, 1.0))


# ---------------------------------------------------------------- instances

def unit_interval(bc: str = NEUMANN, length: float = math.pi) -> Domain:
    return Domain.interval(length, bc)


def constant_field(domain: Domain, m=CONSTANT_A) -> MatrixField:
    return MatrixField.constant(domain, m)


def cosine_field(domain: Domain, shift: float = 0.0) -> MatrixField:
    """[[2 + cos(pi x / L), -1], [-1, 2 + cos(pi x / L)]] + shift I."""
    diag = [[0, 2.0 + shift], [1, 1.0]]
    return MatrixField.from_pairs(domain, diag, [[0, -1.0]], [[0, -1.0]], diag)


def symmetric_instances(n_modes: int = 32) -> list[asy.Instance]:
    """Ten symmetric test instances covering both conditions, rectangles and mixed orders."""
    I_N, I_D = unit_interval(NEUMANN), unit_interval(DIRICHLET)
    R_N, R_D = Domain.rectangle(math.pi, 2.0, NEUMANN), Domain.rectangle(math.pi, math.pi, DIRICHLET)

    def wavy(domain):
        return MatrixField.from_pairs(domain, [[0, 1.0], [1, 1.0]], [[0, -1.0], [2, -0.5]],
                                      [[0, -1.0], [2, -0.5]], [[0, 3.0], [3, -1.0]])

    rect_field = MatrixField.from_pairs(R_N, [[0, 0, 2.0], [1, 1, 0.5]], [[0, 0, -1.0]], [[0, 0, -1.0]],
                                        [[0, 0, 1.5], [0, 1, 0.5]])
    return [
        asy.Instance(I_N, constant_field(I_N), n_modes=n_modes),
        asy.Instance(I_D, constant_field(I_D), n_modes=n_modes),
        asy.Instance(I_N, cosine_field(I_N), n_modes=n_modes),
        asy.Instance(I_D, cosine_field(I_D), n_modes=n_modes),
        asy.Instance(I_N, cosine_field(I_N), d=(0.1, 2.0), s=(0.3, 0.8), n_modes=n_modes),
        asy.Instance(I_N, cosine_field(I_N), d=(5.0, 5.0), s=(0.9, 0.9), n_modes=n_modes),
        asy.Instance(I_N, wavy(I_N), n_modes=n_modes),
        asy.Instance(I_D, wavy(I_D), d=(0.5, 2.0), s=(0.6, 0.4), n_modes=n_modes),
        asy.Instance(R_N, rect_field, n_modes=n_modes),
        asy.Instance(R_D, constant_field(R_D), n_modes=n_modes),
    ]


def endemic_model(domain: Domain | None = None) -> EpidemicModel:
    """a = b = 1, H(v) = 2 ln(1 + v), G(u) = u / (1 + u); basic reproduction number 2."""
    domain = domain or unit_interval()
    one = ScalarField.constant(domain, 1.0)
    return EpidemicModel(domain, one, one, Nonlinearity("log_saturating", 2.0),
                         Nonlinearity("michaelis_menten", 1.0, 1.0))


def extinction_model(domain: Domain | None = None) -> EpidemicModel:
    """a = b = 2, H(v) = ln(1 + v), G(u) = u / (1 + u); basic reproduction number 1/4."""
    domain = domain or unit_interval()
    two = ScalarField.constant(domain, 2.0)
    return EpidemicModel(domain, two, two, Nonlinearity("log_saturating", 1.0),
                         Nonlinearity("michaelis_menten", 1.0, 1.0))


def heterogeneous_model(domain: Domain | None = None) -> EpidemicModel:
    domain = domain or unit_interval()
    a = ScalarField.from_pairs(domain, [[0, 1.0], [1, 0.5]])
    b = ScalarField.from_pairs(domain, [[0, 1.0], [2, -0.3]])
    return EpidemicModel(domain, a, b, Nonlinearity("log_saturating", 2.0),
                         Nonlinearity("michaelis_menten", 1.5, 2.0))


def random_model(rng: np.random.Generator, domain: Domain | None = None) -> EpidemicModel:
    """Constant-plus-one-cosine-mode removal rates with random nonlinearities."""
    domain = domain or unit_interval()
    while True:
        fields = []
        for _ in range(2):
            c0 = rng.uniform(0.3, 3.0)
            fields.append(ScalarField.from_pairs(domain, [[0, c0], [int(rng.integers(1, 4)),
                                                                   rng.uniform(-0.9, 0.9) * c0]]))
        H = Nonlinearity(str(rng.choice(["log_saturating", "linear"])), rng.uniform(0.2, 3.0))
        gfam = str(rng.choice(["log_saturating", "michaelis_menten", "linear"]))
        G = Nonlinearity(gfam, rng.uniform(0.2, 3.0), rng.uniform(0.5, 3.0) if gfam == "michaelis_menten" else None)
        d = (rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0))
        s = (rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0))
        try:
            return EpidemicModel(domain, fields[0], fields[1], H, G, d, s)
        except ValidationError:
            continue


def scalar_steady_oracle(model: EpidemicModel) -> tuple[float, float]:
    """Positive root of the constant-coefficient steady equations by a bracketing root finder."""
    a, b = model.a.mean, model.b.mean

    def excess(u):
        return model.H(model.G(u) / b) - a * u

    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
    u = scipy.optimize.brentq(excess, 1e-9, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return float(u), float(model.G(u) / b)


# ---------------------------------------------------------------- checks

@dataclass
class Check:
    name: str
    value: object
    threshold: object
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold, "passed": bool(self.passed)}


def at_most(name, value, bound) -> Check:
    return Check(name, value, f"<= {bound!r}", bool(value <= bound))


def at_least(name, value, bound) -> Check:
    return Check(name, value, f">= {bound!r}", bool(value >= bound))


def holds(name, flag, value=None) -> Check:
    return Check(name, flag if value is None else value, "true", bool(flag))


def _summary(name: str, checks: list[Check], **extra) -> dict:
    return {"preset": name, "passed": all(c.passed for c in checks),
            "checks": [c.to_dict() for c in checks], **extra}


def _sweep_csv(out: Path, name: str, result: asy.SweepResult) -> None:
    write_csv(out / f"{name}.csv", SWEEP_HEADER, result.csv_rows())


# ---------------------------------------------------------------- presets

def preset_constant_oracle(out: Path, seed: int, modes: int | None) -> dict:
    n = modes or 64
    checks, values = [], {}
    for bc, expected in ((NEUMANN, 1.0), (DIRICHLET, 2.0)):
        dom = unit_interval(bc)
        pair = principal_eigenpair(assemble(build_basis(dom, n), (1, 1), (0.5, 0.5), constant_field(dom)))
        write_json(out / f"eigen_{bc}.json", pair.report())
        values[bc] = pair.lambda_p
        checks.append(at_most(f"{bc}: |lambda_p - {expected}|", abs(pair.lambda_p - expected), 1e-8))
    return _summary("constant-oracle", checks, values=values)


def preset_cross_algorithm(out: Path, seed: int, modes: int | None) -> dict:
    checks, rows = [], []
    for k, inst in enumerate(symmetric_instances(modes or 32)):
        basis = inst.basis()
        sym = principal_symmetric(assemble(basis, inst.d, inst.s, inst.A))
        kr = principal_krein_rutman(basis, inst.d, inst.s, inst.A)
        rows.append([k, sym.lambda_p, kr.lambda_p, abs(sym.lambda_p - kr.lambda_p)])
        checks.append(at_most(f"instance {k}: |symmetric - krein_rutman|", abs(sym.lambda_p - kr.lambda_p), 1e-6))
    write_csv(out / "cross_algorithm.csv", ["instance", "symmetric", "krein_rutman", "difference"], rows)
    inst = symmetric_instances(modes or 32)[2]
    basis = inst.basis()
    lam = principal_symmetric(assemble(basis, inst.d, inst.s, inst.A)).lambda_p
    radii = {}
    for label, shift in (("below", -1.0), ("at", 0.0), ("above", 1.0)):
        radii[label] = krein_rutman_radius(basis, inst.d, inst.s, inst.A, lam + shift,
                                           default_beta(lam + shift, inst.A, basis))[0]
    checks.append(at_most("|r(K at lambda_p) - 1|", abs(radii["at"] - 1.0), 1e-8))
    checks.append(holds("r(K at lambda_p - 1) < 1", radii["below"] < 1.0, radii["below"]))
    checks.append(holds("r(K at lambda_p + 1) > 1", radii["above"] > 1.0, radii["above"]))
    return _summary("cross-algorithm", checks, radii=radii)


def preset_variational(out: Path, seed: int, modes: int | None) -> dict:
    rng = np.random.default_rng(seed)
    checks = []
    for k, inst in enumerate(symmetric_instances(modes or 32)):
        op = assemble(inst.basis(), inst.d, inst.s, inst.A)
        lam = principal_symmetric(op).lambda_p
        worst = min(rayleigh_quotient(op, rng.normal(size=2 * op.n_modes)) - lam for _ in range(1000))
        checks.append(at_least(f"instance {k}: min Rayleigh - lambda_p", worst, -1e-10))
    return _summary("variational", checks)


def preset_gradient(out: Path, seed: int, modes: int | None) -> dict:
    n = modes or 64
    dom = unit_interval()
    basis = build_basis(dom, n)
    A = cosine_field(dom)
    d, s, h = (1.0, 1.0), (0.5, 0.5), 1e-4
    pair = principal_symmetric(assemble(basis, d, s, A))
    grad = grad_lambda_d(basis, d, s, A, pair)
    checks = []
    fd = []
    for i in range(2):
        up, dn = list(d), list(d)
        up[i] += h
        dn[i] -= h
        lam_up = principal_symmetric(assemble(basis, up, s, A)).lambda_p
        lam_dn = principal_symmetric(assemble(basis, dn, s, A)).lambda_p
        fd.append((lam_up - lam_dn) / (2 * h))
        checks.append(at_most(f"d{i + 1}: relative error vs central difference",
                              abs(grad[i] - fd[i]) / abs(fd[i]), 1e-4))
        checks.append(at_least(f"d{i + 1}: gradient", grad[i], 0.0))
    const = constant_field(dom)
    cgrad = grad_lambda_d(basis, d, s, const, principal_symmetric(assemble(basis, d, s, const)))
    checks.append(holds("constant coefficients give (0, 0)", cgrad == (0.0, 0.0), list(cgrad)))
    write_json(out / "gradient.json", {"analytic": list(grad), "central_difference": fd, "constant": list(cgrad)})
    return _summary("gradient", checks)


def preset_shape(out: Path, seed: int, modes: int | None) -> dict:
    dom = unit_interval()
    grid = [0.25, 0.5, 1.0, 2.0, 4.0]
    checks = []
    for label, A in (("cosine", cosine_field(dom)), ("constant", constant_field(dom))):
        rep = asy.check_shape_properties(asy.Instance(dom, A, n_modes=modes or 64), grid)
        write_json(out / f"shape_{label}.json", rep.to_dict())
        checks.append(holds(f"{label}: monotone", rep.monotone_ok, rep.worst_monotone))
        checks.append(holds(f"{label}: midpoint concave", rep.concave_ok, rep.worst_concave))
        checks.append(holds(f"{label}: strict where eigenfunction nonconstant", rep.strict_ok, rep.strict_pairs))
    return _summary("shape", checks)


def preset_d_limits(out: Path, seed: int, modes: int | None, explore: bool = False) -> dict:
    n = modes or 64
    dom = unit_interval()
    inst = asy.Instance(dom, cosine_field(dom), n_modes=n)
    small = asy.sweep_diffusion(asy.SweepSpec(inst, "d_joint", (1e-6, 1e-5, 1e-4, 1e-3, 1e-2), "min_principal"),
                                profiles=explore)
    large = asy.sweep_diffusion(asy.SweepSpec(inst, "d_joint", (1.0, 1e2, 1e4, 1e6), "perron_of_average"))
    ddom = unit_interval(DIRICHLET)
    dinst = asy.Instance(ddom, cosine_field(ddom), n_modes=n)
    diverge = asy.sweep_diffusion(asy.SweepSpec(dinst, "d_joint", (1.0, 1e2, 1e4, 1e6), "divergence"))
    _sweep_csv(out, "sweep_d_small", small)
    _sweep_csv(out, "sweep_d_large", large)
    _sweep_csv(out, "sweep_d_dirichlet", diverge)
    if explore:
        write_concentration(out / "concentration.csv", small)
    checks = [
        holds("small d: gap monotone over last 3 points", small.tail_monotone(3)),
        at_most("small d: gap at d = 1e-6", small.rows[0].gap, 5e-2),
        at_most("large d: gap at d = 1e6", large.rows[-1].gap, 1e-3),
        holds("large d: gap monotone over last 3 points", large.tail_monotone(3)),
        Check("Dirichlet d = 1e6: lambda_p exceeds stated lower bound", diverge.rows[-1].lambda_p,
              f">= {diverge.checks['stated_bound'][-1]!r}", diverge.checks["stated_bound_ok"]),
        holds("Dirichlet: lambda_p exceeds perturbative lower bound at every d",
              diverge.checks["perturbative_bound_ok"]),
    ]
    return _summary("d-limits", checks, dirichlet_bounds={k: diverge.checks[k] for k in
                                                          ("stated_bound", "perturbative_bound")})


def write_concentration(path: Path, result: asy.SweepResult) -> None:
    """Eigenfunction profiles per diffusion value on the coarsest grid (interval domains)."""
    if not result.profiles:
        return
    if result.profiles[0][1].shape[1] != 1:
        raise ValidationError("concentration profiles are written for intervals only", "domain.kind")
    base = min(result.profiles, key=lambda p: p[1].shape[0])
    x = base[1][:, 0]
    header = ["x"]
    columns = [x]
    for value, points, phi in result.profiles:
        header += [f"phi1_d{value!r}", f"phi2_d{value!r}"]
        columns += [np.interp(x, points[:, 0], phi[0]), np.interp(x, points[:, 0], phi[1])]
    write_csv(path, header, np.column_stack(columns).tolist())


def preset_s_limits(out: Path, seed: int, modes: int | None) -> dict:
    dom = unit_interval()
    inst = asy.Instance(dom, cosine_field(dom), n_modes=modes or 64)
    near1 = asy.sweep_order(asy.SweepSpec(inst, "s_joint", (0.5, 0.9, 0.99, 0.999), "classical_laplacian"))
    near0 = asy.sweep_order(asy.SweepSpec(inst, "s_joint", (0.001, 0.01, 0.1, 0.5), "limit_s0_operator"))
    _sweep_csv(out, "sweep_s_to_one", near1)
    _sweep_csv(out, "sweep_s_to_zero", near0)
    checks = [
        at_most("gap to s = 1 assembly at s = 0.999", near1.rows[-1].gap, 1e-2),
        holds("gap decreasing over s = 0.9, 0.99, 0.999", near1.tail_monotone(3)),
        holds("gap to A + I - P0 decreasing over s = 0.1, 0.01, 0.001", near0.tail_monotone(3)),
        holds("order-zero target independent of d", near0.checks["d_independence_ok"],
              near0.checks["d_independence"]),
    ]
    return _summary("s-limits", checks)


def preset_domain_scaling(out: Path, seed: int, modes: int | None) -> dict:
    n = modes or 64
    base = unit_interval(DIRICHLET)
    ls = (0.1, 0.5, 1.0, 2.0, 10.0)
    res = asy.sweep_domain_scale(np.array(CONSTANT_A), base, (1, 1), (0.5, 0.5), ls, n)
    _sweep_csv(out, "sweep_domain", res)
    checks = [at_most(f"l = {l!r}: |lambda_p - (1 + 1/l)|", abs(r.lambda_p - (1 + 1 / l)), 1e-8)
              for l, r in zip(ls, res.rows)]
    checks.append(holds("lower bound holds at every l", res.checks["lower_bound_ok"]))
    mu = build_basis(base, n).mu
    worst = 0.0
    for l in (0.1, 0.5, 2.0, 10.0):
        scaled = build_basis(scale_domain(base, l), n).mu
        worst = max(worst, float(np.max(np.abs(scaled - mu / l**2) / (mu / l**2))))
    checks.append(at_most("eigenvalue scaling law, relative", worst, 1e-12))
    return _summary("domain-scaling", checks)


def preset_domain_monotonicity(out: Path, seed: int, modes: int | None) -> dict:
    rep = asy.check_domain_monotonicity(np.array(CONSTANT_A), (1, 1), (0.5, 0.5), unit_interval(length=math.pi / 2),
                                        unit_interval(), modes or 64)
    write_json(out / "domain_mono.json", rep.to_dict())
    checks = [
        at_most("|Dirichlet (0, pi/2) - 3|", abs(rep.dirichlet_inner - 3.0), 1e-8),
        at_most("|Dirichlet (0, pi) - 2|", abs(rep.dirichlet_outer - 2.0), 1e-8),
        at_most("|Neumann (0, pi) - 1|", abs(rep.neumann_outer - 1.0), 1e-8),
        holds("chain of inequalities", rep.ok),
    ]
    return _summary("domain-monotonicity", checks)


def preset_max_principle(out: Path, seed: int, modes: int | None) -> dict:
    n = modes or 64
    dom = unit_interval()
    basis = build_basis(dom, n)
    A = cosine_field(dom)
    lam = principal_symmetric(assemble(basis, (1, 1), (0.5, 0.5), A)).lambda_p
    shifted = A.shifted(0.5 - lam)
    good = check_weak_max_principle(basis, (1, 1), (0.5, 0.5), shifted, trials=20, seed=seed)
    bad = check_weak_max_principle(basis, (1, 1), (0.5, 0.5), constant_field(dom, ASYMMETRIC_A))
    write_json(out / "maxprinciple.json", {"positive": good.to_dict(), "negative": bad.to_dict()})
    checks = [
        at_most("|lambda_p - 0.5| for the shifted instance", abs(good.lambda_p - 0.5), 1e-10),
        at_least("min solution over 20 nonnegative forcings", good.min_solution, -1e-10),
        holds("counterexample produced when lambda_p < 0", bad.status == "fails" and bad.counterexample is not None
              and bad.counterexample["u_min"] < 0 and bad.counterexample["Ku_min"] >= -1e-12, bad.lambda_p),
    ]
    return _summary("max-principle", checks)


def preset_r0(out: Path, seed: int, modes: int | None) -> dict:
    basis = build_basis(unit_interval(), modes or 32)
    model = endemic_model()
    r0 = compute_R0(model, basis)
    fp = r0_fixed_point_check(model, basis, r0)
    rng = np.random.default_rng(seed)
    rows, agree, skipped = [], 0, 0
    while len(rows) < 24:
        m = random_model(rng)
        lam = linear_principal(m, basis).lambda_p
        if abs(lam) <= 1e-6:
            skipped += 1
            continue
        rr = compute_R0(m, basis)
        ok = np.sign(rr - 1.0) == -np.sign(lam)
        agree += bool(ok)
        rows.append([len(rows), rr, lam, bool(ok)])
    write_csv(out / "threshold.csv", ["instance", "R0", "lambda_p", "consistent"], rows)
    write_json(out / "r0.json", {"R0": r0, "fixed_point": fp})
    checks = [
        at_most("|R0 - 2|", abs(r0 - 2.0), 1e-8),
        holds("sign(R0 - 1) = -sign(lambda_p) on random models", agree == len(rows), f"{agree}/{len(rows)}"),
        at_most("|s(B + F/R0)|", fp["residual"], 1e-6),
        holds("sign change at 0.9 and 1.1 R0", fp["sign_change_ok"]),
    ]
    return _summary("r0", checks, skipped_borderline=skipped)


def preset_steady(out: Path, seed: int, modes: int | None) -> dict:
    basis = build_basis(unit_interval(), modes or 32)
    model = endemic_model()
    ss = steady_state(model, basis)
    u, v = scalar_steady_oracle(model)
    err = float(max(np.max(np.abs(ss.values[0] - u)), np.max(np.abs(ss.values[1] - v))))
    try:
        steady_state(extinction_model(), basis)
        nonexistence = False
    except NonExistence:
        nonexistence = True
    write_json(out / "steady.json", {"summary": ss.summary(), "oracle": [u, v]})
    checks = [
        at_most("distance to scalar fixed-point oracle", err, 1e-8),
        at_most("sandwich gap", ss.gap, 1e-6),
        holds("sandwich iterates monotone", ss.monotone_ok),
        holds("R0 = 0.25 model reports nonexistence", nonexistence),
    ]
    return _summary("steady", checks)


def ode_oracle(model: EpidemicModel, u0: tuple[float, float], T: float) -> np.ndarray:
    """Spatially constant solution by an 8th-order Runge-Kutta integrator."""
    a, b = model.a.mean, model.b.mean

    def rhs(_, y):
        return [-a * y[0] + float(model.H(y[1])), -b * y[1] + float(model.G(y[0]))]

    sol = scipy.integrate.solve_ivp(rhs, (0.0, T), list(u0), method="DOP853", rtol=1e-12, atol=1e-14)
    return sol.y[:, -1]


def preset_dynamics(out: Path, seed: int, modes: int | None) -> dict:
    dom = unit_interval()
    basis = build_basis(dom, modes or 32)
    P = basis.grid.size
    model = endemic_model()
    ones = np.ones((2, P))
    checks = []

    traj = evolve(model, basis, 0.5 * ones * np.array([[1.0], [0.4]]), 1e-3, 5.0)
    exact = ode_oracle(model, (0.5, 0.2), 5.0)
    checks.append(at_most("constant data vs ODE oracle at T = 5", float(np.max(np.abs(traj.states[-1] - exact[:, None]))),
                          1e-4))

    ss = steady_state(model, basis)
    persist = evolve(model, basis, 0.1 * ones, 1e-3, 80.0)
    write_csv(out / "trajectory_persistence.csv", TRAJECTORY_HEADER, persist.csv_rows(ss.values))
    c_persist = classify_long_time(model, basis, persist, ss.values)
    checks.append(at_most("persistence: distance to steady state at T = 80", c_persist.distance, 1e-3))

    ext_model = extinction_model()
    extinct = evolve(ext_model, basis, 0.1 * ones, 1e-3, 20.0)
    write_csv(out / "trajectory_extinction.csv", TRAJECTORY_HEADER, extinct.csv_rows(np.zeros((2, P))))
    c_extinct = classify_long_time(ext_model, basis, extinct)
    checks.append(at_least("extinction: decay exponent / lambda_p", c_extinct.rate / c_extinct.lambda_p, 0.9))

    het = heterogeneous_model(dom)
    x = basis.grid.points[:, 0]
    low = np.array([0.05 + 0.04 * np.cos(x), 0.1 + 0.05 * np.cos(2 * x)])
    high = low + np.array([0.02 * (1 + np.cos(x)), 0.03 * np.ones(P)])
    t_low = evolve(het, basis, low, 1e-3, 5.0, store_every=10)
    t_high = evolve(het, basis, high, 1e-3, 5.0, store_every=10)
    checks.append(at_least("ordered data stay ordered (min of difference)",
                           float(np.min(t_high.states - t_low.states)), -1e-8))

    lows = [float(np.min(t.min_values)) for t in (traj, persist, extinct, t_low, t_high)]
    excess = [float(np.max(t.sup_norms - np.array(t.bounds)[None])) for t in (traj, persist, extinct, t_low, t_high)]
    checks.append(at_least("all states >= -1e-8", min(lows), -1e-8))
    checks.append(at_most("all states <= (M1, M2) + 1e-8", max(excess), 1e-8))

    half_p = classify_long_time(model, basis, evolve(model, basis, 0.1 * ones, 5e-4, 80.0), ss.values)
    half_e = classify_long_time(ext_model, basis, evolve(ext_model, basis, 0.1 * ones, 5e-4, 20.0))
    checks.append(holds("halving dt keeps classifications",
                        half_p.kind == c_persist.kind and half_e.kind == c_extinct.kind,
                        [c_persist.kind, half_p.kind, c_extinct.kind, half_e.kind]))
    return _summary("dynamics", checks, persistence=c_persist.to_dict(), extinction=c_extinct.to_dict())


def preset_basis_hygiene(out: Path, seed: int, modes: int | None) -> dict:
    rng = np.random.default_rng(seed)
    checks = []
    n = modes or 128
    for kind in ("interval", "rectangle"):
        for bc in (NEUMANN, DIRICHLET):
            dom = unit_interval(bc) if kind == "interval" else Domain.rectangle(math.pi, 2.0, bc)
            basis = build_basis(dom, n)
            err = float(np.max(np.abs(basis.gram() - np.eye(n))))
            checks.append(at_most(f"{kind} {bc}: max |Gram - I|", err, 1e-10 if kind == "interval" else 1e-8))
            c = rng.normal(size=n)
            trip = float(np.max(np.abs(project(synthesize(c, basis), basis) - c)))
            checks.append(at_most(f"{kind} {bc}: projection round trip", trip, 1e-11))
    return _summary("basis-hygiene", checks)


PRESETS: dict[str, tuple[str, Callable]] = {
    "constant-oracle": ("principal eigenvalue for constant coupling, both conditions", preset_constant_oracle),
    "cross-algorithm": ("dense symmetric solve vs Krein-Rutman bisection", preset_cross_algorithm),
    "variational": ("Rayleigh quotients bound the principal eigenvalue from above", preset_variational),
    "gradient": ("diffusion gradient formula vs finite differences", preset_gradient),
    "shape": ("monotonicity and concavity in the diffusion rates", preset_shape),
    "d-limits": ("small and large diffusion limits", preset_d_limits),
    "s-limits": ("fractional order limits s -> 1 and s -> 0", preset_s_limits),
    "domain-scaling": ("Dirichlet eigenvalue on scaled intervals", preset_domain_scaling),
    "domain-monotonicity": ("nested domains and Neumann <= Dirichlet", preset_domain_monotonicity),
    "max-principle": ("weak maximum principle and its failure", preset_max_principle),
    "r0": ("basic reproduction number and threshold relation", preset_r0),
    "steady": ("positive steady state by monotone iteration", preset_steady),
    "dynamics": ("time evolution, persistence and extinction", preset_dynamics),
    "basis-hygiene": ("orthonormality and projection round trips", preset_basis_hygiene),
}


def run_preset(name: str, out: Path, seed: int = 0, modes: int | None = None, explore: bool = False) -> dict:
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", "preset")
    out = Path(out)
    fn = PRESETS[name][1]
    summary = fn(out, seed, modes, explore=explore) if name == "d-limits" else fn(out, seed, modes)
    write_json(out / "summary.json", summary)
    return summary
