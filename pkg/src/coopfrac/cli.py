"""Command-line interface: ``coopfrac <command> --config run.toml --out dir``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure (a
``diagnostics.json`` is written to the output directory).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from .basis import Domain
from .config import RunConfig, load_config, parse_length
from .eigen import check_weak_max_principle, principal_eigenpair, principal_krein_rutman, principal_symmetric
from .emit import write_csv, write_json
from .epidemic import (
    classify_long_time,
    compute_R0,
    evolve,
    linear_principal,
    r0_fixed_point_check,
    steady_state,
)
from .errors import NumericalError, ValidationError
from .operator import assemble
from .presets import PRESETS, SWEEP_HEADER, TRAJECTORY_HEADER, run_preset, write_concentration

log = logging.getLogger("coopfrac")

CONFIG_COMMANDS = ("eigen", "sweep-d", "sweep-s", "sweep-domain", "shape-check", "domain-mono",
                   "maxprinciple", "r0", "steady", "evolve", "classify")


def _need(value, what: str, path: str):
    if value is None:
        raise ValidationError(f"this command needs {what}", path)
    return value


def _sweep_values(cfg: RunConfig) -> tuple[float, ...]:
    return tuple(_need(cfg.section("sweep").get("values"), "a [sweep] values list", "sweep.values"))


def _instance(cfg: RunConfig) -> asy.Instance:
    A = _need(cfg.A, "a [coefficients] table", "coefficients")
    return asy.Instance(cfg.domain, A, cfg.d, cfg.s, cfg.n_modes, cfg.resolution)


def _grid_header(cfg: RunConfig) -> list[str]:
    return ["x"] if cfg.domain.dim == 1 else ["x", "y"]


def cmd_eigen(cfg: RunConfig, out: Path, args) -> dict:
    """Principal eigenpair and its report."""
    basis = cfg.basis()
    A = _need(cfg.A, "a [coefficients] table", "coefficients")
    method = cfg.section("eigen").get("method", "auto")
    if method == "auto":
        pair = principal_eigenpair(assemble(basis, cfg.d, cfg.s, A))
    elif method == "symmetric":
        op = assemble(basis, cfg.d, cfg.s, A)
        if not op.symmetric:
            raise ValidationError("the symmetric solver needs a12 = a21", "eigen.method")
        pair = principal_symmetric(op)
    elif method == "krein_rutman":
        pair = principal_krein_rutman(basis, cfg.d, cfg.s, A)
    else:
        raise ValidationError(f"expected auto, symmetric or krein_rutman, got {method!r}", "eigen.method")
    report = pair.report()
    write_json(out / "eigen.json", report)
    rows = np.column_stack([basis.grid.points, pair.phi1.T]).tolist()
    write_csv(out / "phi1.csv", _grid_header(cfg) + ["phi1_1", "phi1_2"], rows)
    return report


def _write_sweep(out: Path, res: asy.SweepResult, extra: dict | None = None) -> dict:
    write_csv(out / "sweep.csv", SWEEP_HEADER, res.csv_rows())
    summary = {"parameter": res.parameter, "target": res.target_kind, "target_value": res.target_value,
               "monotone_ok": res.monotone_ok, "tail_monotone_ok": res.tail_monotone(3),
               "checks": res.checks, **(extra or {})}
    write_json(out / "summary.json", summary)
    return summary


def cmd_sweep_d(cfg: RunConfig, out: Path, args) -> dict:
    """Sweep the diffusion rates toward a limit."""
    sec = cfg.section("sweep")
    if args.explore_concentration and cfg.domain.dim != 1:
        raise ValidationError("concentration profiles are written for intervals only", "domain.kind")
    spec = asy.SweepSpec(_instance(cfg), sec.get("parameter", "d_joint"), _sweep_values(cfg),
                         sec.get("target", "min_principal"), args.workers or sec.get("workers", 1))
    res = asy.sweep_diffusion(spec, profiles=args.explore_concentration)
    if args.explore_concentration:
        write_concentration(out / "concentration.csv", res)
    return _write_sweep(out, res)


def cmd_sweep_s(cfg: RunConfig, out: Path, args) -> dict:
    """Sweep the fractional order toward 1 or 0."""
    sec = cfg.section("sweep")
    spec = asy.SweepSpec(_instance(cfg), sec.get("parameter", "s_joint"), _sweep_values(cfg),
                         sec.get("target", "classical_laplacian"), args.workers or sec.get("workers", 1))
    return _write_sweep(out, asy.sweep_order(spec))


def cmd_sweep_domain(cfg: RunConfig, out: Path, args) -> dict:
    """Dirichlet eigenvalue on scaled domains."""
    A = _need(cfg.A, "a [coefficients] table", "coefficients")
    res = asy.sweep_domain_scale(A, cfg.domain, cfg.d, cfg.s, _sweep_values(cfg), cfg.n_modes,
                                 args.workers or cfg.section("sweep").get("workers", 1))
    return _write_sweep(out, res)


def cmd_shape_check(cfg: RunConfig, out: Path, args) -> dict:
    """Monotonicity and concavity in (d1, d2)."""
    d_values = cfg.section("shape").get("d_values", [0.25, 0.5, 1.0, 2.0, 4.0])
    rep = asy.check_shape_properties(_instance(cfg), d_values, workers=args.workers or 1)
    result = rep.to_dict()
    write_json(out / "shape.json", result)
    return result


def cmd_domain_mono(cfg: RunConfig, out: Path, args) -> dict:
    """Nested-domain comparison."""
    A = _need(cfg.A, "a [coefficients] table", "coefficients")
    sec = cfg.section("domain_mono")
    outer = cfg.domain
    if outer.dim == 1:
        inner = Domain.interval(parse_length(_need(sec.get("inner_length"), "domain_mono.inner_length",
                                                   "domain_mono.inner_length"), "domain_mono.inner_length"))
    else:
        inner = Domain.rectangle(parse_length(sec.get("inner_lx"), "domain_mono.inner_lx"),
                                 parse_length(sec.get("inner_ly"), "domain_mono.inner_ly"))
    rep = asy.check_domain_monotonicity(A, cfg.d, cfg.s, inner, outer, cfg.n_modes)
    result = rep.to_dict()
    write_json(out / "domain_mono.json", result)
    return result


def cmd_maxprinciple(cfg: RunConfig, out: Path, args) -> dict:
    """Weak maximum principle check."""
    A = _need(cfg.A, "a [coefficients] table", "coefficients")
    trials = int(cfg.section("maxprinciple").get("trials", 20))
    rep = check_weak_max_principle(cfg.basis(), cfg.d, cfg.s, A, trials=trials, seed=cfg.seed)
    result = rep.to_dict()
    write_json(out / "maxprinciple.json", result)
    return result


def _model(cfg: RunConfig):
    return _need(cfg.epidemic, "an [epidemic] table", "epidemic")


def cmd_r0(cfg: RunConfig, out: Path, args) -> dict:
    """Basic reproduction number."""
    model, basis = _model(cfg), cfg.basis()
    r0 = compute_R0(model, basis)
    result = {"R0": r0, "lambda_p": linear_principal(model, basis).lambda_p,
              "fixed_point": r0_fixed_point_check(model, basis, r0)}
    write_json(out / "r0.json", result)
    return result


def cmd_steady(cfg: RunConfig, out: Path, args) -> dict:
    """Positive steady state."""
    model, basis = _model(cfg), cfg.basis()
    tol = float(cfg.section("steady").get("tol", 1e-6))
    ss = steady_state(model, basis, tol=tol)
    result = {"R0": compute_R0(model, basis), **ss.summary()}
    write_json(out / "steady.json", result)
    rows = np.column_stack([basis.grid.points, ss.values.T]).tolist()
    write_csv(out / "steady.csv", _grid_header(cfg) + ["u", "v"], rows)
    return result


def _trajectory(cfg: RunConfig):
    model, basis = _model(cfg), cfg.basis()
    sec = cfg.section("evolve")
    u0 = sec.get("u0", [0.1, 0.1])
    if not (isinstance(u0, list) and len(u0) == 2):
        raise ValidationError("expected a pair of constants", "evolve.u0")
    init = np.array([float(u0[0]), float(u0[1])])[:, None] * np.ones((2, basis.grid.size))
    every = sec.get("store_every")
    traj = evolve(model, basis, init, float(sec.get("dt", 1e-3)), float(sec.get("T", 10.0)),
                  store_every=None if every is None else int(every))
    r0 = compute_R0(model, basis)
    steady = steady_state(model, basis).values if r0 > 1.0 else np.zeros((2, basis.grid.size))
    return model, basis, traj, r0, steady


def cmd_evolve(cfg: RunConfig, out: Path, args) -> dict:
    """Time evolution from constant data."""
    _, _, traj, r0, steady = _trajectory(cfg)
    write_csv(out / "trajectory.csv", TRAJECTORY_HEADER, traj.csv_rows(steady))
    result = {"R0": r0, "steps_stored": int(traj.times.size), "bounds": list(traj.bounds),
              "max_clip": traj.max_clip, "final_distance": float(traj.distance_to(steady)[-1])}
    write_json(out / "evolve.json", result)
    return result


def cmd_classify(cfg: RunConfig, out: Path, args) -> dict:
    """Evolve and classify the long-time behavior."""
    model, basis, traj, r0, steady = _trajectory(cfg)
    write_csv(out / "trajectory.csv", TRAJECTORY_HEADER, traj.csv_rows(steady))
    result = classify_long_time(model, basis, traj, steady if r0 > 1.0 else None).to_dict()
    write_json(out / "classification.json", result)
    return result


COMMANDS = {
    "eigen": cmd_eigen,
    "sweep-d": cmd_sweep_d,
    "sweep-s": cmd_sweep_s,
    "sweep-domain": cmd_sweep_domain,
    "shape-check": cmd_shape_check,
    "domain-mono": cmd_domain_mono,
    "maxprinciple": cmd_maxprinciple,
    "r0": cmd_r0,
    "steady": cmd_steady,
    "evolve": cmd_evolve,
    "classify": cmd_classify,
}


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    common.add_argument("--seed", type=_seed, default=None, help="seed for randomized checks")
    common.add_argument("--modes", type=_positive, default=None, help="override the number of modes")
    common.add_argument("--workers", type=_positive, default=None, help="threads for sweep points")
    common.add_argument("--explore-concentration", action="store_true",
                        help="write eigenfunction profiles of diffusion sweeps to concentration.csv")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="coopfrac", description="Principal eigenvalues of cooperative "
                                     "fractional systems and an endemic reaction-diffusion model.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in CONFIG_COMMANDS:
        p = sub.add_parser(name, parents=[common], help=(COMMANDS[name].__doc__ or name))
        p.add_argument("--config", type=Path, required=True, help="TOML run configuration")
    p = sub.add_parser("preset", parents=[common], help="run a named reproducible experiment")
    p.add_argument("name", nargs="?", help="preset name")
    p.add_argument("--list", action="store_true", help="list presets and exit")
    return parser


def _fail(out: Path, exc: NumericalError) -> None:
    diag = {"error": type(exc).__name__, "message": exc.args[0] if exc.args else str(exc),
            "diagnostics": exc.diagnostics}
    try:
        write_json(out / "diagnostics.json", diag)
    except ValidationError:
        pass


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out: Path = args.out
    try:
        if args.command == "preset":
            if args.list or not args.name:
                for name, (desc, _) in PRESETS.items():
                    print(f"{name:22s} {desc}")
                return 0
            summary = run_preset(args.name, out, 0 if args.seed is None else args.seed, args.modes,
                                 args.explore_concentration)
            for check in summary["checks"]:
                print(f"{'PASS' if check['passed'] else 'FAIL'} {check['name']}: {check['value']!r}")
            return 0
        overrides = {"modes": args.modes, "seed": args.seed}
        cfg = load_config(args.config, overrides)
        result = COMMANDS[args.command](cfg, out, args)
        log.info("%s finished: %s", args.command, result)
        print(f"{args.command}: wrote results to {out}")
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        _fail(out, exc)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
