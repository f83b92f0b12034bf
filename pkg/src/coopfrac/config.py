"""TOML run configuration.

Every problem found while validating is collected with its field path and
reported together, before any computation starts.  See ``configs/`` for
examples and README.md for the schema.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .basis import DEFAULT_MODES, DIRICHLET, NEUMANN, Domain, build_basis
from .errors import ValidationError
from .field import MatrixField, ScalarField

_PI_EXPR = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")

SECTIONS = {"seed", "domain", "discretization", "operator", "coefficients", "epidemic", "sweep",
            "shape", "domain_mono", "maxprinciple", "steady", "evolve", "eigen"}


class ConfigError(ValidationError):
    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        text = "; ".join(f"{path}: {msg}" for path, msg in problems)
        super().__init__(f"invalid configuration: {text}")


def parse_length(value, path: str) -> float:
    """A positive number or a multiple of pi such as "pi", "pi/2", "2*pi"."""
    if isinstance(value, bool):
        raise ValidationError("expected a number", path)
    if isinstance(value, (int, float)):
        x = float(value)
    elif isinstance(value, str):
        m = _PI_EXPR.match(value)
        if not m:
            raise ValidationError(f"cannot parse length {value!r}", path)
        x = math.pi * float(m.group(1) or 1.0) / float(m.group(2) or 1.0)
    else:
        raise ValidationError(f"expected a number, got {type(value).__name__}", path)
    if not (math.isfinite(x) and x > 0):
        raise ValidationError(f"must be positive, got {value!r}", path)
    return x


@dataclass
class RunConfig:
    domain: Domain
    n_modes: int = DEFAULT_MODES
    resolution: int | None = None
    d: tuple[float, float] = (1.0, 1.0)
    s: tuple[float, float] = (0.5, 0.5)
    A: MatrixField | None = None
    epidemic: object | None = None
    seed: int = 0
    sections: dict = dc_field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def basis(self):
        return build_basis(self.domain, self.n_modes, self.resolution)


class _Collector:
    def __init__(self):
        self.problems: list[tuple[str, str]] = []

    def run(self, path: str, fn, *args, default=None):
        try:
            return fn(*args)
        except ValidationError as exc:
            msg = str(exc)
            if exc.path and msg.startswith(exc.path + ": "):
                msg = msg[len(exc.path) + 2:]
            self.problems.append((exc.path if exc.path and "." in exc.path else path, msg))
        except (TypeError, ValueError, KeyError) as exc:
            self.problems.append((path, str(exc)))
        return default

    def add(self, path: str, msg: str):
        self.problems.append((path, msg))


def _pair(value, path: str) -> tuple[float, float]:
    if not isinstance(value, list) or len(value) != 2:
        raise ValidationError("expected a list of two numbers", path)
    return float(value[0]), float(value[1])


def _positive_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValidationError(f"expected a positive integer, got {value!r}", path)
    return value


def _float_list(value, path: str, min_len: int = 1) -> list[float]:
    if not isinstance(value, list) or len(value) < min_len:
        raise ValidationError(f"expected a list of at least {min_len} numbers", path)
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"expected numbers, got {v!r}", path)
        out.append(float(v))
    return out


def parse_domain(raw: dict, col: _Collector) -> Domain | None:
    kind = raw.get("kind", "interval")
    bc = str(raw.get("bc", NEUMANN)).lower()
    if bc not in (NEUMANN, DIRICHLET):
        col.add("domain.bc", f"expected 'neumann' or 'dirichlet', got {bc!r}")
        return None
    if kind == "interval":
        length = col.run("domain.length", parse_length, raw.get("length", "pi"), "domain.length")
        return None if length is None else Domain.interval(length, bc)
    if kind == "rectangle":
        lx = col.run("domain.lx", parse_length, raw.get("lx"), "domain.lx")
        ly = col.run("domain.ly", parse_length, raw.get("ly"), "domain.ly")
        return None if lx is None or ly is None else Domain.rectangle(lx, ly, bc)
    col.add("domain.kind", f"expected 'interval' or 'rectangle', got {kind!r}")
    return None


def parse_config(raw: dict, overrides: dict | None = None) -> RunConfig:
    from .epidemic import EpidemicModel, Nonlinearity
    from .operator import check_d, check_s

    overrides = overrides or {}
    col = _Collector()
    for key in raw:
        if key not in SECTIONS:
            col.add(key, "unknown section")
    domain = parse_domain(raw.get("domain", {}), col)
    disc = raw.get("discretization", {})
    n_modes = overrides.get("modes") or col.run(
        "discretization.n_modes", _positive_int, disc.get("n_modes", DEFAULT_MODES), "discretization.n_modes",
        default=DEFAULT_MODES)
    resolution = None
    if "resolution" in disc and not overrides.get("modes"):
        resolution = col.run("discretization.resolution", _positive_int, disc["resolution"],
                             "discretization.resolution")
    if domain is not None:
        col.run("discretization", build_basis, domain, n_modes, resolution)
    op = raw.get("operator", {})
    d = col.run("operator.d", lambda: check_d(_pair(op.get("d", [1.0, 1.0]), "operator.d")), default=(1.0, 1.0))
    s = col.run("operator.s", lambda: check_s(_pair(op.get("s", [0.5, 0.5]), "operator.s")), default=(0.5, 0.5))

    A = None
    coeffs = raw.get("coefficients")
    if coeffs is not None and domain is not None:
        fields = {}
        for name in ("a11", "a12", "a21", "a22"):
            if name not in coeffs:
                col.add(f"coefficients.{name}", "missing entry")
                continue
            f = col.run(f"coefficients.{name}", ScalarField.from_pairs, domain, coeffs[name])
            if f is not None:
                fields[name] = f
        if len(fields) == 4:
            A = col.run("coefficients", MatrixField, fields["a11"], fields["a12"], fields["a21"], fields["a22"])

    model = None
    epi = raw.get("epidemic")
    if epi is not None and domain is not None:
        parts = {}
        for name in ("a", "b"):
            f = col.run(f"epidemic.{name}", ScalarField.from_pairs, domain, epi.get(name, [[0, 1.0]]))
            if f is not None:
                parts[name] = f
        for name in ("H", "G"):
            if name not in epi or not isinstance(epi[name], dict):
                col.add(f"epidemic.{name}", "expected a table with 'family' and 'p'")
                continue
            f = col.run(f"epidemic.{name}", Nonlinearity.from_spec, epi[name])
            if f is not None:
                parts[name] = f
        if len(parts) == 4:
            model = col.run("epidemic", EpidemicModel, domain, parts["a"], parts["b"], parts["H"], parts["G"],
                            d, s)

    sections = {k: raw.get(k, {}) for k in ("sweep", "shape", "domain_mono", "maxprinciple", "steady",
                                             "evolve", "eigen")}
    for name, sec in sections.items():
        if not isinstance(sec, dict):
            col.add(name, "expected a table")
    sweep = sections["sweep"]
    if "values" in sweep:
        col.run("sweep.values", _float_list, sweep["values"], "sweep.values", 4)
    if "d_values" in sections["shape"]:
        col.run("shape.d_values", _float_list, sections["shape"]["d_values"], "shape.d_values", 2)
    ev = sections["evolve"]
    for key in ("dt", "T"):
        if key in ev and (isinstance(ev[key], bool) or not isinstance(ev[key], (int, float))):
            col.add(f"evolve.{key}", "expected a number")
    seed = overrides.get("seed")
    if seed is None:
        seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        col.add("seed", f"expected a nonnegative integer, got {seed!r}")
        seed = 0
    if col.problems:
        raise ConfigError(col.problems)
    return RunConfig(domain, n_modes, resolution, d, s, A, model, seed, sections)


def load_config(path, overrides: dict | None = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc.strerror}", "config") from None
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"malformed TOML: {exc}", "config") from None
    return parse_config(raw, overrides)
