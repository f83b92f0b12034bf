import json
import math
from pathlib import Path

import numpy as np
import pytest

from coopfrac.cli import run
from coopfrac.config import ConfigError, load_config, parse_config, parse_length
from coopfrac.emit import dumps_json, emit, format_value, write_csv
from coopfrac.errors import ValidationError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _run(*argv) -> int:
    return run([str(a) for a in argv])


def test_parse_length():
    assert parse_length("pi", "x") == math.pi
    assert parse_length("pi/2", "x") == math.pi / 2
    assert parse_length("2*pi", "x") == 2 * math.pi
    assert parse_length(3, "x") == 3.0
    for bad in ("tau", -1, True, "0*pi"):
        with pytest.raises(ValidationError):
            parse_length(bad, "x")


def test_config_collects_all_problems():
    raw = {"domain": {"kind": "disk"}, "operator": {"d": [1, -1], "s": [0.5, 2]}, "bogus": {}}
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    paths = {p for p, _ in info.value.problems}
    assert {"domain.kind", "operator.d", "operator.s", "bogus"} <= paths


def test_config_overrides():
    cfg = load_config(CONFIGS / "constant_neumann.toml", {"modes": 16, "seed": 9})
    assert cfg.n_modes == 16 and cfg.seed == 9 and cfg.A.is_constant


def test_config_rejects_resolution():
    with pytest.raises(ConfigError, match="discretization"):
        parse_config({"domain": {}, "discretization": {"n_modes": 16, "resolution": 10}})


def test_all_example_configs_parse_or_fail_cleanly():
    for path in sorted(CONFIGS.glob("*.toml")):
        if path.stem == "invalid_coupling":
            with pytest.raises(ConfigError, match=r"\(A2\)"):
                load_config(path)
        else:
            load_config(path)


def test_format_and_json():
    assert format_value(0.1) == "0.1" and format_value(True) == "true" and format_value(np.int64(3)) == "3"
    assert format_value(float("inf")) == "inf"
    text = dumps_json({"a": float("nan"), "b": np.float64(1e-300), "c": [np.bool_(False)]})
    assert json.loads(text) == {"a": "nan", "b": 1e-300, "c": [False]}


def test_emit(tmp_path):
    emit([[1, 0.5]], "csv", tmp_path / "x.csv", ["a", "b"])
    assert (tmp_path / "x.csv").read_bytes() == b"a,b\n1,0.5\n"
    emit({"k": 1}, "json", tmp_path / "x.json")
    assert json.loads((tmp_path / "x.json").read_text()) == {"k": 1}
    with pytest.raises(ValueError):
        write_csv(tmp_path / "y.csv", ["a"], [[1, 2]])
    with pytest.raises(ValidationError):
        emit({"k": 1}, "json", tmp_path / "x.csv" / "inside.json")


def test_eigen_command(tmp_path):
    assert _run("eigen", "--config", CONFIGS / "constant_neumann.toml", "--out", tmp_path) == 0
    report = json.loads((tmp_path / "eigen.json").read_text())
    assert list(report) == ["lambda_p", "residual", "positivity_margin", "spectral_gap",
                            "nonconstancy_margin", "method"]
    assert abs(report["lambda_p"] - 1.0) <= 1e-8


def test_sweep_domain_command(tmp_path):
    assert _run("sweep-domain", "--config", CONFIGS / "sweep_domain.toml", "--out", tmp_path) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "param,lambda_p,target,gap,monotone_ok"
    rows = {float(r.split(",")[0]): float(r.split(",")[1]) for r in lines[1:]}
    for l, expected in ((1.0, 2.0), (2.0, 1.5), (10.0, 1.1)):
        assert abs(rows[l] - expected) <= 1e-8


def test_invalid_coupling_exit_1(tmp_path, capsys):
    assert _run("eigen", "--config", CONFIGS / "invalid_coupling.toml", "--out", tmp_path) == 1
    assert "condition (A2)" in capsys.readouterr().err


def test_missing_config_and_section(tmp_path):
    assert _run("eigen", "--config", tmp_path / "nope.toml", "--out", tmp_path) == 1
    assert _run("r0", "--config", CONFIGS / "constant_neumann.toml", "--out", tmp_path) == 1
    bad = tmp_path / "bad.toml"
    bad.write_text("[domain\n")
    assert _run("eigen", "--config", bad, "--out", tmp_path) == 1


def test_numerical_failure_exit_2(tmp_path):
    assert _run("steady", "--config", CONFIGS / "extinction.toml", "--out", tmp_path) == 2
    diag = json.loads((tmp_path / "diagnostics.json").read_text())
    assert diag["error"] == "NonExistence" and diag["diagnostics"]["R0"] == pytest.approx(0.25)


def test_epidemic_commands(tmp_path):
    assert _run("r0", "--config", CONFIGS / "endemic.toml", "--out", tmp_path) == 0
    assert json.loads((tmp_path / "r0.json").read_text())["R0"] == pytest.approx(2.0, abs=1e-8)
    assert _run("steady", "--config", CONFIGS / "endemic.toml", "--out", tmp_path) == 0
    assert (tmp_path / "steady.csv").read_text().startswith("x,u,v\n")
    assert _run("classify", "--config", CONFIGS / "extinction.toml", "--out", tmp_path) == 0
    result = json.loads((tmp_path / "classification.json").read_text())
    assert result["kind"] == "extinction" and result["envelope_ok"]
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,sup_u,sup_v,min_u,min_v,dist_to_steady"


def test_other_commands(tmp_path):
    for cmd, cfg, out in (("sweep-d", "cosine_small_d", "sweep.csv"), ("sweep-s", "cosine_order", "sweep.csv"),
                          ("shape-check", "cosine_small_d", "shape.json"),
                          ("domain-mono", "constant_neumann", "domain_mono.json"),
                          ("maxprinciple", "asymmetric", "maxprinciple.json"),
                          ("eigen", "rectangle", "eigen.json")):
        assert _run(cmd, "--config", CONFIGS / f"{cfg}.toml", "--out", tmp_path / cmd) == 0
        assert (tmp_path / cmd / out).exists()
    assert _run("sweep-d", "--config", CONFIGS / "cosine_small_d.toml", "--out", tmp_path / "c",
                "--explore-concentration") == 0
    assert (tmp_path / "c" / "concentration.csv").read_text().startswith("x,phi1_d1e-06,")


def test_byte_identical_reruns(tmp_path):
    for i in (1, 2):
        assert _run("sweep-d", "--config", CONFIGS / "cosine_small_d.toml", "--out", tmp_path / str(i),
                    "--workers", 3, "--explore-concentration") == 0
        assert _run("preset", "r0", "--out", tmp_path / f"p{i}", "--seed", 4) == 0
    for name in ("sweep.csv", "summary.json", "concentration.csv"):
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "2" / name).read_bytes()
    for name in ("summary.json", "threshold.csv", "r0.json"):
        assert (tmp_path / "p1" / name).read_bytes() == (tmp_path / "p2" / name).read_bytes()


def test_preset_listing(capsys, tmp_path):
    assert _run("preset", "--list") == 0
    assert "constant-oracle" in capsys.readouterr().out
    assert _run("preset", "no-such-preset", "--out", tmp_path) == 1


def test_bad_flags():
    with pytest.raises(SystemExit):
        _run("eigen", "--config", "x.toml", "--seed", "-1")
    with pytest.raises(SystemExit):
        _run("eigen")
