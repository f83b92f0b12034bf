import math

import numpy as np
import pytest

from coopfrac import DIRICHLET, NEUMANN, Domain, MatrixField
from coopfrac import asymptotics as asy
from coopfrac.errors import NestingError, NonConstantFieldError, ValidationError
from coopfrac.presets import cosine_field

from . import oracles

CONST = [[2.0, -1.0], [-1.0, 2.0]]


@pytest.fixture(scope="module")
def cos_inst():
    dom = Domain.interval(math.pi)
    return asy.Instance(dom, cosine_field(dom))


def test_sweep_spec_validation(cos_inst):
    with pytest.raises(ValidationError):
        asy.SweepSpec(cos_inst, "d_joint", (1, 2, 3), "min_principal")
    with pytest.raises(ValidationError):
        asy.SweepSpec(cos_inst, "d_joint", (1, 3, 2, 4), "min_principal")
    with pytest.raises(ValidationError):
        asy.SweepSpec(cos_inst, "d_joint", (-1, 1, 2, 3), "min_principal")
    with pytest.raises(ValidationError):
        asy.SweepSpec(cos_inst, "speed", (1, 2, 3, 4), "min_principal")
    with pytest.raises(ValidationError):
        asy.SweepSpec(cos_inst, "d_joint", (1, 2, 3, 4), "nowhere")


def test_small_d_sweep(cos_inst):
    res = asy.sweep_diffusion(asy.SweepSpec(cos_inst, "d_joint", (1e-6, 1e-5, 1e-4, 1e-3, 1e-2), "min_principal"))
    assert res.target_value == 0.0
    assert res.tail_monotone(3) and res.rows[0].gap <= 5e-2
    assert all(0 < r.lambda_p < 1 for r in res.rows)
    assert all(r.gap >= 0 for r in res.rows)


def test_large_d_sweep(cos_inst):
    res = asy.sweep_diffusion(asy.SweepSpec(cos_inst, "d_joint", (1.0, 1e2, 1e4, 1e6), "perron_of_average",
                                            workers=2))
    assert abs(res.target_value - 1.0) <= 1e-10
    assert res.tail_monotone(3) and res.rows[-1].gap <= 1e-3
    assert [r.param for r in res.rows] == [1.0, 1e2, 1e4, 1e6]


def test_single_component_sweep(cos_inst):
    res = asy.sweep_diffusion(asy.SweepSpec(cos_inst, "d1", (0.5, 1.0, 2.0, 4.0), "perron_of_average"))
    assert np.all(np.diff(res.column("lambda_p")) >= 0)


def test_constant_A_is_flat_in_d():
    dom = Domain.interval(math.pi)
    inst = asy.Instance(dom, MatrixField.constant(dom, CONST))
    res = asy.sweep_diffusion(asy.SweepSpec(inst, "d_joint", (0.01, 0.1, 1.0, 10.0), "perron_of_average"))
    np.testing.assert_allclose(res.column("lambda_p"), 1.0, atol=1e-12)


def test_dirichlet_divergence_bounds():
    dom = Domain.interval(math.pi, DIRICHLET)
    inst = asy.Instance(dom, MatrixField.constant(dom, CONST))
    res = asy.sweep_diffusion(asy.SweepSpec(inst, "d_joint", (1.0, 1e2, 1e4, 1e6), "divergence"))
    assert res.target_value == math.inf and all(r.gap == math.inf for r in res.rows)
    for r in res.rows:
        # per-mode closed form for constant A: lambda = sqrt(d) + 1
        assert abs(r.lambda_p - (math.sqrt(r.param) + 1.0)) <= 1e-9 * r.lambda_p
    assert res.checks["perturbative_bound_ok"]
    assert res.monotone_ok


def test_sweep_target_errors(cos_inst):
    with pytest.raises(ValidationError):
        asy.sweep_diffusion(asy.SweepSpec(cos_inst, "d_joint", (1, 2, 3, 4), "divergence"))
    with pytest.raises(ValidationError):
        asy.sweep_diffusion(asy.SweepSpec(cos_inst, "s_joint", (0.1, 0.2, 0.3, 0.4), "min_principal"))
    with pytest.raises(ValidationError):
        asy.sweep_diffusion(asy.SweepSpec(cos_inst, "d_joint", (1e-7, 1e-6, 1e-5, 1e-4), "min_principal"))


def test_order_sweeps(cos_inst):
    near1 = asy.sweep_order(asy.SweepSpec(cos_inst, "s_joint", (0.5, 0.9, 0.99, 0.999), "classical_laplacian"))
    assert near1.rows[-1].gap <= 1e-2 and near1.tail_monotone(3)
    near0 = asy.sweep_order(asy.SweepSpec(cos_inst, "s_joint", (0.001, 0.01, 0.1, 0.5), "limit_s0_operator"))
    assert near0.tail_monotone(3) and near0.checks["d_independence_ok"]
    dom = Domain.interval(math.pi, DIRICHLET)
    with pytest.raises(ValidationError):
        asy.sweep_order(asy.SweepSpec(asy.Instance(dom, cosine_field(dom)), "s_joint", (0.1, 0.2, 0.3, 0.4),
                                      "classical_laplacian"))


def test_constant_A_flat_in_s():
    dom = Domain.interval(math.pi)
    inst = asy.Instance(dom, MatrixField.constant(dom, CONST))
    res = asy.sweep_order(asy.SweepSpec(inst, "s_joint", (0.1, 0.3, 0.6, 0.9), "classical_laplacian"))
    np.testing.assert_allclose(res.column("lambda_p"), 1.0, atol=1e-12)


def test_domain_scaling_exact():
    base = Domain.interval(math.pi, DIRICHLET)
    ls = (0.1, 0.5, 1.0, 2.0, 10.0)
    res = asy.sweep_domain_scale(np.array(CONST), base, (1, 1), (0.5, 0.5), ls)
    for l, r in zip(ls, res.rows):
        assert abs(r.lambda_p - (1 + 1 / l)) <= 1e-10
        assert abs(r.lambda_p - oracles.per_mode_principal(CONST, (1, 1), (0.5, 0.5), l * math.pi, DIRICHLET)) <= 1e-10
    assert res.checks["lower_bound_ok"]
    assert abs(res.checks["lower_bound"][0] - 11.0) <= 1e-10
    with pytest.raises(ValidationError):
        asy.sweep_domain_scale(np.array(CONST), base.with_bc(NEUMANN), (1, 1), (0.5, 0.5), ls)
    with pytest.raises(NonConstantFieldError):
        asy.sweep_domain_scale(cosine_field(base), base, (1, 1), (0.5, 0.5), ls)


def test_shape_properties(cos_inst):
    rep = asy.check_shape_properties(cos_inst, [0.25, 0.5, 1.0, 2.0, 4.0])
    assert rep.ok and rep.strict_pairs > 0
    dom = Domain.interval(math.pi)
    flat = asy.check_shape_properties(asy.Instance(dom, MatrixField.constant(dom, CONST)), [0.5, 1.0, 2.0])
    assert flat.ok and flat.strict_pairs == 0
    np.testing.assert_allclose(flat.lambda_grid, 1.0, atol=1e-12)


def test_domain_monotonicity():
    rep = asy.check_domain_monotonicity(np.array(CONST), (1, 1), (0.5, 0.5), Domain.interval(math.pi / 2),
                                        Domain.interval(math.pi))
    assert rep.ok
    assert abs(rep.dirichlet_inner - 3) <= 1e-8 and abs(rep.dirichlet_outer - 2) <= 1e-8
    assert abs(rep.neumann_outer - 1) <= 1e-8
    same = asy.check_domain_monotonicity(np.array(CONST), (1, 1), (0.5, 0.5), Domain.interval(math.pi),
                                         Domain.interval(math.pi))
    assert same.dirichlet_inner == same.dirichlet_outer
    with pytest.raises(NestingError):
        asy.check_domain_monotonicity(np.array(CONST), (1, 1), (0.5, 0.5), Domain.interval(4.0),
                                      Domain.interval(math.pi))


def test_profiles_for_concentration(cos_inst):
    res = asy.sweep_diffusion(asy.SweepSpec(cos_inst, "d_joint", (1e-4, 1e-3, 1e-2, 1e-1), "min_principal"),
                              profiles=True)
    assert len(res.profiles) == 4
    v, points, phi = res.profiles[0]
    assert v == 1e-4 and phi.shape == (2, points.shape[0])
