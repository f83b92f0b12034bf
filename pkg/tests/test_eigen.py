import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopfrac import (
    DIRICHLET,
    NEUMANN,
    Domain,
    MatrixField,
    assemble,
    build_basis,
    certify_bound,
    check_weak_max_principle,
    grad_lambda_d,
    principal_eigenpair,
    principal_krein_rutman,
    principal_symmetric,
    rayleigh_quotient,
)
from coopfrac.errors import StaleEigenpairError, ValidationError
from coopfrac.presets import cosine_field, symmetric_instances

from . import oracles

# principal eigenvalues of the ten symmetric instances at N = 32, frozen
FROZEN = [0.9999999999999998, 1.9999999999999996, 0.609989946601422, 1.7745645128439635, 0.6065608282540863,
          0.8851833932314617, 0.18771247513843237, 1.1456049306414324, 0.6722150655551093, 2.4142135623730945]


@pytest.mark.parametrize("bc, expected", [(NEUMANN, 1.0), (DIRICHLET, 2.0)])
def test_constant_oracle(bc, expected):
    dom = Domain.interval(math.pi, bc)
    pair = principal_symmetric(assemble(build_basis(dom, 64), (1, 1), (0.5, 0.5),
                                        MatrixField.constant(dom, [[2, -1], [-1, 2]])))
    assert abs(pair.lambda_p - expected) <= 1e-8
    assert abs(pair.lambda_p - oracles.per_mode_principal([[2, -1], [-1, 2]], (1, 1), (0.5, 0.5), math.pi, bc)) <= 1e-12


@pytest.mark.parametrize("d, s, bc", [((0.3, 2.0), (0.2, 0.9), NEUMANN), ((1.5, 0.1), (0.7, 0.4), DIRICHLET)])
def test_per_mode_oracle_general(d, s, bc):
    A = [[1.0, -0.5], [-2.0, 3.0]]
    dom = Domain.interval(2.0, bc)
    lam = principal_krein_rutman(build_basis(dom, 48), d, s, MatrixField.constant(dom, A)).lambda_p
    assert abs(lam - oracles.per_mode_principal(A, d, s, 2.0, bc, count=48)) <= 1e-9


def test_rectangle_per_mode_oracle():
    dom = Domain.rectangle(math.pi, 2.0, DIRICHLET)
    A = [[2, -1], [-1, 2]]
    lam = principal_eigenpair(assemble(build_basis(dom, 40), (1, 1), (0.5, 0.5), MatrixField.constant(dom, A))).lambda_p
    assert abs(lam - oracles.per_mode_rectangle(A, (1, 1), (0.5, 0.5), math.pi, 2.0, DIRICHLET)) <= 1e-12


def test_classical_limit_matches_finite_volume(basis_n, cosine_A):
    lam = principal_symmetric(assemble(basis_n, (1, 1), (1, 1), cosine_A)).lambda_p
    a = lambda x: np.array([[2 + np.cos(x), -np.ones_like(x)], [-np.ones_like(x), 2 + np.cos(x)]])
    assert abs(lam - oracles.dense_fd_principal(a, (1, 1), math.pi, 800)) <= 1e-6


def test_shift_equivariance(basis_n, cosine_A):
    p = principal_symmetric(assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A))
    q = principal_symmetric(assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A.shifted(0.5)))
    assert abs(q.lambda_p - p.lambda_p - 0.5) <= 1e-10
    assert np.max(np.abs(q.phi1 - p.phi1)) <= 1e-10


def test_eigenpair_fields(basis_n, cosine_A):
    pair = principal_symmetric(assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A))
    norm = np.sum((pair.phi1**2) @ basis_n.grid.weights)
    assert abs(norm - 1.0) <= 1e-12
    assert pair.residual <= 1e-8 and pair.positivity_margin > 0 and pair.spectral_gap > 1e-10
    assert pair.phi1[0] @ basis_n.grid.weights > 0
    assert set(pair.report()) == {"lambda_p", "residual", "positivity_margin", "spectral_gap",
                                  "nonconstancy_margin", "method"}


@pytest.mark.parametrize("k", range(10))
def test_cross_algorithm_and_frozen(k):
    inst = symmetric_instances(32)[k]
    basis = inst.basis()
    sym = principal_symmetric(assemble(basis, inst.d, inst.s, inst.A))
    kr = principal_krein_rutman(basis, inst.d, inst.s, inst.A)
    assert abs(sym.lambda_p - kr.lambda_p) <= 1e-6
    assert abs(sym.lambda_p - FROZEN[k]) <= 1e-12
    assert sym.spectral_gap > 1e-10 and sym.residual <= 1e-8 and sym.positivity_margin > 0
    assert kr.residual <= 1e-8 and kr.positivity_margin > 0


def test_asymmetric_krein_rutman(interval_n, basis_n):
    A = MatrixField.constant(interval_n, [[1, -2], [-1, 1]])
    kr = principal_krein_rutman(basis_n, (1, 1), (0.5, 0.5), A)
    assert abs(kr.lambda_p - (1 - math.sqrt(2))) <= 1e-9
    assert kr.positivity_margin > 0
    with pytest.raises(ValidationError):
        principal_symmetric(assemble(basis_n, (1, 1), (0.5, 0.5), A))
    assert principal_eigenpair(assemble(basis_n, (1, 1), (0.5, 0.5), A)).method == "krein_rutman_bisection"


def test_rayleigh_quotient(basis_n, cosine_A):
    op = assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A)
    pair = principal_symmetric(op)
    assert abs(rayleigh_quotient(op, pair.coeffs) - pair.lambda_p) <= 1e-10
    w, v = np.linalg.eigh(op.matrix)
    assert abs(rayleigh_quotient(op, v[:, 1]) - w[1]) <= 1e-10
    rng = np.random.default_rng(0)
    assert min(rayleigh_quotient(op, rng.normal(size=128)) for _ in range(1000)) >= pair.lambda_p - 1e-10
    with pytest.raises(ValidationError):
        rayleigh_quotient(op, np.zeros(128))


def test_gradient(basis_n, cosine_A, constant_A):
    pair = principal_symmetric(assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A))
    g = grad_lambda_d(basis_n, (1, 1), (0.5, 0.5), cosine_A, pair)
    h = 1e-4
    for i in range(2):
        up, dn = [1.0, 1.0], [1.0, 1.0]
        up[i] += h
        dn[i] -= h
        fd = (principal_symmetric(assemble(basis_n, up, (0.5, 0.5), cosine_A)).lambda_p
              - principal_symmetric(assemble(basis_n, dn, (0.5, 0.5), cosine_A)).lambda_p) / (2 * h)
        assert abs(g[i] - fd) <= 1e-4 * abs(fd)
        assert g[i] >= 0
    pc = principal_symmetric(assemble(basis_n, (1, 1), (0.5, 0.5), constant_A))
    assert grad_lambda_d(basis_n, (1, 1), (0.5, 0.5), constant_A, pc) == (0.0, 0.0)
    with pytest.raises(StaleEigenpairError):
        grad_lambda_d(basis_n, (2, 1), (0.5, 0.5), cosine_A, pair)


def test_certificates(basis_n, cosine_A):
    op = assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A)
    pair = principal_symmetric(op)
    for direction in ("lower", "upper"):
        assert abs(certify_bound(basis_n, (1, 1), (0.5, 0.5), cosine_A, pair.phi1, direction) - pair.lambda_p) <= 1e-8
    ones = np.ones((2, basis_n.grid.size))
    assert abs(certify_bound(basis_n, (1, 1), (0.5, 0.5), cosine_A, ones, "lower")) <= 1e-12
    rng = np.random.default_rng(5)
    x = basis_n.grid.points[:, 0]
    for _ in range(20):
        c = rng.uniform(-0.4, 0.4, size=(2, 3))
        phi = np.array([1 + c[i, 0] * np.cos(x) + c[i, 1] * np.cos(2 * x) + c[i, 2] * np.cos(3 * x) for i in range(2)])
        lo = certify_bound(basis_n, (1, 1), (0.5, 0.5), cosine_A, phi, "lower")
        hi = certify_bound(basis_n, (1, 1), (0.5, 0.5), cosine_A, phi, "upper")
        assert lo <= pair.lambda_p + 1e-10 and hi >= pair.lambda_p - 1e-10
    with pytest.raises(ValidationError):
        certify_bound(basis_n, (1, 1), (0.5, 0.5), cosine_A, -ones, "lower")
    with pytest.raises(ValidationError):
        certify_bound(basis_n, (1, 1), (0.5, 0.5), cosine_A, ones, "sideways")


def test_dirichlet_certificate(basis_d, interval_d):
    A = MatrixField.constant(interval_d, [[2, -1], [-1, 2]])
    x = basis_d.grid.points[:, 0]
    phi = np.array([np.sin(x), np.sin(x)])
    assert abs(certify_bound(basis_d, (1, 1), (0.5, 0.5), A, phi, "lower") - 2.0) <= 1e-8


def test_max_principle(basis_n, cosine_A, interval_n):
    lam = principal_symmetric(assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A)).lambda_p
    shifted = cosine_A.shifted(0.5 - lam)
    rep = check_weak_max_principle(basis_n, (1, 1), (0.5, 0.5), shifted, trials=20, seed=0)
    assert rep.status == "holds" and abs(rep.lambda_p - 0.5) <= 1e-10 and rep.min_solution >= -1e-10
    bad = check_weak_max_principle(basis_n, (1, 1), (0.5, 0.5), MatrixField.constant(interval_n, [[1, -2], [-1, 1]]))
    assert bad.status == "fails"
    assert bad.counterexample["u_min"] < 0 and bad.counterexample["Ku_min"] >= 0
    zero = check_weak_max_principle(basis_n, (1, 1), (0.5, 0.5), MatrixField.constant(interval_n, [[1, -1], [-1, 1]]))
    assert zero.status == "borderline"


def test_max_principle_eigen_forcing(basis_n, cosine_A):
    op = assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A)
    pair = principal_symmetric(op)
    u = np.linalg.solve(op.matrix, pair.coeffs.ravel()).reshape(2, -1)
    np.testing.assert_allclose(u, pair.coeffs / pair.lambda_p, atol=1e-12)


def test_neumann_below_dirichlet(cosine_A, interval_n, interval_d):
    n = principal_eigenpair(assemble(build_basis(interval_n, 64), (1, 1), (0.5, 0.5), cosine_A)).lambda_p
    A_d = cosine_field(interval_d)
    d = principal_eigenpair(assemble(build_basis(interval_d, 64), (1, 1), (0.5, 0.5), A_d)).lambda_p
    assert n <= d + 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 3), st.floats(0.2, 3), st.floats(0.1, 1), st.floats(0.1, 1), st.floats(-1, 1), st.floats(0.2, 2))
def test_cross_algorithm_property(d1, d2, s1, s2, amp, off):
    dom = Domain.interval(math.pi)
    A = MatrixField.from_pairs(dom, [[0, 2.0], [1, amp]], [[0, -off]], [[0, -off]], [[0, 1.0], [2, 0.3]])
    basis = build_basis(dom, 24)
    sym = principal_symmetric(assemble(basis, (d1, d2), (s1, s2), A)).lambda_p
    kr = principal_krein_rutman(basis, (d1, d2), (s1, s2), A).lambda_p
    assert abs(sym - kr) <= 1e-6
