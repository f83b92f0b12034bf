import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopfrac import DIRICHLET, Domain, MatrixField, assemble, build_basis, limit_s0_assemble
from coopfrac.errors import GridMismatchError, ValidationError
from coopfrac.operator import (
    apply_fractional,
    default_beta,
    kr_power,
    krein_rutman_radius,
    resolvent_apply,
    semigroup_step,
)
from coopfrac.eigen import principal_symmetric, random_nonnegative


def test_constant_A_block_structure(basis_n, constant_A):
    op = assemble(basis_n, (1.0, 2.0), (0.5, 0.3), constant_A)
    n = basis_n.n_modes
    M = op.matrix
    for k in (0, 1, 7):
        idx = [k, n + k]
        block = M[np.ix_(idx, idx)]
        mu = basis_n.mu[k]
        expected = np.array([[2.0, -1.0], [-1.0, 2.0]]) + np.diag([(1.0 * mu) ** 0.5, (2.0 * mu) ** 0.3])
        np.testing.assert_allclose(block, expected, atol=1e-12)
    mask = np.ones_like(M, dtype=bool)
    for k in range(n):
        for i in (k, n + k):
            mask[i, [k, n + k]] = False
    assert np.max(np.abs(M[mask])) <= 1e-12


def test_symmetry_and_shift_linearity(basis_n, cosine_A):
    op = assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A)
    assert op.symmetric and np.max(np.abs(op.matrix - op.matrix.T)) <= 1e-12
    shifted = assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A.shifted(0.7))
    np.testing.assert_allclose(shifted.matrix, op.matrix + 0.7 * np.eye(128), atol=1e-12)


def test_zero_coupling_spectrum_is_symbols(interval_n):
    basis = build_basis(interval_n, 32)
    zero = MatrixField.from_pairs(interval_n, [[0, 0.0]], [[0, -1e-300]], [[0, -1e-300]], [[0, 0.0]])
    op = assemble(basis, (2.0, 0.5), (0.4, 0.9), zero)
    ev = np.sort(np.linalg.eigvalsh(op.matrix))
    expected = np.sort(np.concatenate([(2.0 * basis.mu) ** 0.4, (0.5 * basis.mu) ** 0.9]))
    np.testing.assert_allclose(ev, expected, atol=1e-12)
    assert np.all(op.symbols >= 0) and np.count_nonzero(op.symbols == 0) == 2


def test_apply_fractional_examples(basis_n, basis_d):
    x = basis_n.grid.points[:, 0]
    c = basis_n.project(np.cos(2 * x))
    out = basis_n.synthesize(apply_fractional(basis_n, 4.0, 0.5, c))
    np.testing.assert_allclose(out, 4 * np.cos(2 * x), atol=1e-12)
    const = np.zeros(64)
    const[0] = 1.0
    assert np.max(np.abs(apply_fractional(basis_n, 1.0, 0.3, const))) == 0.0
    ones = basis_n.synthesize(apply_fractional(basis_n, 1.0, 0.3, basis_n.project(np.ones_like(x))))
    assert np.max(np.abs(ones)) <= 1e-12
    xs = basis_d.grid.points[:, 0]
    for s in (0.1, 0.5, 1.0):
        got = basis_d.synthesize(apply_fractional(basis_d, 1.0, s, basis_d.project(np.sin(xs))))
        np.testing.assert_allclose(got, np.sin(xs), atol=1e-12)
    with pytest.raises(ValidationError):
        apply_fractional(basis_n, 1.0, 1.5, c)
    with pytest.raises(ValidationError):
        apply_fractional(basis_n, 0.0, 0.5, c)


def test_resolvent(basis_n):
    n = basis_n.n_modes
    f = np.zeros((2, n))
    f[0, 3] = 1.0
    out = resolvent_apply(basis_n, (2.0, 1.0), (0.5, 0.5), 3.0, f)
    assert out[0, 3] == pytest.approx(1.0 / ((2.0 * 9) ** 0.5 + 3.0), rel=1e-15)
    rng = np.random.default_rng(1)
    g = rng.normal(size=(2, n))
    r = resolvent_apply(basis_n, (1, 1), (0.5, 0.5), 1e6, g)
    assert np.linalg.norm(r) <= np.linalg.norm(g) / 1e6
    sym = np.array([(basis_n.mu) ** 0.5, basis_n.mu ** 0.5])
    back = (sym + 2.5) * resolvent_apply(basis_n, (1, 1), (0.5, 0.5), 2.5, g)
    np.testing.assert_allclose(back, g, atol=1e-12)
    with pytest.raises(ValidationError):
        resolvent_apply(basis_n, (1, 1), (0.5, 0.5), 0.0, g)


def test_resolvent_positivity(basis_n):
    rng = np.random.default_rng(2)
    for _ in range(10):
        f = np.array([random_nonnegative(basis_n, rng) for _ in range(2)])
        out = resolvent_apply(basis_n, (1, 1), (0.5, 0.5), 10.0, basis_n.project(f))
        assert np.min(basis_n.synthesize(out)) >= -1e-8


def test_semigroup(basis_n):
    x = basis_n.grid.points[:, 0]
    const = basis_n.project(np.ones((2, x.size)))
    evolved = semigroup_step(basis_n, (1, 1), (0.5, 0.5), 5.0, const)
    assert np.array_equal(evolved[:, 0], const[:, 0])
    np.testing.assert_allclose(basis_n.synthesize(evolved), 1.0, atol=1e-13)
    c = basis_n.project(np.array([np.cos(x), np.cos(x)]))
    out = basis_n.synthesize(semigroup_step(basis_n, (1, 1), (0.5, 0.5), 1.0, c))
    np.testing.assert_allclose(out, np.broadcast_to(math.exp(-1) * np.cos(x), out.shape), atol=1e-12)
    g = np.random.default_rng(0).normal(size=(2, 64))
    two = semigroup_step(basis_n, (1, 2), (0.5, 0.7), 0.3, semigroup_step(basis_n, (1, 2), (0.5, 0.7), 0.2, g))
    one = semigroup_step(basis_n, (1, 2), (0.5, 0.7), 0.5, g)
    np.testing.assert_allclose(two, one, rtol=1e-13, atol=1e-300)
    with pytest.raises(ValidationError):
        semigroup_step(basis_n, (1, 1), (0.5, 0.5), -1.0, g)


def test_semigroup_positivity(basis_n):
    rng = np.random.default_rng(3)
    for _ in range(50):
        w = basis_n.project(np.array([random_nonnegative(basis_n, rng) for _ in range(2)]))
        for t in (0.01, 0.1, 1.0):
            assert np.min(basis_n.synthesize(semigroup_step(basis_n, (1, 1), (0.5, 0.5), t, w))) >= -1e-8


def test_krein_rutman_radius_cases(basis_n, cosine_A):
    lam = principal_symmetric(assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A)).lambda_p
    radii = []
    for shift in (-1.0, 0.0, 1.0):
        r, direction = krein_rutman_radius(basis_n, (1, 1), (0.5, 0.5), cosine_A, lam + shift)
        radii.append(r)
        assert np.min(direction) > 0
    assert radii[0] < 1 and abs(radii[1] - 1) <= 1e-8 and radii[2] > 1


def test_krein_rutman_radius_increasing_in_lambda(basis_n, cosine_A):
    beta = default_beta(3.0, cosine_A, basis_n)
    rs = [krein_rutman_radius(basis_n, (1, 1), (0.5, 0.5), cosine_A, lam, beta)[0] for lam in np.linspace(-2, 2, 9)]
    assert np.all(np.diff(rs) > 0)


def test_krein_rutman_beta_too_small(basis_n, cosine_A):
    op = assemble(basis_n, (1, 1), (0.5, 0.5), cosine_A)
    with pytest.raises(ValidationError):
        kr_power(op, 0.0, 0.5)


def test_limit_s0_operator(basis_n, constant_A, cosine_A, interval_n, basis_d):
    op = limit_s0_assemble(basis_n, constant_A)
    n = basis_n.n_modes
    for k, add in ((0, 0.0), (5, 1.0)):
        block = op.matrix[np.ix_([k, n + k], [k, n + k])]
        np.testing.assert_allclose(block, np.array([[2, -1], [-1, 2]]) + add * np.eye(2), atol=1e-12)
    tiny = MatrixField.constant(interval_n, [[0.0, -1e-300], [-1e-300, 0.0]])
    ev = np.sort(np.linalg.eigvalsh(limit_s0_assemble(basis_n, tiny).matrix))
    np.testing.assert_allclose(ev, [0, 0] + [1] * (2 * n - 2), atol=1e-12)
    assert limit_s0_assemble(basis_n, cosine_A).symmetric
    with pytest.raises(ValidationError):
        limit_s0_assemble(basis_d, MatrixField.constant(basis_d.domain, [[2, -1], [-1, 2]]))


def test_assemble_errors(basis_n, cosine_A):
    with pytest.raises(ValidationError):
        assemble(basis_n, (1, -1), (0.5, 0.5), cosine_A)
    with pytest.raises(ValidationError):
        assemble(basis_n, (1, 1), (0.0, 0.5), cosine_A)
    with pytest.raises(ValidationError):
        assemble(basis_n, (1, 1), (0.5, 1.01), cosine_A)
    other = MatrixField.constant(Domain.interval(2.0), [[2, -1], [-1, 2]])
    with pytest.raises(GridMismatchError):
        assemble(basis_n, (1, 1), (0.5, 0.5), other)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.05, 1.0), st.floats(0.05, 1.0), st.floats(-3, 3))
def test_shift_property(d1, d2, s1, s2, c):
    dom = Domain.interval(math.pi, DIRICHLET)
    basis = build_basis(dom, 24)
    A = MatrixField.from_pairs(dom, [[0, 1.0], [2, 0.5]], [[0, -1.0], [1, 0.2]], [[0, -1.0], [1, 0.2]], [[0, 2.0]])
    M = assemble(basis, (d1, d2), (s1, s2), A).matrix
    Ms = assemble(basis, (d1, d2), (s1, s2), A.shifted(c)).matrix
    np.testing.assert_allclose(Ms, M + c * np.eye(48), atol=1e-12)
