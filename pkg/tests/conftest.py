import math

import pytest

from coopfrac import DIRICHLET, NEUMANN, Domain, MatrixField, build_basis

CONSTANT_A = [[2.0, -1.0], [-1.0, 2.0]]


@pytest.fixture(scope="session")
def interval_n():
    return Domain.interval(math.pi, NEUMANN)


@pytest.fixture(scope="session")
def interval_d():
    return Domain.interval(math.pi, DIRICHLET)


@pytest.fixture(scope="session")
def basis_n(interval_n):
    return build_basis(interval_n, 64)


@pytest.fixture(scope="session")
def basis_d(interval_d):
    return build_basis(interval_d, 64)


@pytest.fixture(scope="session")
def constant_A(interval_n):
    return MatrixField.constant(interval_n, CONSTANT_A)


@pytest.fixture(scope="session")
def cosine_A(interval_n):
    diag = [[0, 2.0], [1, 1.0]]
    return MatrixField.from_pairs(interval_n, diag, [[0, -1.0]], [[0, -1.0]], diag)


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
