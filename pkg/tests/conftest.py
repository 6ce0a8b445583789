import pytest

from coleman import period_matrix
from modsym import build_manin_basis, eigen_decompose


@pytest.fixture(scope="session")
def basis11():
    return build_manin_basis(11)


@pytest.fixture(scope="session")
def eig11(basis11):
    return eigen_decompose(basis11)


@pytest.fixture(scope="session")
def period11(basis11, eig11):
    return period_matrix(basis11, eig11, 3, 6)
