import numpy as np
import pytest

from kreinhankel.structs import SymMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def random_symmetric(rng):
    def make(n: int) -> SymMatrix:
        g = rng.standard_normal((n, n))
        return SymMatrix(0.5 * (g + g.T))

    return make
