import numpy as np
import pytest

from bellkit.models import FactorizableModel, HiddenVariableSpace, ResponseTable

SIDE1 = ("A", "C")
SIDE2 = ("B", "D")


def random_model(rng: np.random.Generator, max_cells: int = 6) -> FactorizableModel:
    """A random valid factorizable model on the canonical settings."""
    n = int(rng.integers(1, max_cells + 1))
    weights = rng.dirichlet(np.ones(n))
    cells = tuple(f"c{i}" for i in range(n))
    r1 = ResponseTable(1, SIDE1, rng.random((n, 2)))
    r2 = ResponseTable(2, SIDE2, rng.random((n, 2)))
    return FactorizableModel(HiddenVariableSpace(cells, weights), r1, r2)


@pytest.fixture
def rng():
    return np.random.default_rng(20260826)
