import numpy as np
import pytest

from levelflow.grid import ScalarField, make_grid
from levelflow.shapes import Sphere, init_field


@pytest.fixture
def grid2d():
    return make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [64, 64])


@pytest.fixture
def grid3d():
    return make_grid(3, [[-1.0, 1.0]] * 3, [32] * 3)


@pytest.fixture
def circle64(grid2d):
    return init_field(Sphere(center=(0.0, 0.0), radius=0.8), grid2d)


def field_from(grid, fn):
    """ScalarField with values fn(*meshgrid) for analytic test fields."""
    return ScalarField(grid, np.asarray(fn(*grid.meshgrid()), dtype=float))
