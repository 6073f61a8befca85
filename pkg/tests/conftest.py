import numpy as np
import pytest
from hypothesis import settings

from forcefree.clebsch import ClebschField, HalfPlaneGrid
from forcefree.fields import FieldParams, G_C, phi_C

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def unit_params():
    return FieldParams(W=2.0, lam=1.0, gamma=0.0)


def chandrasekhar_field(grid, params):
    return ClebschField.from_functions(grid, lambda z, r: phi_C(z, r, params) + params.phi_inf(r),
                                       lambda z, r: G_C(z, r, params))


def benchmark_grid(params, nz, nr):
    R = params.R
    return HalfPlaneGrid.box(4 * R, 4 * R, nz, nr)
