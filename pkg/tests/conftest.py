import numpy as np
import pytest

from radnls.grid import GridSpec, RadialField
from radnls.hamiltonian import PotentialSpec, solve_ground_eigenpair
from radnls.manifold import continue_branch
from radnls.nonlinearity import NonlinearitySpec

# Unit-test scale: small grids so the whole file set stays fast.  The wells
# are tuned to carry exactly one negative eigenvalue (E0 ~ -0.54 for N=4,
# ~ -0.78 for N=5 at these depths).
WELLS = {4: PotentialSpec("gaussian_well", 5.0, 1.5),
         5: PotentialSpec("gaussian_well", 8.0, 1.5)}


@pytest.fixture(scope="session")
def grid4():
    return GridSpec(4, 60.0, 1200)


@pytest.fixture(scope="session")
def grid5():
    return GridSpec(5, 60.0, 1200)


@pytest.fixture(scope="session")
def spectral4(grid4):
    return solve_ground_eigenpair(WELLS[4], grid4)


@pytest.fixture(scope="session")
def spectral5(grid5):
    return solve_ground_eigenpair(WELLS[5], grid5)


@pytest.fixture(scope="session")
def cubic_like4():
    return NonlinearitySpec(((1.0, 1.2),), 4)


@pytest.fixture(scope="session")
def branch4(spectral4, cubic_like4):
    return continue_branch(spectral4, cubic_like4, a_max=0.5, steps=100)


@pytest.fixture(scope="session")
def focusing_branch4(spectral4):
    return continue_branch(spectral4, NonlinearitySpec(((-1.0, 1.2),), 4),
                           a_max=0.5, steps=100)


def random_field(grid, seed=0, width=3.0):
    rng = np.random.default_rng(seed)
    vals = (rng.standard_normal(grid.m) + 1j * rng.standard_normal(grid.m))
    return RadialField(grid, vals * np.exp(-(grid.r / width) ** 2))
