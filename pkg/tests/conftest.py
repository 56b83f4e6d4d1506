import numpy as np
import pytest
from scipy.stats import unitary_group

from hardycert.npa import parse_grid, sweep
from hardycert.quantum import Realization

GRID_EPS1 = parse_grid("0:0.01:5")
GRID_EPS2 = parse_grid("0:0.001:5")
LEVELS = (1, 2, 3, 4)


def random_involution(d, rng):
    """U diag(+-1) U^dagger with both eigenvalues present."""
    u = unitary_group.rvs(d, random_state=rng)
    k = rng.integers(1, d)
    signs = np.array([1.0] * k + [-1.0] * (d - k))
    return u @ np.diag(signs) @ u.conj().T


def random_density(dim, rng, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_realization(rng, dims=(2, 2, 2), pure=False):
    obs = tuple((random_involution(d, rng), random_involution(d, rng)) for d in dims)
    total = int(np.prod(dims))
    if pure:
        v = rng.normal(size=total) + 1j * rng.normal(size=total)
        state = v / np.linalg.norm(v)
    else:
        state = random_density(total, rng)
    return Realization(state, obs)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def grids():
    """Both robustness objectives over the 5x5 grid at every level, solved once per session."""
    out = {}
    for which in ("state", "measurement"):
        for level in LEVELS:
            out[which, level] = {(r.eps1, r.eps2): r for r in sweep(GRID_EPS1, GRID_EPS2, level, which)}
    return out
