import numpy as np
import pytest

from besovns.experiments import CorpusSpec, calibrate_constants, make_initial_data
from besovns.spectral import Grid


@pytest.fixture(scope="session")
def grid2():
    return Grid(2, 32)


@pytest.fixture(scope="session")
def grid2_large():
    return Grid(2, 64)


@pytest.fixture(scope="session")
def grid3():
    return Grid(3, 32)


@pytest.fixture(scope="session")
def calib_small():
    """Fast calibration table for solver tests (2d corpus, one eps)."""
    return calibrate_constants(
        corpus_specs=[CorpusSpec(count=6, n=2, N=32, sigma=0.5, seed=7, divergence_free=True)],
        eps_grid=(0.25, 0.5, 0.75),
        T=0.25,
        M=8,
        pair_count=5,
    )


@pytest.fixture
def random_scalar(grid2):
    def make(seed=0, sigma=0.5):
        return make_initial_data("random_besov", grid2, seed=seed, sigma=sigma, components=1)

    return make


@pytest.fixture
def random_vector(grid2):
    def make(seed=0, sigma=0.5, divergence_free=False):
        return make_initial_data(
            "random_besov", grid2, seed=seed, sigma=sigma, divergence_free=divergence_free
        )

    return make
