import numpy as np
import pytest

import zswkb as z


@pytest.fixture(scope="session")
def well_spec():
    return z.well_even()


@pytest.fixture(scope="session")
def tanh_spec():
    return z.monotone_odd()


@pytest.fixture(scope="session")
def well_problem():
    """Simple-well reference problem: A = 2 - exp(-x^2), window 1.5 +/- 0.2."""
    return z.Problem(z.well_even(), 1.5, 0.2, 0.1)


@pytest.fixture(scope="session")
def tanh_problem():
    """Monotone reference problem: A = 2 tanh x, window 1.0 +/- 0.3."""
    return z.Problem(z.monotone_odd(), 1.0, 0.3, 0.1)


@pytest.fixture(scope="session")
def spectra_cache():
    """Session-wide memo for expensive spectra shared across test modules."""
    cache = {}

    def get(key, compute):
        if key not in cache:
            cache[key] = compute()
        return cache[key]

    return get


def rng(seed=12345):
    return np.random.default_rng(seed)
