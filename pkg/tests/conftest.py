import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("qmaj", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qmaj")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_hermitian(rng, d):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


def random_distribution_vector(rng, d, zeros=0):
    v = rng.dirichlet(np.ones(d - zeros))
    return np.concatenate([v, np.zeros(zeros)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
