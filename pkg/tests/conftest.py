import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_elementary(values, k):
    """e_k by summing products over all k-subsets."""
    return sum(math.prod(c) for c in itertools.combinations(values, k))


def kn_tensor(a, b):
    """Four-term Kulkarni-Nomizu product as a full 4-index array."""
    return (np.einsum("ik,jl->ijkl", a, b) + np.einsum("jl,ik->ijkl", a, b)
            - np.einsum("il,jk->ijkl", a, b) - np.einsum("jk,il->ijkl", a, b))


def random_sym(rng, n):
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2
