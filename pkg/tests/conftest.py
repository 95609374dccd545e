import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def firm_nonexpansive_gap(T, pairs, inner=None):
    """Largest violation of ||Tx - Ty||^2 <= <x - y, Tx - Ty> over the pairs.

    ``inner`` supplies a custom inner product; Euclidean when omitted.
    """
    if inner is None:
        inner = lambda a, b: float(np.dot(a, b))
    worst = 0.0
    for x, y in pairs:
        tx, ty = T(x), T(y)
        worst = max(worst, inner(tx - ty, tx - ty) - inner(x - y, tx - ty))
    return worst


def random_pairs(rng, dim, n=100, scale=2.0):
    return [(scale * rng.standard_normal(dim), scale * rng.standard_normal(dim)) for _ in range(n)]
