import numpy as np
import pytest

from fairshare import FairnessBounds, ModelParams


def random_strict_params(rng, T=10, fsd=False):
    """Random parameters inside the theory's assumptions."""
    psi = rng.uniform(0.05, 0.95, size=(2, 2))
    if fsd:
        # Each group strictly prefers its in-group article.
        psi[0] = np.sort(psi[0])[::-1]
        psi[1] = np.sort(psi[1])
        if psi[0, 0] == psi[0, 1]:
            psi[0, 0] += 0.01
        if psi[1, 1] == psi[1, 0]:
            psi[1, 1] += 0.01
    return ModelParams(
        pi_A=rng.uniform(0.2, 0.8),
        q_A=rng.uniform(0.55, 0.95),
        q_B=rng.uniform(0.55, 0.95),
        psi=psi,
        horizon_T=T,
        mode="strict",
    )


def random_bounds(rng):
    return FairnessBounds(
        delta_lo=rng.uniform(0.05, 0.95),
        delta_hi=rng.uniform(1.05, 4.0),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
