import math

import pytest


def within_sigma(freq: float, p: float, trials: int, k: float = 3.0) -> bool:
    """Binomial frequency check: |freq - p| <= k * sqrt(p (1-p) / trials)."""
    return abs(freq - p) <= k * math.sqrt(p * (1 - p) / trials) + 1e-12


@pytest.fixture
def sigma_check():
    return within_sigma
