import math

import numpy as np
import pytest


def combined_sigma(*ses) -> float:
    return math.sqrt(sum(se * se for se in ses))


def assert_within_sigma(estimate, target, *ses, nsig=3.0, context=""):
    """Assert |estimate - target| <= nsig * sqrt(sum of squared stderrs)."""
    sigma = combined_sigma(*ses)
    diff = abs(estimate - target)
    assert diff <= nsig * sigma + 1e-15, (
        f"{context}: |{estimate} - {target}| = {diff:.4g} "
        f"exceeds {nsig} * {sigma:.4g}"
    )


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def unit_to_label(u: float) -> np.uint64:
    return np.uint64(int(u * 2.0**64))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
