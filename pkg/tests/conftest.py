import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from irsoutage.model import TWO_PI, DirectLink, IrsSpec, SystemModel  # noqa: E402


def random_model(rng, k_max=2, n_max=2, kappa_zero_prob=0.0, k_min=0, kappa_lo=0.0,
                 kappa_hi=20.0):
    """Random valid model with random LoS phases."""
    def kappa():
        if rng.random() < kappa_zero_prob:
            return 0.0
        return float(rng.uniform(kappa_lo, kappa_hi))

    direct = DirectLink(float(rng.uniform(0.05, 1.0)), kappa(), float(rng.uniform(0, TWO_PI)))
    irss = []
    for _ in range(int(rng.integers(k_min, k_max + 1))):
        n = int(rng.integers(1, n_max + 1))
        irss.append(IrsSpec(n, float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.05, 1.0)),
                            kappa(), rng.uniform(0, TWO_PI, n), rng.uniform(0, TWO_PI, n)))
    return SystemModel(direct, irss)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_model():
    return SystemModel(DirectLink(0.8, 2.0), [IrsSpec(2, 1.0, 0.6, 10.0)])
