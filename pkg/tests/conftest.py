import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dyadic_pd.core import DyadicDataset

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_dataset(n, seed, fixed_effects=True):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n))
    y = 0.7 * x + rng.normal(size=(n, n))
    if fixed_effects:
        y = y + rng.normal(size=n)[:, None] + rng.normal(size=n)[None, :]
    return DyadicDataset(y=y, x=x)


@pytest.fixture
def small_dataset():
    return random_dataset(7, 2024)
