import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# Array-heavy strategies vary a lot in per-example cost; wall-clock
# deadlines just make them flaky.
settings.register_profile(
    "lungcover",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lungcover")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260816)
