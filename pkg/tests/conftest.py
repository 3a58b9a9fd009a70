import pytest

from sara.presets import build_scenario
from sara.simulator import LongStallConfig


@pytest.fixture(scope="session")
def small_slow():
    """Contended small-memory scenario on the slow SSD, short horizon."""
    return build_scenario(ssd="slow", memory_fraction=0.6, horizon_periods=60)


@pytest.fixture(scope="session")
def small_fast():
    return build_scenario(ssd="fast", memory_fraction=0.6, horizon_periods=60)


@pytest.fixture(scope="session")
def injected_slow():
    """Slow-SSD scenario with long-stall injection enabled."""
    return build_scenario(
        ssd="slow",
        memory_fraction=0.6,
        horizon_periods=120,
        long_stall=LongStallConfig(probability_per_period=0.02),
    )
