import pytest
from hypothesis import HealthCheck, settings

from corpus import corpus

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def complexes():
    return corpus()
