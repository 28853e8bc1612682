import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from subrk.calculus import CDParams
from subrk.models import heisenberg

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def H1():
    return heisenberg(1)


@pytest.fixture(scope="session")
def params_h1():
    return CDParams(0, Fraction(1, 2), 1, 2)
