import pytest
from hypothesis import HealthCheck, settings

import ggsver as gv

settings.register_profile(
    "det",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("det")


@pytest.fixture(scope="session")
def gs_spec():
    return gv.validate(3, [(1, 2)])


@pytest.fixture(scope="session")
def const_spec():
    return gv.validate(3, [(1, 1)])


@pytest.fixture(scope="session")
def r2_spec():
    return gv.validate(3, [(1, 0), (0, 1)])


@pytest.fixture(scope="session")
def sym5_spec():
    return gv.validate(5, [(1, 1, 1, 1), (1, 0, 0, 1)])


@pytest.fixture(scope="session")
def gs3(gs_spec):
    return gv.build(gs_spec, 3)


@pytest.fixture(scope="session")
def gs4(gs_spec):
    return gv.build(gs_spec, 4)


@pytest.fixture(scope="session")
def r2_4(r2_spec):
    return gv.build(r2_spec, 4)
