import pytest
from hypothesis import HealthCheck, settings

from hecke2.spaces import build_context

from tests.helpers import madic_session

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def ctx1():
    return build_context(1, 4096)


@pytest.fixture(scope="session")
def ctx3():
    return build_context(3, 4096)


@pytest.fixture(scope="session")
def ctx5():
    return build_context(5, 4096)


@pytest.fixture(scope="session")
def s1():
    return madic_session(1)


@pytest.fixture(scope="session")
def s3():
    return madic_session(3)


@pytest.fixture(scope="session")
def s5():
    return madic_session(5)
