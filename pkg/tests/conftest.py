import pytest

from extricat.defloc import DeflocEngine
from extricat.descriptors import build_backend, load_fixture
from extricat.heart import CotorsionPair, HeartEngine


@pytest.fixture(scope="session")
def fix_a_backend():
    return build_backend(load_fixture("fix_a"))


@pytest.fixture(scope="session")
def fix_a2_backend():
    return build_backend(load_fixture("fix_a2"))


@pytest.fixture(scope="session")
def fix_p_backend():
    return build_backend(load_fixture("fix_p"))


@pytest.fixture(scope="session")
def fix_t_backend():
    return build_backend(load_fixture("fix_t"))


@pytest.fixture(scope="session")
def fix_point_backend():
    return build_backend(load_fixture("fix_point"))


@pytest.fixture(scope="session")
def fix_a_defloc(fix_a_backend):
    return DeflocEngine(fix_a_backend)


@pytest.fixture(scope="session")
def fix_a2_defloc(fix_a2_backend):
    return DeflocEngine(fix_a2_backend)


@pytest.fixture(scope="session")
def fix_p_defloc(fix_p_backend):
    return DeflocEngine(fix_p_backend)


@pytest.fixture(scope="session")
def fix_t_defloc(fix_t_backend):
    return DeflocEngine(fix_t_backend)


@pytest.fixture(scope="session")
def fix_t_heart(fix_t_backend):
    return HeartEngine(fix_t_backend)


@pytest.fixture(scope="session")
def fix_u_pair():
    return CotorsionPair(("S1",), ("S1", "S3"))
