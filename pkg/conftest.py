import pytest
from click.testing import CliRunner

from infra import config
from infra.pool import close_worker_pool
from services.fixtures.service import load_fixture


@pytest.fixture(autouse=True)
def _restore_process_state():
    bits = config.PRECISION_BITS
    yield
    config.PRECISION_BITS = bits
    close_worker_pool()


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def curve_37a():
    loaded = load_fixture("37a")
    return loaded.curve, loaded.points["P"]


@pytest.fixture
def tt_surface():
    """y^2 = x^3 - T^2 x + T^2 with P = (T, T), Q = (1, 1), R = (0, T)"""
    return load_fixture("tt-surface").surface


@pytest.fixture
def fs_points():
    return load_fixture("fs-points").values
