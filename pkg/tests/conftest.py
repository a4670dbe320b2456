import pytest

from reliable_drive.config import default_config
from reliable_drive.drive_cycle import wltc_class3b
from reliable_drive.pipeline import compare


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def wltc():
    return wltc_class3b()


@pytest.fixture(scope="session")
def wltc_results(cfg, wltc):
    """Both control modes over the full WLTC at the default step."""
    return compare(cfg, wltc)
