import pytest

from qrgreen.boundary import compute_profile
from qrgreen.core_maps import MapParams


@pytest.fixture(scope="session")
def profile_k2():
    return compute_profile(2.0)


@pytest.fixture(scope="session")
def profile_k5():
    return compute_profile(5.0)


@pytest.fixture(scope="session")
def saddle_params():
    return MapParams(5.0, 0.0, -0.1)


@pytest.fixture(scope="session")
def attracting_params():
    return MapParams(0.5, 0.0, -1.5 - 0.5j)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for line in results:
        terminalreporter.write_line(line)
