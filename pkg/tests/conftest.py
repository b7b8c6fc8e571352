import numpy as np
import pytest

from levylab import exponent as ex
from levylab import measure as ms


@pytest.fixture(scope="session")
def stable15():
    return ms.stable(1.5, name="stable15")


@pytest.fixture(scope="session")
def vt_stable(stable15):
    return ex.build_variogram(stable15)


@pytest.fixture(scope="session")
def vt_brownian():
    return ex.build_variogram(ms.gaussian_only(1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


# acceptance lines, printed once at the end of the session
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
