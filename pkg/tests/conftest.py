import numpy as np
import pytest

from dirac_pathint.action import ActionContext
from dirac_pathint.algebra import PhysicalParams, make_standard_algebra

# criterion number -> (verdict, detail); filled by the acceptance tests
CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        verdict, detail = CRITERIA[k]
        terminalreporter.write_line(f"{verdict} criterion {k}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params():
    return PhysicalParams(c=1.0, m=1.0)


def make_ctx(pot, d=None, params=None, order=8):
    d = pot.d if d is None else d
    return ActionContext(make_standard_algebra(d), params or PhysicalParams(), pot, order)
