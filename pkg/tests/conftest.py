import pytest
from hypothesis import settings

from siegel_lab.circle_dynamics import InvariantMeasure, tune_to_rotation
from siegel_lab.pullback.siegel import QuadSiegel, siegel_boundary
from siegel_lab.rotation import RotationNumber

settings.register_profile("lab", deadline=None, max_examples=40)
settings.load_profile("lab")


@pytest.fixture(scope="session")
def golden():
    return RotationNumber.golden()


@pytest.fixture(scope="session")
def tuned(golden):
    return tune_to_rotation(golden)


@pytest.fixture(scope="session")
def tuned_mu(tuned):
    return InvariantMeasure.build(tuned)


@pytest.fixture(scope="session")
def quad():
    return QuadSiegel.golden()


@pytest.fixture(scope="session")
def boundary(quad):
    return siegel_boundary(quad)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
