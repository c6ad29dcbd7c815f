import pytest
from hypothesis import HealthCheck, settings

from qlattice import DEFAULT_PARAMS, make_family

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FAMILY_NAMES = sorted(DEFAULT_PARAMS)
QS = (0.3, 0.5, 0.7)


@pytest.fixture(params=FAMILY_NAMES)
def family_name(request):
    return request.param


@pytest.fixture(params=QS, ids=lambda q: f"q{q}")
def q(request):
    return request.param


@pytest.fixture
def spec(family_name, q):
    return make_family(family_name, DEFAULT_PARAMS[family_name], q)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance as acc

    if acc.RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(acc.RESULTS):
            terminalreporter.write_line(acc.RESULTS[number])
