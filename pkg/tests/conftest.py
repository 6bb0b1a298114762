import pytest

from corrdecay.activity import ActivityField
from corrdecay.potential import Potential
from corrdecay.quadrature import Region


@pytest.fixture
def unit_interval():
    return Region.interval(0.0, 1.0)


@pytest.fixture
def rods():
    """Hard rods of length 0.5, so C_phi = 1."""
    return Potential.hard_core(1, 0.5)


@pytest.fixture
def rod_field(rods, unit_interval):
    return ActivityField.constant(1.0, unit_interval, rods)


@pytest.fixture
def ideal_field(unit_interval):
    return ActivityField.constant(1.0, unit_interval, Potential.ideal(1))


def pytest_configure(config):
    config._criteria = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    item.config._criteria.append((mark.args[0], "PASS" if rep.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter, config):
    rows = getattr(config, "_criteria", [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, detail in sorted(rows, key=lambda r: int(r[0].split()[0])):
        terminalreporter.write_line(f"{status}  {label}  {detail}")
