import numpy as np
import pytest

from carbonflex import CarbonTrace, synth_trace


@pytest.fixture(scope="session")
def diurnal():
    """60 days, base 100, amplitude 50, no noise."""
    return synth_trace(days=60, base=100.0, amplitude=50.0)


@pytest.fixture(scope="session")
def alternating():
    return CarbonTrace(np.tile([50.0, 150.0], 24 * 30))


def constant(value=100.0, n=96):
    return CarbonTrace(np.full(n, value))


# -- acceptance reporting: one PASS/FAIL line per criterion --------------------

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        status = "PASS" if report.passed else "FAIL"
        _criteria[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
