import pytest

import titfortat as tt

FIG2 = dict(
    values=[0.91, 1.186],
    initial_amounts=[1, 1],
    initial_fractions=[[0.95, 0.05], [0.55, 0.45]],
)
FIG3 = dict(
    values=[1.61, 0.03, 1.51],
    initial_amounts=[1, 1, 1],
    initial_fractions=[[0.54, 0.2, 0.26], [0.32, 0.31, 0.37], [0.07, 0.54, 0.39]],
)
EXAMPLE_A = dict(
    values=[1, 2],
    initial_amounts=[1, 1],
    initial_fractions=[[0.5, 0.5], [0.5, 0.5]],
)


@pytest.fixture
def fig2():
    return tt.new_economy(**FIG2)


@pytest.fixture
def fig3():
    return tt.new_economy(**FIG3)


@pytest.fixture
def example_a():
    return tt.new_economy(**EXAMPLE_A)


_criteria = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if marker:
        number, title = marker
        previous = _criteria.get(number, (title, True))
        _criteria[number] = (title, previous[1] and report.passed)


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker:
        item.user_properties.append(("criterion", tuple(marker.args)))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")
