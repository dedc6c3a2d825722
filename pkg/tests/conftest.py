import pytest

from robocoach import catalog as cat

_terminal = [None]


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): named acceptance criterion, reported as a PASS/FAIL line"
    )
    _terminal[0] = config.pluginmanager.get_plugin("terminalreporter")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker:
        report.acceptance_name = marker.args[0]


@pytest.hookimpl(trylast=True)
def pytest_runtest_logreport(report):
    name = getattr(report, "acceptance_name", None)
    if name is None or report.when != "call":
        return
    status = "PASS" if report.passed else "FAIL"
    tr = _terminal[0]
    line = f"[ACCEPTANCE] {status} {name}"
    if tr is not None:
        tr.write_line(line)
    else:
        print(line)


@pytest.fixture(scope="session")
def catalog():
    return cat.load_catalog()
