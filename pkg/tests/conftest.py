import pytest

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, text): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    label, text = marker.args
    _OUTCOMES[(label, text)] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for (label, text), status in _OUTCOMES.items():
        terminalreporter.write_line(f"[{status}] criterion {label}: {text}")
