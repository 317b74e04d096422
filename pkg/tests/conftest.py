import pytest

_criteria = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if marker:
        _criteria.setdefault(marker, []).append(report.passed)


@pytest.fixture(autouse=True)
def _record_criterion(request):
    m = request.node.get_closest_marker("criterion")
    if m is not None:
        request.node.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status = "PASS" if all(_criteria[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}")
