import pytest

_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def report(request):
    """Detail lines attached to the acceptance summary for this test."""
    lines: list[str] = []
    request.node.user_properties.append(("detail", lines))
    return lines


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = report.keywords.get("criterion")
    if not marker:
        return
    number = next((v for k, v in report.user_properties if k == "criterion_number"), None)
    detail = next((v for k, v in report.user_properties if k == "detail"), [])
    if number is not None:
        _RESULTS[number] = ("PASS" if report.passed else "FAIL", "; ".join(detail))


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        item.user_properties.append(("criterion_number", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status, detail = _RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")
