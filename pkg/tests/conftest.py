import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when == "teardown":
        return
    number, title = marker.args
    if report.when == "setup" and report.passed:
        return
    status = "PASS" if report.passed else "FAIL"
    detail = ""
    if report.failed:
        detail = str(call.excinfo.value).strip().splitlines()[0] if call.excinfo else "failed"
    elif report.skipped:
        status = "SKIP"
    note = getattr(item, "acceptance_note", "")
    item.config._criteria[number] = (status, title, f"{report.duration:.1f}s", note or detail)


def pytest_terminal_summary(terminalreporter, config):
    results = config._criteria
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title, took, detail = results[number]
        line = f"criterion {number:>2} {status}  {title}  [{took}]"
        terminalreporter.write_line(line + (f"  {detail}" if detail else ""))
