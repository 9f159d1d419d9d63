import pytest

_criteria: dict[str, list[str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    title = f"{marker.args[0]:>2}. {marker.args[1]}"
    _criteria.setdefault(title, []).append(report.outcome)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for title in sorted(_criteria, key=lambda t: int(t.split(".")[0])):
        ok = all(o == "passed" for o in _criteria[title])
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {title}")
