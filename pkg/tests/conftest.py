import time

import pytest

_ACCEPTANCE: list[tuple[str, str, str]] = []
SESSION_START = time.perf_counter()


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        doc = getattr(report, "acceptance_doc", "") or report.nodeid.split("::")[-1]
        _ACCEPTANCE.append((report.outcome.upper(), report.nodeid.split("::")[-1], doc))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    doc = (item.function.__doc__ or "").strip().splitlines()
    rep.acceptance_doc = doc[0] if doc else ""


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, name, doc in _ACCEPTANCE:
        terminalreporter.write_line(f"{outcome:<7} {name}: {doc}")
