"""Shared pytest hooks: per-criterion pass/fail lines for the acceptance suite."""

import pytest

CRITERIA = {
    1: "sine-wave rank recovery, batch and streaming",
    2: "rank overestimation in the tight noise regime",
    3: "error bound after every insertion on random streams",
    4: "incremental SVD error identity",
    5: "batch and streaming agree when everything is the initial batch",
    6: "streaming memory below a quarter of batch",
    7: "per-slice time grows at most linearly",
    8: "property suites",
}

_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        n = marker.args[0]
        ok = report.passed
        _outcomes.setdefault(n, []).append(ok)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        status = "PASS" if all(_outcomes[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {CRITERIA.get(n, '')}")
