"""Print one PASS/FAIL line per numbered acceptance criterion after the run."""

import re

_results = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if m:
        n = int(m.group(1))
        # a criterion spanning several tests passes only if all of them do
        if _results.get(n, "passed") == "passed":
            _results[n] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n in sorted(_results):
        verdict = "PASS" if _results[n] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}")
