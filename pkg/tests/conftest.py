import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_report


def pytest_runtest_logreport(report):
    if (
        report.when == "call"
        and report.failed
        and "test_acceptance" in report.nodeid
    ):
        acceptance_report.record(f"FAIL {report.nodeid}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_report.LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in acceptance_report.LINES:
            terminalreporter.write_line(line)
