import re

import pytest

_criteria: dict[str, str] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = f"{int(m.group(1)):2d} {m.group(2)}"
    if report.when == "call" or report.outcome != "passed":
        if _criteria.get(key) != "FAIL":
            _criteria[key] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria):
        terminalreporter.write_line(f"criterion {key}: {_criteria[key]}")


@pytest.fixture(scope="session")
def golden_dir():
    from pathlib import Path
    return Path(__file__).parent / "data"
