import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.failed:
        _CRITERIA[n] = (report.nodeid, "FAIL")
    elif report.when == "call" and n not in _CRITERIA:
        _CRITERIA[n] = (report.nodeid, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        nodeid, status = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {status}  ({nodeid.split('::')[-1]})")
