"""Acceptance verdicts travel on report.user_properties and are printed as
one line per criterion at the end of the run."""
import pytest


@pytest.fixture
def record(request):
    def _record(criterion, passed, detail):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
        request.node.user_properties.append(("acceptance", line))
        print(line)
        return passed
    return _record


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full-size acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    reports = [rep for key in ("passed", "failed") for rep in terminalreporter.stats.get(key, [])
               if rep.when == "call"]
    # file order, regardless of outcome
    reports.sort(key=lambda rep: rep.location[1] or 0)
    lines = [value for rep in reports for name, value in rep.user_properties if name == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
