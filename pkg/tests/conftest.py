import pytest

_LINES = []


@pytest.fixture
def acceptance_line():
    """Record the one-line verdict of an acceptance criterion; the lines are echoed at the end of the run."""

    def record(number, passed, detail):
        line = f"AC{number:<2d} {'PASS' if passed else 'FAIL'}  {detail}"
        _LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s[2:4])):
            terminalreporter.write_line(line)
