import pytest

ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def criterion():
    """Record a one-line verdict for an acceptance criterion before asserting it."""

    def record(key: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE_LINES[key] = f"{key:<4} {'PASS' if passed else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[key])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
