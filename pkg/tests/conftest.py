import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for the acceptance summary, then assert."""

    def report(label, ok, detail=""):
        _LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
