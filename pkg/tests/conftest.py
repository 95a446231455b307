"""Shared fixtures, plus a terminal section collecting acceptance results."""
import pytest

ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance check, then assert it.

    The line is printed immediately (visible with -s or on failure) and
    replayed in the end-of-run "acceptance criteria" section either way.
    """
    def _record(num: int, ok: bool, detail: str):
        line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} {detail}"
        ACCEPTANCE.append(line)
        print(line)
        assert ok, line
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
