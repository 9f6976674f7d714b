import pytest

VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line; returns the pass flag for the assert."""
    def record(number, ok, detail):
        VERDICTS.append((number, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number, ok, detail in sorted(VERDICTS, key=lambda v: v[0]):
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {detail}")
