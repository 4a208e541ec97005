import pytest

ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record one summary line per acceptance criterion and assert it."""

    def record(num: int, ok: bool, detail: str):
        line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[num] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
