import pytest

_ACCEPTANCE = {}


@pytest.fixture
def verdict():
    """Record one acceptance line and fail the test if it did not pass."""

    def record(number, passed, detail, seconds=None):
        timing = f" [{seconds:.2f} s]" if seconds is not None else ""
        line = f"acceptance {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}{timing}"
        _ACCEPTANCE[number] = line
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
