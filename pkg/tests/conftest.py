import pytest

_RESULTS = {}


@pytest.fixture
def report():
    """Record one acceptance criterion's outcome for the end-of-run summary."""

    def _report(number, title, passed, detail):
        _RESULTS[number] = (title, bool(passed), detail)
        return bool(passed)

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, detail = _RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}")
