from contextlib import contextmanager

import pytest

_results: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """``with criterion(n, title): ...`` records a PASS/FAIL line for the summary."""
    @contextmanager
    def record(number, title):
        try:
            yield
        except BaseException:
            _results[number] = (False, title)
            print(f"FAIL criterion {number}: {title}")
            raise
        _results[number] = (True, title)
        print(f"PASS criterion {number}: {title}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        ok, title = _results[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}")
