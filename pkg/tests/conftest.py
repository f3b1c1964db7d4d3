import pytest

_acceptance = []


@pytest.fixture
def record():
    """Log one acceptance line: ``record(label, passed, detail)``."""
    def _record(label, passed, detail):
        _acceptance.append((label, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'} criterion {label}: {detail}")
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _acceptance:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}")
