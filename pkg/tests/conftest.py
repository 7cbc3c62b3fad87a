import pytest

_ACCEPTANCE = []


@pytest.fixture
def record_criterion():
    """Record ``(criterion, passed, detail)`` for the acceptance summary."""

    def record(name, passed, detail=""):
        _ACCEPTANCE.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
