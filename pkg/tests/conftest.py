import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record ``(name, ok, detail)`` for the acceptance summary, then assert ``ok``."""

    def record(name, ok, detail):
        _CRITERIA.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    failed = sum(not ok for _, ok, _ in _CRITERIA)
    terminalreporter.write_line(f"{len(_CRITERIA) - failed}/{len(_CRITERIA)} criteria passed")
