import pytest

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion.

    The test calls ``criterion(id, passed, detail)`` once per criterion; the
    line is printed immediately and repeated in the terminal summary.
    """
    def record(cid: str, passed: bool, detail: str):
        ACCEPTANCE[cid] = (bool(passed), detail)
        print(f"{cid} {'PASS' if passed else 'FAIL'}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if passed else 'FAIL'}: {detail}")
