import pytest

CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """Record ``(number, passed, detail)`` for the acceptance summary, then assert."""

    def record(number: int, passed: bool, detail: str) -> None:
        CRITERIA[number] = (bool(passed), detail)
        print(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
        assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
