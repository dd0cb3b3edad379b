import pytest

from mpqkd_ad.model import SystemParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def table1() -> SystemParams:
    return SystemParams()


@pytest.fixture
def acceptance_log():
    def log(criterion: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
