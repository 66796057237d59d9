import pytest

_LINES: list[str] = []


class AcceptanceLog:
    """Records one PASS/FAIL line per acceptance check and returns the verdict."""

    def check(self, name: str, value: float, threshold: float, passed: bool | None = None, cmp: str = "<=") -> bool:
        if passed is None:
            passed = value <= threshold if cmp == "<=" else value >= threshold
        line = f"{'PASS' if passed else 'FAIL'}  {name}: {value:.4g} (need {cmp} {threshold:g})"
        _LINES.append(line)
        print(line)
        return bool(passed)


@pytest.fixture
def acceptance() -> AcceptanceLog:
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance checks")
        for line in _LINES:
            terminalreporter.write_line(line)
