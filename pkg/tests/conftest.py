import pytest

_REPORT = []


class AcceptanceReport:
    def record(self, label, ok, detail=""):
        _REPORT.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        return ok

    def check(self, label, ok, detail=""):
        assert self.record(label, ok, detail), f"{label}: {detail}"


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceReport()


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
