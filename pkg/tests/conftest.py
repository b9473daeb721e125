import pytest

_VERDICTS = []


class Verdicts:
    """Collects one line per acceptance criterion for the terminal summary."""

    def check(self, number, title, ok, detail):
        _VERDICTS.append((number, "PASS" if ok else "FAIL", title, detail))
        assert ok, f"criterion {number} ({title}): {detail}"


@pytest.fixture(scope="session")
def verdicts():
    return Verdicts()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, title, detail in sorted(_VERDICTS):
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} | {detail}")
