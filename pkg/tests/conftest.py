"""Collects one verdict line per acceptance criterion and prints them at the end of the run."""

import pytest

_VERDICTS = []


@pytest.fixture
def criterion():
    def record(number, title, passed, detail=""):
        _VERDICTS.append((number, title, bool(passed), detail))
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_VERDICTS, key=lambda v: str(v[0])):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}  {detail}".rstrip())
