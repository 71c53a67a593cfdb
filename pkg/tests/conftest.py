from contextlib import contextmanager

import pytest

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    @contextmanager
    def record(label):
        try:
            yield
        except BaseException:
            _ACCEPTANCE[label] = "FAIL"
            raise
        _ACCEPTANCE[label] = "PASS"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0][2:])):
        terminalreporter.write_line(f"{_ACCEPTANCE[label]} {label}")
