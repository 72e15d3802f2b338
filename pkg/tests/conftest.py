import pytest

from cbotrunc import backend as cbo_backend

BACKENDS = cbo_backend.available()

# filled by test_acceptance; printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
