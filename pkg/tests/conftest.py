import pytest

from mnaevent.cli import run

CLOCK = "2026-01-01T00:00:00Z"


@pytest.fixture(scope="session")
def economy(tmp_path_factory):
    """A small synthetic economy written through the CLI."""
    out = tmp_path_factory.mktemp("economy")
    code = run(["simulate", "--out", str(out), "--n-events", "240", "--quiet-days", "1", "--reps", "0",
                "--seed", "3", "--fixed-clock", CLOCK])
    assert code == 0
    return out


@pytest.fixture(scope="session")
def xsection_files(tmp_path_factory):
    out = tmp_path_factory.mktemp("xsection")
    code = run(["simulate", "--design", "xsection", "--out", str(out), "--n-stocks", "20", "--n-months", "84",
                "--premium", "0.5", "--reps", "0", "--seed", "4", "--fixed-clock", CLOCK])
    assert code == 0
    return out


def pytest_configure(config):
    config._acceptance = {}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {detail}"
        request.config._acceptance[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
