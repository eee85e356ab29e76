import pytest

_LOG_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LOG_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion and assert it."""
    log = request.config.stash[_LOG_KEY]

    def record(criterion, label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {label}"
        if detail:
            line += f" ({detail})"
        log.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_LOG_KEY, [])
    if log:
        terminalreporter.section("acceptance criteria")
        for line in log:
            terminalreporter.write_line(line)
