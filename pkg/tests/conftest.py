import pytest

_LINES = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LINES] = {}


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash[_LINES]

    def record(key: str, ok: bool, detail: str) -> None:
        lines[key] = f"{'PASS' if ok else 'FAIL'}  {key}: {detail}"
        print(lines[key])
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines, key=lambda k: [int(t) if t.isdigit() else t for t in k.replace(".", " ").split()]):
        terminalreporter.write_line(lines[key])
