import pytest

# (label, passed, detail) for every acceptance criterion evaluated in this session
ACCEPTANCE = []


@pytest.fixture
def verdict(capsys):
    """Record and print one PASS/FAIL line, then assert on it."""

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        ACCEPTANCE.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
