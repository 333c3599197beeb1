import numpy as np
import pytest

from ccp.streams import run_rng


@pytest.fixture
def rng():
    return run_rng(20240611)


def pytest_configure(config):
    np.seterr(over="raise", invalid="raise", divide="ignore")


_GATE_KEY = pytest.StashKey[list]()


@pytest.fixture
def gate(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(_GATE_KEY, [])

    def record(number, title, ok, detail, elapsed, budget):
        verdict = bool(ok) and elapsed <= budget
        mark = "PASS" if verdict else "FAIL"
        line = f"[{mark}] criterion {number:>2}: {title} | {detail} | {elapsed:.1f}s (budget {budget:g}s)"
        lines.append((number, line))
        print(line)
        assert verdict, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_GATE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines, key=lambda t: t[0]):
            terminalreporter.write_line(line)
