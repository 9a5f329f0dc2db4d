import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def bipolar(rng, *shape):
    return rng.choice(np.array([-1.0, 1.0]), size=shape)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request, capsys):
    """Print one verdict line per acceptance criterion, and keep it for the summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def emit(criterion, ok, detail):
        verdict = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        line = f"criterion {criterion:>2}: {verdict}  {detail}"
        lines.append(line)
        with capsys.disabled():
            print("\n" + line)

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
