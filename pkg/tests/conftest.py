import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("cvlab", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("cvlab")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(k, title, ok, detail)``; returns ``ok``."""

    def record(k, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {k:>2}: {title} | {detail}"
        _ACCEPTANCE.append((k, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
