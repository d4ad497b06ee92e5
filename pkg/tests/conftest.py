import time
from contextlib import contextmanager

import pytest

_ACCEPTANCE: list[str] = []


@contextmanager
def _timed(number: int, title: str, budget: float):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        ok = ok and elapsed < budget
        _ACCEPTANCE.append(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  ({elapsed:.2f} s, budget {budget:g} s)")
    assert elapsed < budget, f"criterion {number} took {elapsed:.2f} s, budget {budget:g} s"


@pytest.fixture
def criterion():
    return _timed


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
