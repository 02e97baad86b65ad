"""Shared fixtures and oracle helpers."""
from __future__ import annotations

import numpy as np
import pytest

from ergodesc.noise import gen_pink, gen_white, unsign


def binomial_cascade(p: float, depth: int) -> np.ndarray:
    """Deterministic binomial measure: each split gives share p to the left half."""
    m = np.array([1.0])
    for _ in range(depth):
        m = np.column_stack([m * p, m * (1 - p)]).ravel()
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def white_50k():
    return gen_white(50_000, 11)


@pytest.fixture(scope="session")
def pink_50k():
    return gen_pink(50_000, 12)


@pytest.fixture(scope="session")
def unsigned_pink_1000():
    return unsign(gen_pink(1000, 13))


@pytest.fixture(scope="session")
def cascade():
    return binomial_cascade(0.6, 12)


_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Record one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""
    def record(number: int, name: str, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
