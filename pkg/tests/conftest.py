import pytest

from entcon.cli import random_schmidt
from entcon.schmidt import validate_schmidt

# random:3:2024 resolves to this vector; pinned in test_cli
RANDOM_RANK3_SEED = 2024


def state_set():
    return [
        validate_schmidt([0.8, 0.2]),
        validate_schmidt([0.5, 0.5]),
        validate_schmidt([0.5, 0.3, 0.2]),
        random_schmidt(3, RANDOM_RANK3_SEED),
    ]


@pytest.fixture
def binary():
    return validate_schmidt([0.8, 0.2])


@pytest.fixture
def ternary():
    return validate_schmidt([0.5, 0.3, 0.2])


# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
