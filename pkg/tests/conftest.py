import json
from pathlib import Path

import numpy as np
import pytest

FROZEN = Path(__file__).parent / "oracles" / "frozen.json"


def cunpack(d):
    return np.asarray(d["re"]) + 1j * np.asarray(d["im"])


@pytest.fixture(scope="session")
def frozen():
    return json.loads(FROZEN.read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def stable_matrix(rng, n, radius=0.9):
    M = rng.standard_normal((n, n))
    return M * (radius / np.max(np.abs(np.linalg.eigvals(M))))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
