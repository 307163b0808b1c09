import os

import pytest

from qubofs import MetricKind, generate_friedman1

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def auto_path() -> str:
    return os.path.join(DATA_DIR, "imports-85.data")


@pytest.fixture(scope="session")
def small_friedman():
    return generate_friedman1(80, 10, 1.0, seed=4)


@pytest.fixture(scope="session")
def pcc_metric():
    return MetricKind("pcc")
