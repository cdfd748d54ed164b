import numpy as np
import pytest

from dea_congestion.cli import bundled_cas_path, load_dataset
from dea_congestion.dataset import Dataset

# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def cas():
    return load_dataset(bundled_cas_path())


@pytest.fixture(scope="session")
def toy():
    """One input, one output: A=(1,1), B=(2,3), C=(3,2)."""
    return Dataset.from_rows([[1], [2], [3]], [[1], [3], [2]], ["A", "B", "C"])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: int(c[2:])):
        ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {cid}: {detail}")
