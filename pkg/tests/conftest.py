import numpy as np
import pytest

import wntest as w
from wntest.critical_values import TableStore


@pytest.fixture(scope="session")
def small_store():
    """Quick Monte Carlo tables for unit tests of the test assembly.

    Deliberately small; the acceptance suite uses the frozen production
    tables shipped with the package.
    """
    store = TableStore()
    store.add(w.tabulate_lobato(reps=60_000, grid=400, seed=101))
    store.add(w.tabulate_cvm(reps=60_000, truncation=2_000, seed=102))
    store.add(w.tabulate_maxtest(300, 17, reps=20_000, seed=103))
    store.add(w.tabulate_maxtest(199, 14, reps=20_000, seed=104))
    return store


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
