import numpy as np
import pytest

from qthermo import operators as ops


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def paulis():
    return ops.pauli()


def pauli_master_populations(rates):
    """Stationary populations of a classical rate equation.

    ``rates[i, j]`` is the rate of the jump i -> j. Solved with the
    Markov-chain tree formula's linear-algebra equivalent: the null vector of
    the transposed rate matrix, normalized.
    """
    n = rates.shape[0]
    W = rates.T.copy()
    W[np.diag_indices(n)] = -rates.sum(axis=1)
    A = np.vstack([W, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    p, *_ = np.linalg.lstsq(A, b, rcond=None)
    return p


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
