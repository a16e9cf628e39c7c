import numpy as np
import pytest


def random_hermitian(rng, m, scale=1.0):
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return scale * 0.5 * (a + a.conj().T)


def random_psd(rng, m, q=None):
    q = q or 2 * m
    x = rng.standard_normal((m, q)) + 1j * rng.standard_normal((m, q))
    return x @ x.conj().T / q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance(request):
    """Records one pass/fail line per acceptance criterion for the run summary."""
    name = request.node.name

    def record(passed, detail):
        _ACCEPTANCE[name] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section('acceptance criteria')
    for name, (ok, detail) in _ACCEPTANCE.items():
        terminalreporter.write_line(f'{"PASS" if ok else "FAIL"}  {name}: {detail}')
