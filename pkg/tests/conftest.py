import numpy as np
import pytest

from lgcanard.model import ModelParams

A0, M0 = 0.5, -0.1


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def p_deg():
    return ModelParams.degenerate(A0, M0, 2.0, 0.05)


@pytest.fixture
def p_gen():
    return ModelParams(A0, M0, 0.0255, 1.7, 0.05)


def random_params(rng, n, eps=(1e-3, 0.2)):
    out = []
    while len(out) < n:
        A = rng.uniform(0.05, 0.95)
        M = rng.uniform(-0.95, -0.05)
        Q = rng.uniform(0.3, 4.0)
        C = rng.uniform(0.0, 0.6)
        e = rng.uniform(*eps)
        out.append(ModelParams(A, M, C, Q, e))
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
