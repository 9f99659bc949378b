import numpy as np
import pytest

from turbscale import FlowParameters, SimilarityModel

REFERENCE_RE = (6000.0, 18000.0, 300000.0)
NU, EPS = 1.5e-5, 1.0


def reference_flows(res=REFERENCE_RE):
    return [FlowParameters.from_reynolds(re, NU, EPS) for re in res]


def inertial_grid(n=60, lo=1e2, hi=1e4):
    """Separations spanning r / lambda_k in [lo, hi] for the shared lambda_k."""
    lk = reference_flows()[0].lambda_k
    return lk * np.logspace(np.log10(lo), np.log10(hi), n)


@pytest.fixture
def model():
    return SimilarityModel(c0=1.5, c1=2.0, alpha1=0.29, b3=0.8)


@pytest.fixture
def flows():
    return reference_flows()


# one line per acceptance criterion, printed after the test run
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(line)
