import hypothesis
import numpy as np
import pytest

from rbadmm import BpdnProblem

hypothesis.settings.register_profile("default", deadline=None, max_examples=25)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=5)
hypothesis.settings.load_profile("default")


def random_bpdn(seed, N=16, M=32, lmbda=0.3, K=None):
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((N, M))
    sigma = rng.standard_normal(N if K is None else (N, K))
    return BpdnProblem(D, sigma, lmbda)


@pytest.fixture
def bpdn16():
    return random_bpdn(0)


# criterion number -> (passed, description); filled in by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {text}")
