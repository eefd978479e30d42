import hypothesis
import numpy as np
import pytest

from phasefrac import synth
from phasefrac.core import AngleGrid, PhaseLibrary

hypothesis.settings.register_profile("default", deadline=None, max_examples=50)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")

np.seterr(all="raise", under="ignore")


def random_library(rng, m, k, sparse=True):
    """Non-negative random patterns; ``sparse`` zeroes most entries like peaky spectra."""
    x = rng.uniform(0.0, 1.0, size=(m, k))
    if sparse:
        x *= rng.uniform(size=(m, k)) < 0.4
    # no all-zero rows
    x[np.arange(m), rng.integers(0, k, size=m)] += 1.0
    names = tuple(f"p{j}" for j in range(m))
    return PhaseLibrary(x, names, AngleGrid(np.arange(k, dtype=float)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def ci_small():
    """Noise-free ci-small preset: (dataset, true library)."""
    return synth.generate(synth.preset("ci-small"))


# acceptance criteria report lines, printed at the end of the session
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, line = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {line}")
