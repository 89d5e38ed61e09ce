import numpy as np
import pytest
from hypothesis import strategies as st

from dpipac.divergences import DiscreteDistribution, MarkovKernel


def random_distribution(rng, k):
    m = rng.exponential(size=k)
    return DiscreteDistribution(m / m.sum())


def random_kernel(rng, k_in, k_out):
    m = rng.exponential(size=(k_in, k_out))
    return MarkovKernel(m / m.sum(axis=1, keepdims=True))


@st.composite
def distributions(draw, size=None, min_size=1, max_size=6, positive=True):
    k = size if size is not None else draw(st.integers(min_size, max_size))
    lo = 1e-3 if positive else 0.0
    w = draw(st.lists(st.floats(lo, 1.0), min_size=k, max_size=k))
    arr = np.array(w) + (0.0 if positive else 1e-12)
    return DiscreteDistribution(arr / arr.sum())


@st.composite
def distribution_pairs(draw, min_size=1, max_size=6):
    k = draw(st.integers(min_size, max_size))
    return draw(distributions(size=k)), draw(distributions(size=k))


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


# One line per acceptance criterion, echoed in the terminal summary so the
# verdicts show up even when output capture is on.
ACCEPTANCE_LINES: list[str] = []


def acceptance_report(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
