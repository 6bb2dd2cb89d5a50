import math

import numpy as np
import pytest

from tiltrate import FiniteDistribution, RdProblem

LN2 = math.log(2.0)
LN3 = math.log(3.0)


def h2(x: float) -> float:
    """Binary entropy in nats."""
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log(1.0 - x)


def random_dist(rng, size=None) -> FiniteDistribution:
    n = int(size or rng.integers(2, 6))
    probs = rng.random(n) + 0.1
    probs /= probs.sum()
    values = rng.random(n) * 2.0
    # keep values apart so merging never kicks in
    values = np.sort(values) + np.arange(n) * 1e-3
    return FiniteDistribution(values, probs)


def random_problem(rng, max_letters=5) -> RdProblem:
    k = int(rng.integers(2, max_letters + 1))
    j = int(rng.integers(2, max_letters + 1))
    source = rng.random(k) + 0.1
    source /= source.sum()
    coding = rng.random(j) + 0.1
    coding /= coding.sum()
    table = rng.random((k, j)) * 2.0
    return RdProblem(source, coding, table)


def feasible_delta(rng, problem) -> float:
    """A budget strictly between the floor and the zero-force distortion."""
    floor = float(np.dot(problem.source_probs,
                         problem.distortion.min(axis=1)))
    top = float(np.dot(problem.source_probs,
                       (problem.distortion * problem.coding_probs).sum(axis=1)))
    for _ in range(100):
        u = rng.uniform(0.15, 0.95)
        delta = floor + u * (top - floor)
        if delta > floor + 1e-9 * max(1.0, abs(floor)):
            return delta
    pytest.skip("degenerate random problem: no interior budget")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def bss() -> RdProblem:
    """Uniform bit, uniform coding law, error-counting penalty."""
    return RdProblem([0.5, 0.5], [0.5, 0.5], [[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def asym() -> RdProblem:
    """Skewed source with an asymmetric penalty table."""
    return RdProblem([0.7, 0.3], [0.5, 0.5], [[0.0, 1.0], [2.0, 0.0]])
