import itertools

import numpy as np
import pytest
from hypothesis import settings

from cspc.data import Dataset, Schema
from cspc.features import Feature, FeatureSet

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# variable order used for the three-variable running example
XA, XB, XF = 0, 1, 2


def triplets(flag_value):
    return [Feature(((XA, a), (XB, b), (XF, flag_value))) for b in (0, 1) for a in (0, 1)]


def pairs_at(flag_value):
    return [Feature(((v, x), (XF, flag_value))) for v in (XA, XB) for x in (0, 1)]


@pytest.fixture
def example_features() -> FeatureSet:
    """Four triplets at X_f=0 and four pairs at X_f=1 over (X_a, X_b, X_f)."""
    return FeatureSet(triplets(0) + pairs_at(1))


@pytest.fixture
def triplet_features() -> FeatureSet:
    return FeatureSet(triplets(0) + triplets(1))


def enumeration(n: int, repeat: int = 1) -> Dataset:
    rows = [r for r in itertools.product((0, 1), repeat=n) for _ in range(repeat)]
    return Dataset(Schema.binary(n), np.array(rows))


def chain_data(rows=5000, seed=0) -> Dataset:
    """X0 -> X1 -> X2 where each link copies its parent with probability 0.9."""
    rng = np.random.default_rng(seed)
    x0 = rng.integers(0, 2, rows)
    x1 = np.where(rng.random(rows) < 0.9, x0, 1 - x0)
    x2 = np.where(rng.random(rows) < 0.9, x1, 1 - x1)
    return Dataset(Schema.binary(3), np.stack([x0, x1, x2], axis=1))


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        lines.append((number, f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} | {detail}"))
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
