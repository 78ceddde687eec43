"""Pearson chi-square independence tests on datasets and context slices.

Every tester exposes ``independent(a, b, given=(), context=Context())``. ``context``
selects the rows agreeing with a partial assignment; ``given`` lists variables whose
joint values stratify the test. Learners only ever talk to that method, so an exact
oracle (see :mod:`cspc.oracle`) can stand in for the statistical test.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
from scipy.special import gammaincc

from .data import Context, Dataset, slice_by_context


@dataclass(frozen=True)
class TestConfig:
    __test__ = False

    alpha: float = 0.05
    min_expected_count: float = 1.0
    min_slice_rows: int = 20

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.min_expected_count < 0 or self.min_slice_rows < 0:
            raise ValueError("reliability thresholds must be non-negative")


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    statistic: float
    dof: int
    p_value: float
    independent: bool
    reliable: bool


class IndependenceTester(Protocol):
    def independent(self, a: int, b: int, given: Sequence[int] = (),
                    context: Context = Context()) -> bool: ...


def chi2_sf(statistic: float, dof: int) -> float:
    """Upper tail of the chi-square distribution, Q(dof/2, statistic/2)."""
    if dof <= 0:
        raise ValueError("dof must be positive")
    if statistic <= 0:
        return 1.0
    return float(gammaincc(0.5 * dof, 0.5 * statistic))


def _stratum_terms(counts: np.ndarray) -> tuple[float, float]:
    """Pearson statistic of one table and its smallest expected count."""
    total = counts.sum()
    if total == 0:
        return 0.0, 0.0
    expected = np.outer(counts.sum(axis=1), counts.sum(axis=0)) / total
    nz = expected > 0
    stat = float((((counts - expected) ** 2)[nz] / expected[nz]).sum())
    return stat, float(expected.min())


def pearson_from_tables(tables: Sequence[np.ndarray], cfg: TestConfig) -> TestOutcome:
    """Stratified Pearson test: statistics and dof summed over the non-empty tables.

    Cells with zero expected count are skipped in the statistic without reducing dof.
    The outcome is unreliable when fewer than ``min_slice_rows`` rows are present or any
    non-empty table has an expected count below ``min_expected_count``; unreliable
    outcomes never report independence.
    """
    stat, dof, total, reliable = 0.0, 0, 0, True
    for t in tables:
        n = int(t.sum())
        if n == 0:
            continue
        s, emin = _stratum_terms(t)
        stat += s
        dof += (t.shape[0] - 1) * (t.shape[1] - 1)
        total += n
        if emin < cfg.min_expected_count:
            reliable = False
    if dof == 0:
        dof = (tables[0].shape[0] - 1) * (tables[0].shape[1] - 1) if len(tables) else 1
        reliable = False
    if total < cfg.min_slice_rows:
        reliable = False
    p = chi2_sf(stat, dof)
    return TestOutcome(stat, dof, p, reliable and p > cfg.alpha, reliable)


def _tables(rows: np.ndarray, arities: Sequence[int], a: int, b: int,
            given: Sequence[int]) -> list[np.ndarray]:
    ra, rb = arities[a], arities[b]
    cells = rows[:, a] * rb + rows[:, b]
    strata = np.zeros(len(rows), dtype=np.int64)
    n_strata = 1
    for g in given:
        strata = strata * arities[g] + rows[:, g]
        n_strata *= arities[g]
    flat = np.bincount(strata * (ra * rb) + cells, minlength=n_strata * ra * rb)
    return list(flat.reshape(n_strata, ra, rb))


def chi_square_pairwise(d: Dataset, a: int, b: int, cfg: TestConfig = TestConfig()) -> TestOutcome:
    if a == b:
        raise ValueError("cannot test a variable against itself")
    return pearson_from_tables(_tables(d.rows, d.schema.arities, a, b, ()), cfg)


def chi_square_conditional(d: Dataset, a: int, b: int, given: Sequence[int],
                           cfg: TestConfig = TestConfig()) -> TestOutcome:
    """X_a _|_ X_b | X_given, statistic and dof summed over the strata of ``given``."""
    given = tuple(given)
    if a == b or a in given or b in given:
        raise ValueError("test variables must be distinct and outside the conditioning set")
    return pearson_from_tables(_tables(d.rows, d.schema.arities, a, b, given), cfg)


def csi_test(d: Dataset, a: int, b: int, context: Context,
             cfg: TestConfig = TestConfig()) -> TestOutcome:
    """Pairwise test run on the rows matching ``context``."""
    if a == b:
        raise ValueError("cannot test a variable against itself")
    if a in context.variables or b in context.variables:
        raise ValueError(f"X{a} or X{b} is bound in the context {context}")
    return chi_square_pairwise(slice_by_context(d, context), a, b, cfg)


class ChiSquareTester:
    """Memoised Pearson tests over one dataset. Also counts the tests actually run."""

    def __init__(self, data: Dataset, cfg: TestConfig = TestConfig()):
        self.data = data
        self.cfg = cfg
        self.calls = 0
        self._cache: dict[tuple, TestOutcome] = {}
        arities = data.schema.arities
        self._masks = [[data.rows[:, v] == x for x in range(arities[v])] for v in range(data.schema.n)]

    def outcome(self, a: int, b: int, given: Sequence[int] = (),
                context: Context = Context()) -> TestOutcome:
        if a == b:
            raise ValueError("cannot test a variable against itself")
        given = tuple(sorted(given))
        bound = context.variables
        if a in bound or b in bound or a in given or b in given or bound & set(given):
            raise ValueError("test variables, conditioning set and context must be disjoint")
        a, b = min(a, b), max(a, b)
        key = (a, b, given, context.bindings)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self.calls += 1
        rows = self.data.rows
        if len(context):
            mask = np.ones(len(rows), dtype=bool)
            for v, x in context.bindings:
                mask &= self._masks[v][x]
            rows = rows[mask]
        out = pearson_from_tables(_tables(rows, self.data.schema.arities, a, b, given), self.cfg)
        self._cache[key] = out
        return out

    def independent(self, a: int, b: int, given: Sequence[int] = (),
                    context: Context = Context()) -> bool:
        return self.outcome(a, b, given, context).independent
