"""CSPC: context-specific structure learning by generalising an initial feature set.

The outer loop visits one complete context per distinct training row. For each
context a PC-style inner loop tests X_a _|_ X_b | x_W, with W drawn from the
neighbours of X_a in the graph induced by the features compatible with the context,
and every positive answer factorises the features compatible with x_W.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .data import Context, Dataset, unique_rows
from .features import (Feature, FeatureSet, atomic_features, compatible,
                       context_adjacencies)
from .independence import ChiSquareTester, IndependenceTester, TestConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CsiStatement:
    """X_a independent of X_b in the context ``context``."""

    a: int
    b: int
    context: Context

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("a CSI needs two distinct variables")
        if self.a in self.context.variables or self.b in self.context.variables:
            raise ValueError(f"X{self.a} or X{self.b} is bound in {self.context}")


def initial_features(d: Dataset) -> FeatureSet:
    """One full-scope feature per distinct row."""
    if not len(d):
        raise ValueError("CSPC needs a non-empty dataset")
    return FeatureSet(Feature(tuple(enumerate(row))) for row in unique_rows(d))


def generalize(fs: FeatureSet, csi: CsiStatement) -> FeatureSet:
    """Replace every feature compatible with the CSI's context by its two projections,
    one without X_a and one without X_b. Projections with empty scope are dropped."""
    kept, factorised = [], []
    for f in fs:
        if compatible(f, csi.context):
            for var in (csi.a, csi.b):
                g = f.drop(var)
                if g is not None:
                    factorised.append(g)
        else:
            kept.append(f)
    return FeatureSet(kept + factorised)


def contextual_pc(fs: FeatureSet, x: Sequence[int], tester: IndependenceTester) -> FeatureSet:
    """PC-style elicitation of CSIs in the complete context ``x``.

    Loops over conditioning sizes k = 0, 1, ...; stops once no variable has an
    adjacency set with more than k neighbours besides the tested one.
    """
    n = len(x)
    x = tuple(int(v) for v in x)
    k = 0
    while True:
        for a in range(n):
            adj = context_adjacencies(fs, x, a)
            for b in sorted(adj):
                if b not in adj:
                    continue
                for w in combinations(sorted(adj - {b}), k):
                    ctx = Context(tuple((v, x[v]) for v in w))
                    if tester.independent(a, b, context=ctx):
                        fs = generalize(fs, CsiStatement(a, b, ctx))
                        log.debug("context %s: X%d _|_ X%d | %s", x, a, b, ctx)
                        adj = context_adjacencies(fs, x, a)
                        break
        k += 1
        largest = max((len(context_adjacencies(fs, x, a)) for a in range(n)), default=0)
        if largest - 1 < k:
            return fs


def cspc(d: Dataset, cfg: TestConfig = TestConfig(), tester: IndependenceTester | None = None,
         contexts: Sequence[Sequence[int]] | None = None) -> FeatureSet:
    """Learn a feature set from ``d``.

    ``tester`` defaults to memoised Pearson tests on ``d`` at ``cfg``; pass an exact
    oracle to study the algorithm free of sampling noise. ``contexts`` defaults to the
    distinct rows of ``d`` in order of first appearance.
    """
    fs = initial_features(d)
    tester = tester if tester is not None else ChiSquareTester(d, cfg)
    for x in (contexts if contexts is not None else unique_rows(d)):
        fs = contextual_pc(fs, x, tester)
    return fs | atomic_features(d.schema)
