"""Synthetic models with controlled context-specific independences.

A fully connected core of n-1 binary variables plus a flag X_f (the last variable).
Every core pair is dependent when X_f = 0 and independent given X_f = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .baselines import cliques_to_features
from .features import Feature, FeatureSet, Graph, atomic_features
from .data import Schema
from .loglinear import LogLinearModel


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    epsilon: float = 1.0
    w2_mean: float = 0.5
    w2_std: float = math.sqrt(0.001)
    seed: int = 0
    w2_floor: float = 0.01

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"the benchmark needs n >= 3 variables, got {self.n}")
        if not math.isfinite(self.epsilon):
            raise ValueError("epsilon must be finite")
        if self.w2_floor <= 0:
            raise ValueError("w2_floor must be positive")

    @property
    def flag(self) -> int:
        return self.n - 1


def solve_pairwise(epsilon: float, w2: float) -> float:
    """Diagonal potential value w0 giving log(w0^2 / w2^2) = epsilon."""
    if w2 <= 0:
        raise ValueError("w2 must be positive")
    return w2 * math.exp(epsilon / 2.0)


def symmetric_potential(epsilon: float, w2: float) -> np.ndarray:
    """2x2 table with w0 on the diagonal and w2 off it."""
    w0 = solve_pairwise(epsilon, w2)
    return np.array([[w0, w2], [w2, w0]])


def log_odds_ratio(phi: np.ndarray) -> float:
    return float(np.log(phi[0, 0] * phi[1, 1] / (phi[0, 1] * phi[1, 0])))


def benchmark_schema(n: int) -> Schema:
    return Schema.binary(n, [f"X{i}" for i in range(n - 1)] + ["Xf"])


def generate_model(cfg: GeneratorConfig) -> LogLinearModel:
    """Pairwise (X_a, X_f) features for every core variable, and triplet (X_a, X_b, X_f)
    features for every core pair.

    Triplets at X_f = 0 get a fresh epsilon-calibrated symmetric potential. Triplets at
    X_f = 1 carry the product of the two pairwise potentials at X_f = 1, so their
    log-weights are additive in x_a and x_b and the pair is independent in that context.
    """
    rng = np.random.default_rng(cfg.seed)
    f = cfg.flag

    def draw_w2() -> float:
        return max(cfg.w2_floor, float(rng.normal(cfg.w2_mean, cfg.w2_std)))

    weights: dict[Feature, float] = {}
    pair_log = {}
    for a in range(cfg.n - 1):
        phi = np.log(symmetric_potential(cfg.epsilon, draw_w2()))
        for xa in (0, 1):
            for xf in (0, 1):
                weights[Feature(((a, xa), (f, xf)))] = float(phi[xa, xf])
        pair_log[a] = phi[:, 1]
    for a, b in combinations(range(cfg.n - 1), 2):
        phi = np.log(symmetric_potential(cfg.epsilon, draw_w2()))
        for xa in (0, 1):
            for xb in (0, 1):
                weights[Feature(((a, xa), (b, xb), (f, 0)))] = float(phi[xa, xb])
                weights[Feature(((a, xa), (b, xb), (f, 1)))] = float(pair_log[a][xa] + pair_log[b][xb])
    fs = FeatureSet(weights)
    return LogLinearModel(benchmark_schema(cfg.n), fs, [weights[g] for g in fs])


def csi_structure(cfg: GeneratorConfig) -> FeatureSet:
    """Generator features with the X_f = 1 triplets factorised away (pairs only at X_f = 1)."""
    f = cfg.flag
    return FeatureSet(g for g in generate_model(cfg).features
                      if not (len(g) == 3 and g.value(f) == 1))


def reference_structures(cfg: GeneratorConfig) -> tuple[FeatureSet, FeatureSet, FeatureSet]:
    """(empty, full, truth): atomic features, one clique over all variables, generator features."""
    schema = benchmark_schema(cfg.n)
    empty = atomic_features(schema)
    full = cliques_to_features(Graph.complete(cfg.n), schema)
    truth = generate_model(cfg).features
    return empty, full, truth
