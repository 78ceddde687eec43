"""Log-linear models over indicator features.

p(x) is proportional to exp(sum_j theta_j f_j(x)). Exact routines enumerate the state
space and are guarded by ``ENUMERATION_CAP``; conditionals, pseudo-log-likelihood and
the Gibbs kernel only touch the features that mention the resampled variable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .data import Dataset, Schema, row_counts
from .features import FeatureSet, features_from_json, features_to_json

ENUMERATION_CAP = 2 ** 22


class NumericError(ArithmeticError):
    """Objective or weights became non-finite."""


def _satisfied(states: np.ndarray, bindings: np.ndarray) -> np.ndarray:
    """(N, F) indicator matrix; ``bindings`` uses -1 for unbound variables."""
    if bindings.shape[0] == 0:
        return np.zeros((states.shape[0], 0), dtype=bool)
    return np.all((bindings[None, :, :] < 0) | (states[:, None, :] == bindings[None, :, :]), axis=2)


@dataclass(frozen=True)
class _VariableBlock:
    index: np.ndarray  # features whose scope contains the variable
    others: np.ndarray  # their binding rows with the variable itself unbound
    values: np.ndarray  # value each of them assigns to the variable
    onehot: np.ndarray  # (len(index), arity)


@dataclass(frozen=True, eq=False)
class LogLinearModel:
    schema: Schema
    features: FeatureSet
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1).copy()
        if w.shape[0] != len(self.features):
            raise ValueError(f"{len(self.features)} features but {w.shape[0]} weights")
        if not np.all(np.isfinite(w)):
            raise NumericError("model weights must be finite")
        if self.features.max_variable() >= self.schema.n:
            raise ValueError("feature references a variable outside the schema")
        for f in self.features:
            f.validate(self.schema)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def zeros(cls, schema: Schema, features: FeatureSet) -> "LogLinearModel":
        return cls(schema, features, np.zeros(len(features)))

    def with_weights(self, weights) -> "LogLinearModel":
        return LogLinearModel(self.schema, self.features, weights)

    @cached_property
    def bindings(self) -> np.ndarray:
        return self.features.binding_matrix(self.schema.n)

    @cached_property
    def blocks(self) -> list[_VariableBlock]:
        out = []
        B = self.bindings
        for a, arity in enumerate(self.schema.arities):
            idx = np.nonzero(B[:, a] >= 0)[0]
            others = B[idx].copy()
            others[:, a] = -1
            values = B[idx, a]
            onehot = np.zeros((len(idx), arity))
            onehot[np.arange(len(idx)), values] = 1.0
            out.append(_VariableBlock(idx, others, values, onehot))
        return out

    def to_json(self) -> dict:
        return {"schema": self.schema.to_json(), "features": features_to_json(self.features, self.weights)}

    @classmethod
    def from_json(cls, obj: dict) -> "LogLinearModel":
        schema = Schema.from_json(obj["schema"])
        fs, weights = features_from_json(obj["features"])
        return cls(schema, fs, weights)


def save_model(m: LogLinearModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(m.to_json(), fh, indent=1)
        fh.write("\n")


def load_model(path: str | Path) -> LogLinearModel:
    with open(path, encoding="utf-8") as fh:
        return LogLinearModel.from_json(json.load(fh))


def all_states(schema: Schema, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Every complete assignment, last variable varying fastest."""
    count = schema.state_count()
    if count > cap:
        raise ValueError(f"state space of {count} assignments exceeds the enumeration cap {cap}")
    if schema.n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices(schema.arities).reshape(schema.n, -1).T.astype(np.int64)


def log_scores(m: LogLinearModel, states: np.ndarray) -> np.ndarray:
    states = np.atleast_2d(np.asarray(states, dtype=np.int64))
    return _satisfied(states, m.bindings).astype(float) @ m.weights


def log_score(m: LogLinearModel, x: Sequence[int]) -> float:
    return float(log_scores(m, np.asarray([x]))[0])


def log_partition_exact(m: LogLinearModel, cap: int = ENUMERATION_CAP) -> float:
    return float(logsumexp(log_scores(m, all_states(m.schema, cap))))


def joint_distribution(m: LogLinearModel, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Probabilities of every state, shaped by the schema arities."""
    s = log_scores(m, all_states(m.schema, cap))
    p = np.exp(s - logsumexp(s))
    return p.reshape(m.schema.arities)


def probability(m: LogLinearModel, x: Sequence[int], cap: int = ENUMERATION_CAP) -> float:
    return math.exp(log_score(m, x) - log_partition_exact(m, cap))


def conditional_logits(m: LogLinearModel, a: int, states: np.ndarray) -> np.ndarray:
    """Unnormalised log p(X_a = v | rest) for each state row and value v."""
    blk = m.blocks[a]
    sat = _satisfied(states, blk.others)
    return (sat * m.weights[blk.index]) @ blk.onehot


def conditional(m: LogLinearModel, a: int, x: Sequence[int]) -> np.ndarray:
    """Distribution of X_a given the other coordinates of ``x`` (x[a] is ignored)."""
    logits = conditional_logits(m, a, np.asarray([x], dtype=np.int64))[0]
    return np.exp(logits - logsumexp(logits))


class _PLLProblem:
    """Pseudo-log-likelihood over fixed weighted rows; only the weights vary."""

    def __init__(self, m: LogLinearModel, states: np.ndarray, counts: np.ndarray):
        self.n_features = len(m.features)
        self.counts = counts
        self.constant = 0.0
        self.terms = []
        rows = np.arange(len(states))
        for a, blk in enumerate(m.blocks):
            if len(blk.index) == 0:
                self.constant -= math.log(m.schema.arities[a]) * counts.sum()
                continue
            sat = _satisfied(states, blk.others).astype(float)
            hit = (states[:, a][:, None] == blk.values[None, :]).astype(float)
            self.terms.append((blk, sat, hit, rows, states[:, a]))

    def evaluate(self, theta: np.ndarray, need_grad: bool = True) -> tuple[float, np.ndarray | None]:
        total = self.constant
        grad = np.zeros(self.n_features) if need_grad else None
        for blk, sat, hit, rows, observed in self.terms:
            logits = (sat * theta[blk.index]) @ blk.onehot
            lse = logsumexp(logits, axis=1)
            total += float(self.counts @ (logits[rows, observed] - lse))
            if need_grad:
                probs = np.exp(logits - lse[:, None])
                grad[blk.index] += self.counts @ (sat * (hit - probs[:, blk.values]))
        return total, grad


def _problem(m: LogLinearModel, d: Dataset, normalise: bool = False) -> _PLLProblem:
    if not len(d):
        raise ValueError("pseudo-log-likelihood needs a non-empty dataset")
    states, counts = row_counts(d)
    counts = counts.astype(float)
    return _PLLProblem(m, states, counts / counts.sum() if normalise else counts)


def pseudo_log_likelihood(m: LogLinearModel, d: Dataset) -> float:
    """Sum over rows and variables of log p(x_a | x_rest)."""
    return _problem(m, d).evaluate(m.weights, need_grad=False)[0]


def pll_gradient(m: LogLinearModel, d: Dataset) -> np.ndarray:
    return _problem(m, d).evaluate(m.weights)[1]


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-5
    method: str = "lbfgs"  # or "gradient"
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_increase: float = 1e-4

    def __post_init__(self):
        if self.gradient_tolerance <= 0:
            raise ValueError("gradient_tolerance must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if self.method not in ("gradient", "lbfgs"):
            raise ValueError(f"unknown optimiser {self.method!r}")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")


@dataclass(frozen=True)
class FitResult:
    model: LogLinearModel
    pll: float
    initial_pll: float
    iterations: int
    converged: bool


def fit_report(m: LogLinearModel, d: Dataset, cfg: FitConfig = FitConfig()) -> FitResult:
    """Maximise the unregularised pseudo-log-likelihood starting from ``m``'s weights.

    The optimiser works on the per-row average; convergence means the infinity norm of
    the averaged gradient dropped below ``gradient_tolerance``.
    """
    problem = _problem(m, d, normalise=True)
    scale = float(len(d))

    def objective(theta):
        val, g = problem.evaluate(theta)
        if not np.isfinite(val) or not np.all(np.isfinite(g)):
            raise NumericError("pseudo-log-likelihood became non-finite")
        return val, g

    theta = m.weights.copy()
    f0, g = objective(theta)
    f = f0
    iterations = 0
    converged = bool(np.max(np.abs(g), initial=0.0) < cfg.gradient_tolerance)

    if not converged and cfg.max_iterations > 0 and len(theta):
        if cfg.method == "lbfgs":
            res = minimize(lambda t: tuple(-v for v in objective(t)), theta, jac=True,
                           method="L-BFGS-B",
                           options={"maxiter": cfg.max_iterations, "gtol": cfg.gradient_tolerance,
                                    "ftol": 0.0, "maxcor": 20})
            if -res.fun >= f0:
                theta = res.x
            iterations = int(res.nit)
            f, g = objective(theta)
            converged = bool(np.max(np.abs(g)) < cfg.gradient_tolerance)
        else:
            step = cfg.initial_step
            while iterations < cfg.max_iterations:
                gg = float(g @ g)
                while True:
                    cand = theta + step * g
                    fc, gc = objective(cand)
                    if fc >= f + cfg.sufficient_increase * step * gg:
                        break
                    step *= cfg.shrink
                    if step < 1e-14:
                        break
                iterations += 1
                if step < 1e-14:
                    break
                theta, f, g = cand, fc, gc
                if np.max(np.abs(g)) < cfg.gradient_tolerance:
                    converged = True
                    break
                step *= 2.0

    return FitResult(m.with_weights(theta), f * scale, f0 * scale, iterations, converged)


def fit(m: LogLinearModel, d: Dataset, cfg: FitConfig = FitConfig()) -> LogLinearModel:
    return fit_report(m, d, cfg).model


@dataclass(frozen=True)
class GibbsConfig:
    chains: int = 10
    burn_in: int = 100
    samples_per_chain: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.chains < 1 or self.samples_per_chain < 1 or self.burn_in < 0:
            raise ValueError("chains and samples_per_chain must be positive, burn_in non-negative")


def gibbs_sample(m: LogLinearModel, cfg: GibbsConfig = GibbsConfig()) -> Dataset:
    """Systematic-scan Gibbs sampling, all chains advanced together.

    Chain c draws its start state and uniforms from its own stream spawned from
    ``cfg.seed``. After ``burn_in`` sweeps one row is kept per sweep. Rows are interleaved
    round-robin: row i comes from chain i % chains.
    """
    schema = m.schema
    n, C = schema.n, cfg.chains
    sweeps = cfg.burn_in + cfg.samples_per_chain
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(C)]
    arities = np.asarray(schema.arities)
    state = np.stack([rng.integers(0, arities) for rng in streams]).astype(np.int64)
    uniforms = np.stack([rng.random((sweeps, n)) for rng in streams], axis=1)  # (sweeps, C, n)

    out = np.empty((cfg.samples_per_chain, C, n), dtype=np.int64)
    for t in range(sweeps):
        for a in range(n):
            logits = conditional_logits(m, a, state)
            probs = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
            cdf = np.cumsum(probs, axis=1)
            state[:, a] = np.minimum((uniforms[t, :, a, None] >= cdf).sum(axis=1), arities[a] - 1)
        if t >= cfg.burn_in:
            out[t - cfg.burn_in] = state
    return Dataset(schema, out.reshape(-1, n))
