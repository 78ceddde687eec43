"""Exact KL divergence and feature-length statistics."""
from __future__ import annotations

from typing import Iterable

import numpy as np
from scipy.special import logsumexp

from .data import Context
from .features import Feature, compatible
from .loglinear import ENUMERATION_CAP, LogLinearModel, all_states, log_scores

METRIC_COLUMNS = ("seed", "n", "D", "algorithm", "kl", "avg_len", "avg_len_f0", "avg_len_f1", "runtime_ms")


def kl_exact(p: LogLinearModel, q: LogLinearModel, cap: int = ENUMERATION_CAP) -> float:
    """KL(p || q) in nats by enumerating every assignment."""
    if p.schema != q.schema:
        raise ValueError("KL needs both models over the same schema")
    states = all_states(p.schema, cap)
    lp = log_scores(p, states)
    lp = lp - logsumexp(lp)
    lq = log_scores(q, states)
    lq = lq - logsumexp(lq)
    return float(np.sum(np.exp(lp) * (lp - lq)))


def avg_feature_length(fs: Iterable[Feature]) -> float:
    lengths = [len(f) for f in fs]
    if not lengths:
        raise ValueError("average length of an empty feature set")
    return sum(lengths) / len(lengths)


def avg_feature_length_in_context(fs: Iterable[Feature], c: Context, mode: str = "binding") -> float:
    """Average scope size over the features that go with context ``c``.

    ``mode="binding"`` keeps features that bind every variable of ``c`` to its value in
    ``c``, i.e. features whose indicator requires the context. ``mode="compatible"`` also
    keeps features that leave some of those variables unbound.
    """
    if mode == "binding":
        wanted = set(c.bindings)
        keep = lambda f: wanted.issubset(f.bindings)  # noqa: E731
    elif mode == "compatible":
        keep = lambda f: compatible(f, c)  # noqa: E731
    else:
        raise ValueError(f"unknown mode {mode!r}")
    lengths = [len(f) for f in fs if keep(f)]
    if not lengths:
        raise ValueError(f"no feature goes with the context {c}")
    return sum(lengths) / len(lengths)


def flag_feature_length(fs: Iterable[Feature], flag: int, value: int) -> float:
    """Per-flag-value tally: average length of the features binding X_flag = value."""
    return avg_feature_length_in_context(fs, Context(((flag, value),)))
