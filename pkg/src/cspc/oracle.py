"""Exact independence answers computed from an enumerated joint distribution."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .data import Context
from .loglinear import LogLinearModel, joint_distribution


def conditional_mutual_information(joint: np.ndarray, a: int, b: int,
                                   given: Sequence[int] = (),
                                   context: Context = Context()) -> float:
    """I(X_a; X_b | X_given) in nats under p(X | context), from a full joint table."""
    p = joint
    # index the context away, highest axis first so positions stay valid
    for v, x in sorted(context.bindings, reverse=True):
        p = np.take(p, x, axis=v)
    remaining = [v for v in range(joint.ndim) if v not in context.variables]
    axis = {v: i for i, v in enumerate(remaining)}
    given = sorted(given)
    keep = [a, b] + given
    drop = tuple(axis[v] for v in remaining if v not in keep)
    p = p.sum(axis=drop) if drop else p
    order = sorted(keep, key=lambda v: axis[v])
    p = np.moveaxis(p, [order.index(a), order.index(b)], [0, 1])
    p = p.reshape(p.shape[0], p.shape[1], -1)
    mass = p.sum()
    if mass <= 0:
        return 0.0
    p = p / mass
    pz = p.sum(axis=(0, 1))
    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = p * pz[None, None, :] / (pa[:, None, :] * pb[None, :, :])
        terms = np.where(p > 0, p * np.log(ratio), 0.0)
    return float(terms.sum())


class ExactOracle:
    """Answers independence queries by enumeration; CMI at or below ``tol`` counts as independent."""

    def __init__(self, model: LogLinearModel, tol: float = 1e-10):
        self.joint = joint_distribution(model)
        self.tol = tol
        self.calls = 0
        self._cache: dict[tuple, bool] = {}

    def cmi(self, a: int, b: int, given: Sequence[int] = (), context: Context = Context()) -> float:
        return conditional_mutual_information(self.joint, a, b, given, context)

    def independent(self, a: int, b: int, given: Sequence[int] = (),
                    context: Context = Context()) -> bool:
        key = (min(a, b), max(a, b), tuple(sorted(given)), context.bindings)
        if key not in self._cache:
            self.calls += 1
            self._cache[key] = self.cmi(a, b, given, context) <= self.tol
        return self._cache[key]
