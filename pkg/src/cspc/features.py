"""Indicator features over partial assignments, feature sets and induced graphs."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .data import Context, Schema, assignment_context


@dataclass(frozen=True)
class Feature(Context):
    """Indicator of a non-empty partial assignment; its scope is the set of bound variables."""

    def __post_init__(self):
        super().__post_init__()
        if not self.bindings:
            raise ValueError("a feature needs at least one binding")

    @property
    def scope(self) -> frozenset[int]:
        return self.variables

    def drop(self, var: int) -> "Feature | None":
        """The feature with ``var`` removed, or None if nothing is left."""
        rest = tuple(p for p in self.bindings if p[0] != var)
        return Feature(rest) if rest else None

    @classmethod
    def of(cls, mapping) -> "Feature":
        return cls(tuple(mapping.items()))


class FeatureSet:
    """Deduplicated, canonically ordered collection of features."""

    __slots__ = ("_items", "_set")

    def __init__(self, features: Iterable[Feature] = ()):
        unique = set()
        for f in features:
            if not isinstance(f, Feature):
                f = Feature(tuple(f.bindings) if isinstance(f, Context) else tuple(f))
            unique.add(f)
        self._set = frozenset(unique)
        self._items = tuple(sorted(unique, key=lambda f: f.bindings))

    def __iter__(self) -> Iterator[Feature]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, f) -> bool:
        return f in self._set

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureSet):
            return NotImplemented
        return self._set == other._set

    def __hash__(self) -> int:
        return hash(self._set)

    def __getitem__(self, i: int) -> Feature:
        return self._items[i]

    def __repr__(self) -> str:
        return f"FeatureSet({len(self)} features)"

    def __or__(self, other: "FeatureSet") -> "FeatureSet":
        return self.union(other)

    def union(self, *others: Iterable[Feature]) -> "FeatureSet":
        merged = list(self._items)
        for o in others:
            merged.extend(o)
        return FeatureSet(merged)

    def issubset(self, other: "FeatureSet") -> bool:
        return self._set <= other._set

    def max_variable(self) -> int:
        return max((v for f in self for v in f.scope), default=-1)

    def binding_matrix(self, n: int) -> np.ndarray:
        """(features, n) array holding the bound value or -1 where unbound."""
        out = np.full((len(self), n), -1, dtype=np.int64)
        for j, f in enumerate(self._items):
            for v, x in f.bindings:
                out[j, v] = x
        return out


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        norm = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError("self-loops are not allowed")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) out of range for {self.n} nodes")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, frozenset(combinations(range(n), 2)))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, frozenset())

    def neighbors(self, v: int) -> set[int]:
        return {b if a == v else a for a, b in self.edges if v in (a, b)}

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.sorted_edges()]}

    @classmethod
    def from_json(cls, obj) -> "Graph":
        return cls(int(obj["n"]), frozenset(tuple(e) for e in obj["edges"]))


def satisfies(f: Feature, x: Sequence[int]) -> bool:
    """Indicator value of ``f`` at the complete assignment ``x``."""
    return all(x[v] == val for v, val in f.bindings)


def compatible(f: Context, c: Context) -> bool:
    """No variable shared by ``f`` and ``c`` takes different values."""
    if len(c) < len(f):
        f, c = c, f
    lookup = c.as_dict()
    return all(lookup.get(v, x) == x for v, x in f.bindings)


def restrict(fs: FeatureSet, c: Context) -> FeatureSet:
    """Features compatible with ``c``."""
    if not len(c):
        return fs
    return FeatureSet(f for f in fs if compatible(f, c))


def induced_graph(fs: Iterable[Feature], n: int) -> Graph:
    edges = set()
    for f in fs:
        scope = sorted(f.scope)
        if scope and scope[-1] >= n:
            raise ValueError(f"feature {f} references a variable >= {n}")
        edges.update(combinations(scope, 2))
    return Graph(n, frozenset(edges))


def context_adjacencies(fs: Iterable[Feature], x: Sequence[int], a: int) -> set[int]:
    """Neighbours of ``a`` in the graph induced by the features compatible with x minus X_a."""
    c = assignment_context(x, exclude=(a,))
    adj = set()
    for f in fs:
        scope = f.scope
        if a in scope and len(scope) > 1 and compatible(f, c):
            adj.update(scope)
    adj.discard(a)
    return adj


def atomic_features(schema: Schema) -> FeatureSet:
    return FeatureSet(Feature(((v, x),)) for v in range(schema.n) for x in range(schema.arities[v]))


def full_assignment_features(variables: Sequence[int], schema: Schema) -> list[Feature]:
    """One feature per joint value of ``variables``."""
    variables = sorted(variables)
    grids = np.indices([schema.arities[v] for v in variables]).reshape(len(variables), -1).T
    return [Feature(tuple(zip(variables, map(int, vals)))) for vals in grids]


def features_to_json(fs: Iterable[Feature], weights: Sequence[float] | None = None) -> list[dict]:
    fs = list(fs)
    if weights is None:
        weights = [0.0] * len(fs)
    return [{"bindings": [list(p) for p in f.bindings], "weight": float(w)} for f, w in zip(fs, weights)]


def features_from_json(items: Iterable[dict]) -> tuple[FeatureSet, list[float]]:
    """Parse feature records; weights follow the canonical order of the returned set."""
    by_feature: dict[Feature, float] = {}
    for item in items:
        f = Feature(tuple(tuple(p) for p in item["bindings"]))
        if f in by_feature:
            raise ValueError(f"duplicate feature {f}")
        by_feature[f] = float(item.get("weight", 0.0))
    fs = FeatureSet(by_feature)
    return fs, [by_feature[f] for f in fs]
