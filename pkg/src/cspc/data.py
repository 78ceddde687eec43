"""Variable schemas, partial assignments and datasets of complete assignments."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed data or schema files."""


@dataclass(frozen=True)
class Schema:
    """Ordered list of named discrete variables. Index = position."""

    names: tuple[str, ...]
    arities: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "arities", tuple(int(a) for a in self.arities))
        if len(self.names) != len(self.arities):
            raise DataError("names and arities differ in length")
        if len(set(self.names)) != len(self.names):
            raise DataError("variable names must be unique")
        if any(a < 2 for a in self.arities):
            raise DataError("every variable needs arity >= 2")

    @classmethod
    def binary(cls, n: int, names: Sequence[str] | None = None) -> "Schema":
        names = names if names is not None else [f"X{i}" for i in range(n)]
        return cls(tuple(names), (2,) * n)

    def __len__(self) -> int:
        return len(self.names)

    @property
    def n(self) -> int:
        return len(self.names)

    def state_count(self) -> int:
        return int(np.prod(self.arities, dtype=object)) if self.arities else 1

    def to_json(self) -> dict:
        return {"variables": [{"name": nm, "arity": ar} for nm, ar in zip(self.names, self.arities)]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Schema":
        try:
            variables = obj["variables"]
            return cls(tuple(v["name"] for v in variables), tuple(int(v["arity"]) for v in variables))
        except (KeyError, TypeError) as exc:
            raise DataError(f"bad schema JSON: {exc}") from exc


@dataclass(frozen=True)
class Context:
    """A partial assignment: sorted ``(variable, value)`` pairs, each variable at most once."""

    bindings: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(v), int(x)) for v, x in self.bindings))
        seen = [v for v, _ in pairs]
        if len(set(seen)) != len(seen):
            raise ValueError(f"variable bound twice in {pairs}")
        object.__setattr__(self, "bindings", pairs)

    @classmethod
    def of(cls, mapping: Mapping[int, int] | None = None) -> "Context":
        return cls(tuple((mapping or {}).items()))

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(v for v, _ in self.bindings)

    def as_dict(self) -> dict[int, int]:
        return dict(self.bindings)

    def __len__(self) -> int:
        return len(self.bindings)

    def __iter__(self):
        return iter(self.bindings)

    def value(self, var: int) -> int | None:
        for v, x in self.bindings:
            if v == var:
                return x
        return None

    def agrees_with(self, other: "Context") -> bool:
        """True when no shared variable is bound to different values."""
        mine = self.as_dict()
        return all(mine.get(v, x) == x for v, x in other.bindings)

    def union(self, other: "Context") -> "Context":
        if not self.agrees_with(other):
            raise ValueError(f"conflicting contexts {self} and {other}")
        merged = self.as_dict()
        merged.update(other.as_dict())
        return Context(tuple(merged.items()))

    def without(self, var: int) -> "Context":
        return Context(tuple(p for p in self.bindings if p[0] != var))

    def restrict_to(self, variables: Iterable[int]) -> "Context":
        keep = set(variables)
        return Context(tuple(p for p in self.bindings if p[0] in keep))

    def validate(self, schema: Schema) -> None:
        for v, x in self.bindings:
            if not 0 <= v < schema.n:
                raise DataError(f"variable index {v} out of range for {schema.n} variables")
            if not 0 <= x < schema.arities[v]:
                raise DataError(f"value {x} out of range for variable {v} (arity {schema.arities[v]})")

    def __str__(self) -> str:
        return "(" + ", ".join(f"X{v}={x}" for v, x in self.bindings) + ")"


def assignment_context(x: Sequence[int], exclude: Iterable[int] = ()) -> Context:
    """View a complete assignment as a context, optionally dropping some variables."""
    skip = set(exclude)
    return Context(tuple((i, int(v)) for i, v in enumerate(x) if i not in skip))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Rows of complete assignments over ``schema``; ``rows`` is a read-only int array."""

    schema: Schema
    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.size == 0:
            rows = rows.reshape(0, self.schema.n)
        if rows.ndim != 2 or rows.shape[1] != self.schema.n:
            raise DataError(f"rows must have shape (N, {self.schema.n}), got {rows.shape}")
        if rows.size and ((rows < 0).any() or (rows >= np.asarray(self.schema.arities)).any()):
            raise DataError("row value outside its variable's arity")
        rows = rows.copy()
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return self.rows.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.rows, other.rows)

    def context_mask(self, c: Context) -> np.ndarray:
        mask = np.ones(len(self), dtype=bool)
        for v, x in c.bindings:
            mask &= self.rows[:, v] == x
        return mask


def slice_by_context(d: Dataset, c: Context) -> Dataset:
    """Rows of ``d`` agreeing with every binding of ``c``, order preserved."""
    c.validate(d.schema)
    if not len(c):
        return d
    return Dataset(d.schema, d.rows[d.context_mask(c)])


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    total: int


def contingency_table(d: Dataset, a: int, b: int) -> ContingencyTable:
    if a == b:
        raise ValueError("contingency table needs two distinct variables")
    ra, rb = d.schema.arities[a], d.schema.arities[b]
    flat = np.bincount(d.rows[:, a] * rb + d.rows[:, b], minlength=ra * rb)
    return ContingencyTable(flat.reshape(ra, rb), int(len(d)))


def unique_rows(d: Dataset) -> list[tuple[int, ...]]:
    """Distinct assignments in order of first appearance."""
    seen: dict[tuple[int, ...], None] = {}
    for row in d.rows.tolist():
        seen.setdefault(tuple(row), None)
    return list(seen)


def row_counts(d: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Distinct rows (first-appearance order) and their multiplicities."""
    if not len(d):
        return d.rows.copy(), np.zeros(0, dtype=np.int64)
    uniq, first, inverse, counts = np.unique(d.rows, axis=0, return_index=True,
                                             return_inverse=True, return_counts=True)
    order = np.argsort(first, kind="stable")
    return uniq[order], counts[order]


def load_schema(path: str | Path) -> Schema:
    with open(path, encoding="utf-8") as fh:
        return Schema.from_json(json.load(fh))


def save_schema(schema: Schema, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema.to_json(), fh, indent=2)
        fh.write("\n")


def load_dataset(path: str | Path, schema: Schema | str | Path | None = None) -> Dataset:
    """Read a header + integer-cell CSV.

    Without an explicit ``schema`` each arity is inferred as ``1 + max`` observed value
    (never below 2).
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        body = []
        for lineno, raw in enumerate(reader, start=1):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            if len(raw) != len(header):
                raise DataError(f"{path}: row {lineno} has {len(raw)} columns, expected {len(header)}")
            try:
                body.append([int(cell) for cell in raw])
            except ValueError:
                raise DataError(f"{path}: row {lineno} has a non-integer cell: {raw!r}") from None
    if not body:
        raise DataError(f"{path}: no data rows")
    rows = np.asarray(body, dtype=np.int64)
    if (rows < 0).any():
        bad = int(np.nonzero((rows < 0).any(axis=1))[0][0]) + 1
        raise DataError(f"{path}: row {bad} has a negative value")

    if isinstance(schema, (str, Path)):
        schema = load_schema(schema)
    if schema is None:
        arities = tuple(max(2, int(m) + 1) for m in rows.max(axis=0))
        schema = Schema(tuple(header), arities)
    elif list(schema.names) != header:
        raise DataError(f"{path}: header {header} does not match schema names {list(schema.names)}")
    return Dataset(schema, rows)


def save_dataset(d: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(d.schema.names)
        writer.writerows(d.rows.tolist())
