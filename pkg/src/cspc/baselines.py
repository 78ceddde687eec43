"""Graph-based independence learners (undirected PC, GSMN) and clique-to-feature conversion."""
from __future__ import annotations

from itertools import combinations

from .data import Dataset, Schema
from .features import FeatureSet, Graph, full_assignment_features
from .independence import ChiSquareTester, IndependenceTester, TestConfig

CLIQUE_CAP = 20


class CliqueCapError(ValueError):
    pass


def pc_undirected(d: Dataset, cfg: TestConfig = TestConfig(),
                  tester: IndependenceTester | None = None) -> Graph:
    """PC skeleton search without edge orientation."""
    n = d.schema.n
    tester = tester if tester is not None else ChiSquareTester(d, cfg)
    adj = {v: set(range(n)) - {v} for v in range(n)}
    k = 0
    while any(len(adj[a]) - 1 >= k for a in range(n)):
        for a in range(n):
            for b in sorted(adj[a]):
                if b not in adj[a]:
                    continue
                for w in combinations(sorted(adj[a] - {b}), k):
                    if tester.independent(a, b, given=w):
                        adj[a].discard(b)
                        adj[b].discard(a)
                        break
        k += 1
    return Graph(n, frozenset((a, b) for a in range(n) for b in adj[a] if a < b))


def grow_shrink_blanket(target: int, n: int, tester: IndependenceTester) -> set[int]:
    blanket: list[int] = []
    changed = True
    while changed:
        changed = False
        for y in range(n):
            if y == target or y in blanket:
                continue
            if not tester.independent(target, y, given=tuple(blanket)):
                blanket.append(y)
                changed = True
    for y in list(blanket):
        rest = tuple(v for v in blanket if v != y)
        if tester.independent(target, y, given=rest):
            blanket.remove(y)
    return set(blanket)


def gsmn(d: Dataset, cfg: TestConfig = TestConfig(),
         tester: IndependenceTester | None = None) -> Graph:
    """Markov blanket of every variable by grow-shrink; an edge joins a and b when either
    blanket claims the other."""
    n = d.schema.n
    tester = tester if tester is not None else ChiSquareTester(d, cfg)
    edges = set()
    for a in range(n):
        for b in grow_shrink_blanket(a, n, tester):
            edges.add((min(a, b), max(a, b)))
    return Graph(n, frozenset(edges))


def maximal_cliques(g: Graph, cap: int = CLIQUE_CAP) -> list[frozenset[int]]:
    """Bron-Kerbosch with pivoting; result sorted for determinism."""
    nbrs = {v: g.neighbors(v) for v in range(g.n)}
    found: list[frozenset[int]] = []

    def expand(r: set[int], p: set[int], x: set[int]) -> None:
        if not p and not x:
            if len(r) > cap:
                raise CliqueCapError(f"clique of size {len(r)} exceeds the cap of {cap}")
            found.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda u: (len(nbrs[u] & p), -u))
        for v in sorted(p - nbrs[pivot]):
            expand(r | {v}, p & nbrs[v], x & nbrs[v])
            p = p - {v}
            x = x | {v}

    expand(set(), set(range(g.n)), set())
    return sorted(found, key=lambda c: (sorted(c), len(c)))


def cliques_to_features(g: Graph, schema: Schema, cap: int = CLIQUE_CAP) -> FeatureSet:
    """One feature per joint value of each maximal clique."""
    if g.n != schema.n:
        raise ValueError(f"graph has {g.n} nodes but the schema {schema.n} variables")
    feats = []
    for clique in maximal_cliques(g, cap):
        feats.extend(full_assignment_features(sorted(clique), schema))
    return FeatureSet(feats)
