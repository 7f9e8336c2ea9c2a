"""Subsumption hierarchy, ontological distance, and the concept matrix.

The distance between two concepts is the cheapest way to climb from both of
them to a shared ancestor, where stepping onto a node at depth d costs
2**-d (the start node of each climb is free).  Deep, specific common
ancestors are therefore cheap to meet at and generic ones expensive.
Similarity is the monotone transform 1 / (1 + distance), which is 1 exactly
for identical concepts and stays in (0, 1].

Every class without an asserted supertype is attached to a synthetic root,
so any two concepts have at least one common ancestor.  Depth is the
shortest parent-path distance from the root, which keeps it well defined
under multiple inheritance.
"""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass

import numpy as np

from axiolearn import _kernels
from axiolearn.rdf_store import Dataset

VIRTUAL_ROOT = "urn:x-axiolearn:root"


class CycleError(ValueError):
    """subClassOf edges form a cycle; carries one member of it."""

    def __init__(self, member: str):
        super().__init__(
            f"subClassOf cycle detected involving <{member}> "
            "(use collapse_cycles to merge strongly connected classes)"
        )
        self.member = member


class UnknownConceptError(LookupError):
    def __init__(self, concept: str):
        super().__init__(f"concept <{concept}> is not in the hierarchy")
        self.concept = concept


def _tarjan_sccs(nodes, adjacency):
    """Strongly connected components, iteratively (data may be deep)."""
    index_of: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = 0

    for start in nodes:
        if start in index_of:
            continue
        work = [(start, iter(adjacency.get(start, ())))]
        index_of[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index_of:
                    index_of[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(adjacency.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index_of[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index_of[node]:
                scc = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    scc.append(member)
                    if member == node:
                        break
                sccs.append(scc)
    return sccs


class Hierarchy:
    """Acyclic subsumption DAG over class IRIs plus a virtual root."""

    def __init__(self, parents: dict[str, frozenset[str]], merged: dict[str, str]):
        self.parents = parents
        self.merged = merged  # original class -> representative node
        self.nodes = frozenset(parents) | {VIRTUAL_ROOT}
        self.depth = self._depths()
        self.node_order: tuple[str, ...] = (VIRTUAL_ROOT, *sorted(parents))
        self.node_index = {n: i for i, n in enumerate(self.node_order)}
        self._cost_rows: dict[str, dict[str, float]] = {}

    @classmethod
    def from_edges(cls, classes, edges, collapse_cycles: bool = False) -> Hierarchy:
        """Build from class IRIs and (subclass, superclass) pairs."""
        classes = set(classes)
        if VIRTUAL_ROOT in classes:
            raise ValueError(f"reserved root IRI {VIRTUAL_ROOT!r} appears in the data")
        up: dict[str, set[str]] = {}
        for sub, sup in edges:
            classes.add(sub)
            classes.add(sup)
            if sub != sup:
                up.setdefault(sub, set()).add(sup)

        merged = {c: c for c in classes}
        cyclic = [scc for scc in _tarjan_sccs(sorted(classes), up) if len(scc) > 1]
        if cyclic:
            if not collapse_cycles:
                raise CycleError(min(cyclic[0]))
            for scc in cyclic:
                rep = min(scc)
                for member in scc:
                    merged[member] = rep

        parents: dict[str, frozenset[str]] = {}
        for c in classes:
            rep = merged[c]
            sups = {merged[s] for s in up.get(c, ())} - {rep}
            if rep in parents:
                sups |= set(parents[rep])
            parents[rep] = frozenset(sups)
        parents = {
            rep: (sups if sups else frozenset({VIRTUAL_ROOT})) for rep, sups in parents.items()
        }
        return cls(parents, merged)

    @classmethod
    def from_dataset(cls, d: Dataset, collapse_cycles: bool = False) -> Hierarchy:
        return cls.from_edges(d.classes(), d.subclass_edges, collapse_cycles)

    def _depths(self) -> dict[str, int]:
        children: dict[str, list[str]] = {}
        for node, sups in self.parents.items():
            for p in sups:
                children.setdefault(p, []).append(node)
        depth = {VIRTUAL_ROOT: 0}
        frontier = [VIRTUAL_ROOT]
        while frontier:
            nxt = []
            for node in frontier:
                for child in children.get(node, ()):
                    if child not in depth:
                        depth[child] = depth[node] + 1
                        nxt.append(child)
            frontier = nxt
        return depth

    def resolve(self, concept: str) -> str:
        rep = self.merged.get(concept)
        if rep is None:
            raise UnknownConceptError(concept)
        return rep

    def ancestor_costs(self, concept: str) -> dict[str, float]:
        """Cheapest climb cost from concept to each of its ancestors.

        Entering a node at depth d costs 2**-d; the start node is free.
        Cached; Dijkstra over the parent edges (all weights positive).
        """
        rep = self.resolve(concept)
        cached = self._cost_rows.get(rep)
        if cached is not None:
            return cached
        best: dict[str, float] = {}
        heap: list[tuple[float, str]] = [(0.0, rep)]
        while heap:
            cost, node = heapq.heappop(heap)
            if node in best:
                continue
            best[node] = cost
            for p in self.parents.get(node, ()):
                if p not in best:
                    heapq.heappush(heap, (cost + 2.0 ** (-self.depth[p]), p))
        self._cost_rows[rep] = best
        return best

    def distance(self, t1: str, t2: str) -> float:
        """Minimal summed climb cost to a common ancestor; 0 iff same concept."""
        r1, r2 = self.resolve(t1), self.resolve(t2)
        if r1 == r2:
            return 0.0
        a, b = self.ancestor_costs(r1), self.ancestor_costs(r2)
        if len(b) < len(a):
            a, b = b, a
        return min(a[t] + b[t] for t in a if t in b)

    def similarity(self, t1: str, t2: str) -> float:
        return 1.0 / (1.0 + self.distance(t1, t2))

    def concept_matrix(self, concepts, jobs: int = 1) -> "ConceptSimilarityMatrix":
        """Symmetric similarity matrix over the given concepts.

        Each unordered pair is evaluated once; the result is bit-identical
        for any jobs value.
        """
        concepts = list(concepts)
        if len(set(concepts)) != len(concepts):
            dupe = next(c for i, c in enumerate(concepts) if c in concepts[:i])
            raise ValueError(f"duplicate concept in list: <{dupe}>")
        m, n = len(concepts), len(self.node_order)
        g = np.full((m, n), np.inf)
        for i, c in enumerate(concepts):
            for node, cost in self.ancestor_costs(c).items():
                g[i, self.node_index[node]] = cost
        dist = np.empty((m, m))
        _kernels.run_symmetric_blocks(_kernels.minplus_block, m, jobs, g, dist)
        # identical (or collapsed-together) concepts meet at themselves
        values = 1.0 / (1.0 + dist)
        return ConceptSimilarityMatrix(tuple(concepts), values)


@dataclass(eq=False)
class ConceptSimilarityMatrix:
    """Symmetric concept-similarity matrix with unit diagonal."""

    concepts: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        self.index = {c: i for i, c in enumerate(self.concepts)}

    def __len__(self):
        return len(self.concepts)

    def lookup(self, c1: str, c2: str, floor: float | None = None) -> float:
        i = self.index.get(c1)
        j = self.index.get(c2)
        if i is None or j is None:
            if floor is not None:
                return floor
            raise UnknownConceptError(c1 if i is None else c2)
        return float(self.values[i, j])

    def to_csv(self, f, meta: dict | None = None):
        """header row and first column carry the concept IRIs; 17 significant
        digits so values round-trip exactly."""
        close = False
        if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
            f = open(f, "w", encoding="utf-8", newline="")
            close = True
        try:
            if meta:
                f.write("# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items())) + "\n")
            writer = csv.writer(f)
            writer.writerow(["concept", *self.concepts])
            for i, c in enumerate(self.concepts):
                writer.writerow([c, *(f"{v:.17g}" for v in self.values[i])])
        finally:
            if close:
                f.close()

    @classmethod
    def from_csv(cls, f) -> "ConceptSimilarityMatrix":
        close = False
        if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
            f = open(f, encoding="utf-8", newline="")
            close = True
        try:
            rows = [r for r in csv.reader(line for line in f if not line.startswith("#"))]
        finally:
            if close:
                f.close()
        if not rows:
            raise ValueError("empty concept matrix CSV")
        concepts = tuple(rows[0][1:])
        values = np.empty((len(concepts), len(concepts)))
        for i, row in enumerate(rows[1:]):
            if row[0] != concepts[i]:
                raise ValueError(f"concept matrix row/column order mismatch at {row[0]!r}")
            values[i] = [float(x) for x in row[1:]]
        return cls(concepts, values)
