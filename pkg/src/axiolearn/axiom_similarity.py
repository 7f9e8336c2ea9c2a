"""Axiom-pair similarity, the axiom similarity matrix, and vector encoding.

The similarity of two axioms of the same kind aggregates the concept
similarities of their left sides and of their right sides (average or
minimum).  Symmetric kinds (disjointness, equivalence) are additionally
compared crosswise and the larger aggregate wins, so operand order never
matters for them.

Rows of the axiom similarity matrix double as feature vectors: encoding a
new candidate axiom against the training basis produces exactly the row it
would have had in the matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from axiolearn import _kernels
from axiolearn.hierarchy import ConceptSimilarityMatrix, UnknownConceptError
from axiolearn.scorer import Axiom, AxiomKind


class Asf(str, Enum):
    """Aggregator for the left-side and right-side concept similarities."""

    AVERAGE = "average"
    MINIMUM = "minimum"


@dataclass(frozen=True)
class LabeledAxiomSet:
    """Ordered axioms of one kind with parallel scores."""

    axioms: tuple[Axiom, ...]
    scores: tuple[float, ...]

    def __post_init__(self):
        if not self.axioms:
            raise ValueError("empty axiom set")
        if len(self.axioms) != len(self.scores):
            raise ValueError(
                f"{len(self.axioms)} axioms but {len(self.scores)} scores"
            )
        kinds = {a.kind for a in self.axioms}
        if len(kinds) > 1:
            raise ValueError(f"mixed axiom kinds in one set: {sorted(k.value for k in kinds)}")
        if len(set(self.axioms)) != len(self.axioms):
            dupe = next(a for i, a in enumerate(self.axioms) if a in self.axioms[:i])
            raise ValueError(f"duplicate axiom after canonical ordering: {dupe}")

    @property
    def kind(self) -> AxiomKind:
        return self.axioms[0].kind

    def __len__(self):
        return len(self.axioms)

    @classmethod
    def from_pairs(cls, pairs) -> "LabeledAxiomSet":
        axioms, scores = zip(*pairs)
        return cls(tuple(axioms), tuple(float(s) for s in scores))

    def to_tsv(self, f, meta: dict | None = None):
        """kind<TAB>lhs<TAB>rhs<TAB>score, one axiom per line."""
        close = False
        if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
            f = open(f, "w", encoding="utf-8")
            close = True
        try:
            if meta:
                f.write("# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items())) + "\n")
            for a, s in zip(self.axioms, self.scores):
                f.write(f"{a.kind.value}\t{a.lhs}\t{a.rhs}\t{s:.17g}\n")
        finally:
            if close:
                f.close()

    @classmethod
    def from_tsv(cls, f) -> "LabeledAxiomSet":
        close = False
        if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
            f = open(f, encoding="utf-8")
            close = True
        try:
            pairs = []
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) != 4:
                    raise ValueError(f"line {lineno}: expected 4 tab-separated fields")
                kind_name, lhs, rhs, score = fields
                try:
                    kind = AxiomKind(kind_name)
                except ValueError:
                    raise ValueError(f"line {lineno}: unknown axiom kind {kind_name!r}")
                pairs.append((Axiom(kind, lhs, rhs), float(score)))
        finally:
            if close:
                f.close()
        if not pairs:
            raise ValueError("no axioms in TSV")
        return cls.from_pairs(pairs)


@dataclass(eq=False)
class AxiomSimilarityMatrix:
    """Symmetric axiom-pair similarity matrix over a labeled basis."""

    basis: LabeledAxiomSet
    values: np.ndarray

    def __len__(self):
        return len(self.basis)

    def to_csv(self, f, meta: dict | None = None):
        """Leading score column, then one column per basis axiom."""
        close = False
        if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
            f = open(f, "w", encoding="utf-8", newline="")
            close = True
        try:
            if meta:
                f.write("# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items())) + "\n")
            writer = csv.writer(f)
            writer.writerow(["score", *(str(a) for a in self.basis.axioms)])
            for i, s in enumerate(self.basis.scores):
                writer.writerow([f"{s:.17g}", *(f"{v:.17g}" for v in self.values[i])])
        finally:
            if close:
                f.close()

    @classmethod
    def from_csv(cls, f) -> tuple["AxiomSimilarityMatrix", dict]:
        """Returns (matrix, meta) where meta holds any '# k=v' stamp line."""
        close = False
        if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
            f = open(f, encoding="utf-8", newline="")
            close = True
        try:
            meta: dict[str, str] = {}
            rows = []
            for line in f:
                if line.startswith("#"):
                    for part in line[1:].split():
                        if "=" in part:
                            k, v = part.split("=", 1)
                            meta[k] = v
                    continue
                rows.extend(csv.reader([line]))
        finally:
            if close:
                f.close()
        if len(rows) < 2:
            raise ValueError("empty axiom matrix CSV")
        axioms = tuple(Axiom.parse(text) for text in rows[0][1:])
        scores = tuple(float(r[0]) for r in rows[1:])
        values = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
        return cls(LabeledAxiomSet(axioms, scores), values), meta


def _asf_scalar(a: float, b: float, asf: Asf) -> float:
    # same IEEE ops as the kernels so scalar and matrix paths agree exactly
    if asf is Asf.MINIMUM:
        return a if a < b else b
    return (a + b) * 0.5


def axiom_pair_similarity(
    mc: ConceptSimilarityMatrix,
    a: Axiom,
    b: Axiom,
    asf: Asf = Asf.AVERAGE,
    unknown_floor: float | None = None,
) -> float:
    """Similarity of two same-kind axioms from concept similarities.

    unknown_floor, when given, substitutes for any lookup involving a
    concept absent from mc (candidate axioms may mention unseen classes).
    """
    if a.kind is not b.kind:
        raise ValueError(f"axiom kind mismatch: {a.kind.value} vs {b.kind.value}")
    look = lambda c1, c2: mc.lookup(c1, c2, floor=unknown_floor)
    s1 = _asf_scalar(look(a.lhs, b.lhs), look(a.rhs, b.rhs), asf)
    if a.kind.symmetric:
        s2 = _asf_scalar(look(a.lhs, b.rhs), look(a.rhs, b.lhs), asf)
        return max(s1, s2)
    return s1


def _concept_indices(mc, axioms, unknown_floor):
    """Map axiom concepts to mc row indices.

    With a floor, unknown concepts map to a phantom index whose row and
    column hold the floor value; the returned matrix is mc.values either
    way (augmented only when needed).
    """
    n = len(mc)
    missing = False
    lhs_idx = np.empty(len(axioms), dtype=np.intp)
    rhs_idx = np.empty(len(axioms), dtype=np.intp)
    for k, a in enumerate(axioms):
        i = mc.index.get(a.lhs)
        j = mc.index.get(a.rhs)
        if i is None or j is None:
            if unknown_floor is None:
                raise UnknownConceptError(a.lhs if i is None else a.rhs)
            missing = True
        lhs_idx[k] = n if i is None else i
        rhs_idx[k] = n if j is None else j
    if not missing:
        return lhs_idx, rhs_idx, np.ascontiguousarray(mc.values, dtype=np.float64)
    aug = np.full((n + 1, n + 1), float(unknown_floor))
    aug[:n, :n] = mc.values
    return lhs_idx, rhs_idx, aug


def build_axiom_matrix(
    mc: ConceptSimilarityMatrix,
    t: LabeledAxiomSet,
    asf: Asf = Asf.AVERAGE,
    jobs: int = 1,
    unknown_floor: float | None = None,
) -> AxiomSimilarityMatrix:
    """Axiom similarity matrix over t; each unordered pair computed once."""
    lhs_idx, rhs_idx, v = _concept_indices(mc, t.axioms, unknown_floor)
    m = len(t)
    values = np.empty((m, m))
    _kernels.run_symmetric_blocks(
        _kernels.pair_matrix_block,
        m,
        jobs,
        v,
        lhs_idx,
        rhs_idx,
        t.kind.symmetric,
        asf is Asf.MINIMUM,
        values,
    )
    np.fill_diagonal(values, 1.0)
    return AxiomSimilarityMatrix(t, values)


def encode_axiom(
    mc: ConceptSimilarityMatrix,
    candidate: Axiom,
    basis: LabeledAxiomSet,
    asf: Asf = Asf.AVERAGE,
    unknown_floor: float | None = None,
) -> np.ndarray:
    """Feature vector of the candidate: its similarity to each basis axiom."""
    if candidate.kind is not basis.kind:
        raise ValueError(
            f"candidate kind {candidate.kind.value} does not match basis kind {basis.kind.value}"
        )
    al, ar, v = _concept_indices(mc, (candidate, *basis.axioms), unknown_floor)
    out = np.empty((1, len(basis)))
    _kernels.pair_rect(
        v, al[:1], ar[:1], al[1:], ar[1:], candidate.kind.symmetric, asf is Asf.MINIMUM, out
    )
    return out[0]
