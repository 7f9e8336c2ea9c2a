"""Instance-based subsumption-axiom similarity, for comparison runs.

Prior-work baseline: the similarity of A<=B and C<=D is the share of
confirming individuals among the individuals the two axioms quantify over,

    | ([A] n [B]) u ([C] n [D]) |  /  | [A] u [C] |

with [X] the (inferred) instance set of X and 0 when the denominator is
empty.  Negated pairs (A not<= B) use the closed-world complement of [B]
within the dataset's individuals.  This module exists for head-to-head
comparison with the ontological similarity and is not part of the default
prediction pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from axiolearn.axiom_similarity import AxiomSimilarityMatrix, LabeledAxiomSet
from axiolearn.rdf_store import Dataset
from axiolearn.scorer import AxiomKind


@dataclass(frozen=True, slots=True)
class SubsumptionPair:
    """A subsumption claim a <= b, or its negation when negated is set."""

    a: str
    b: str
    negated: bool = False

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"subsumption pair relates a class to itself: <{self.a}>")


def _confirming(d: Dataset, p: SubsumptionPair, inferred: bool) -> frozenset[str]:
    left = d.instances_of(p.a, inferred)
    right = d.instances_of(p.b, inferred)
    if p.negated:
        return left - right  # closed-world complement of [b]
    return left & right


def instance_similarity(
    d: Dataset, p: SubsumptionPair, q: SubsumptionPair, inferred: bool = True
) -> float:
    """Shared-confirmation ratio of two subsumption claims; 0 when neither
    left-hand class has instances."""
    denom = len(d.instances_of(p.a, inferred) | d.instances_of(q.a, inferred))
    if denom == 0:
        return 0.0
    numer = len(_confirming(d, p, inferred) | _confirming(d, q, inferred))
    return numer / denom


def build_instance_matrix(
    d: Dataset, t: LabeledAxiomSet, inferred: bool = True
) -> AxiomSimilarityMatrix:
    """Pairwise instance similarity over a SubClassOf axiom set, diagonal 1.

    Vectorized over individual-membership bitmaps; agrees with
    instance_similarity pair by pair.
    """
    if t.kind is not AxiomKind.SUBCLASS_OF:
        raise ValueError(f"instance baseline is defined for SubClassOf only, got {t.kind.value}")
    individuals = sorted(d.individuals)
    m = len(t)
    if not individuals:
        values = np.zeros((m, m))
        np.fill_diagonal(values, 1.0)
        return AxiomSimilarityMatrix(t, values)

    idx = {ind: i for i, ind in enumerate(individuals)}
    conf = np.zeros((m, len(individuals)))
    left = np.zeros((m, len(individuals)))
    for k, axiom in enumerate(t.axioms):
        pair = SubsumptionPair(axiom.lhs, axiom.rhs)
        for ind in _confirming(d, pair, inferred):
            conf[k, idx[ind]] = 1.0
        for ind in d.instances_of(axiom.lhs, inferred):
            left[k, idx[ind]] = 1.0

    conf_sizes = conf.sum(axis=1)
    left_sizes = left.sum(axis=1)
    conf_shared = conf @ conf.T
    left_shared = left @ left.T
    numer = conf_sizes[:, None] + conf_sizes[None, :] - conf_shared
    denom = left_sizes[:, None] + left_sizes[None, :] - left_shared
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(denom > 0, numer / np.where(denom > 0, denom, 1.0), 0.0)
    np.fill_diagonal(values, 1.0)
    return AxiomSimilarityMatrix(t, values)
