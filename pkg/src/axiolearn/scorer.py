"""Possibilistic scoring of atomic class axioms against instance evidence.

An axiom is judged by counting, over the individuals it makes a claim
about: its support u (how many individuals are in scope), confirmations u+
(individuals whose types entail the claim) and counterexamples u-
(individuals whose types contradict it).  From the counts:

    possibility = 1 - sqrt(1 - ((u - u-) / u)^2)        (1 when u = 0)
    necessity   = sqrt(1 - ((u - u+) / u)^2) if u- = 0 else 0
    ari         = necessity + possibility - 1            (in [-1, 1])

Zero support is the state of maximum ignorance: possibility 1, necessity 0,
ari 0.  A positive ari suggests acceptance, a negative one rejection.

Counterexamples need a notion of "is not a D", which an open-world dataset
never states directly.  Two modes are provided: ``cwa`` treats
non-derivable membership as negation, ``disjointness`` (default) requires
an asserted type disjoint with D (closed downward over subclasses on both
sides of the disjointness).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from axiolearn.rdf_store import Dataset


class AxiomKind(str, Enum):
    SUBCLASS_OF = "SubClassOf"
    DISJOINT_WITH = "DisjointWith"
    EQUIVALENT_CLASS = "EquivalentClass"

    @property
    def symmetric(self) -> bool:
        return self in (AxiomKind.DISJOINT_WITH, AxiomKind.EQUIVALENT_CLASS)

    @property
    def score_range(self) -> tuple[float, float]:
        """(-1, 1) for subsumption/equivalence; (0, 1) for disjointness,
        where only possibility is meaningful."""
        if self is AxiomKind.DISJOINT_WITH:
            return (0.0, 1.0)
        return (-1.0, 1.0)


class NegMode(str, Enum):
    CWA = "cwa"
    DISJOINTNESS = "disjointness"


@dataclass(frozen=True, slots=True)
class Axiom:
    """Atomic class axiom.  Symmetric kinds are canonicalized so that
    Axiom(k, l, r) == Axiom(k, r, l)."""

    kind: AxiomKind
    lhs: str
    rhs: str

    def __post_init__(self):
        if self.lhs == self.rhs:
            raise ValueError(f"axiom relates a class to itself: <{self.lhs}>")
        if self.kind.symmetric and self.rhs < self.lhs:
            lo, hi = self.rhs, self.lhs
            object.__setattr__(self, "lhs", lo)
            object.__setattr__(self, "rhs", hi)

    def __str__(self):
        return f"{self.kind.value} <{self.lhs}> <{self.rhs}>"

    @classmethod
    def parse(cls, text: str) -> Axiom:
        """Parse the textual form 'Kind <lhs-iri> <rhs-iri>'."""
        parts = text.split()
        if len(parts) != 3:
            raise ValueError(f"expected 'Kind <lhs> <rhs>', got {text!r}")
        kind_name, lhs, rhs = parts
        try:
            kind = AxiomKind(kind_name)
        except ValueError:
            names = ", ".join(k.value for k in AxiomKind)
            raise ValueError(f"unknown axiom kind {kind_name!r} (expected one of {names})")
        if not (lhs.startswith("<") and lhs.endswith(">") and rhs.startswith("<") and rhs.endswith(">")):
            raise ValueError(f"axiom concepts must be written as <iri>: {text!r}")
        return cls(kind, lhs[1:-1], rhs[1:-1])


@dataclass(frozen=True, slots=True)
class ScoreReport:
    """Counts and measures for one scored axiom.

    headline is the score a user should read: ari for SubClassOf and
    EquivalentClass, possibility for DisjointWith (necessity is meaningless
    there and forced to 0, leaving ari = possibility - 1, unused).
    """

    axiom: Axiom
    support: int
    confirmations: int
    counterexamples: int
    possibility: float
    necessity: float
    ari: float
    headline: float
    headline_measure: str  # "ari" or "possibility"


def possibility(u: int, u_minus: int) -> float:
    """1 - sqrt(1 - ((u - u-)/u)^2); 1 under zero support."""
    if u < 0 or u_minus < 0 or u_minus > u:
        raise ValueError(f"invalid counts u={u}, u_minus={u_minus}")
    if u == 0:
        return 1.0
    ratio = (u - u_minus) / u
    return 1.0 - math.sqrt(1.0 - ratio * ratio)


def necessity(u: int, u_plus: int, u_minus: int) -> float:
    """sqrt(1 - ((u - u+)/u)^2) when no counterexample exists, else 0."""
    if u < 0 or u_plus < 0 or u_minus < 0 or u_plus + u_minus > u:
        raise ValueError(f"invalid counts u={u}, u_plus={u_plus}, u_minus={u_minus}")
    if u == 0 or u_minus > 0:
        return 0.0
    ratio = (u - u_plus) / u
    return math.sqrt(1.0 - ratio * ratio)


def ari(possibility: float, necessity: float) -> float:
    """Acceptance/rejection index: necessity + possibility - 1."""
    if not (0.0 <= possibility <= 1.0 and 0.0 <= necessity <= 1.0):
        raise ValueError(f"measures out of range: pi={possibility}, n={necessity}")
    if necessity > 0.0 and possibility < 1.0:
        raise ValueError("inconsistent measures: necessity > 0 requires possibility = 1")
    return necessity + possibility - 1.0


def _contradicting_classes(d: Dataset, target: str) -> frozenset[str]:
    """Classes whose members contradict membership in target, via asserted
    disjointness closed downward over subclasses on both sides."""
    targets_up = d.superclasses_of(target)
    partners: set[str] = set()
    for a, b in d.disjoint_edges:
        if a in targets_up:
            partners.add(b)
        if b in targets_up:
            partners.add(a)
    out: set[str] = set()
    for p in partners:
        out.update(d.subclasses_of(p))
    return frozenset(out)


def _counterexamples(d, scope, target_members, target, neg_mode) -> int:
    """Counterexamples to 'every individual in scope is a target'.

    Individuals confirmed as target members are never counted, so noisy
    data cannot push u+ + u- beyond u.
    """
    unconfirmed = scope - target_members
    if neg_mode is NegMode.CWA:
        return len(unconfirmed)
    bad = _contradicting_classes(d, target)
    return sum(1 for a in unconfirmed if d.type_index.get(a, frozenset()) & bad)


def content_counts(
    d: Dataset,
    axiom: Axiom,
    neg_mode: NegMode = NegMode.DISJOINTNESS,
    inferred: bool = True,
) -> tuple[int, int, int]:
    """(u, u+, u-) for one axiom; empty evidence yields (0, 0, 0)."""
    left = d.instances_of(axiom.lhs, inferred)
    right = d.instances_of(axiom.rhs, inferred)

    if axiom.kind is AxiomKind.SUBCLASS_OF:
        u = len(left)
        u_plus = len(left & right)
        u_minus = _counterexamples(d, left, right, axiom.rhs, neg_mode)
        return u, u_plus, u_minus

    if axiom.kind is AxiomKind.DISJOINT_WITH:
        u = len(left | right)
        u_minus = len(left & right)
        return u, u - u_minus, u_minus

    # EquivalentClass: confirmations are shared members; counterexamples are
    # the subsumption counterexamples of both directions.
    u = len(left | right)
    u_plus = len(left & right)
    u_minus = _counterexamples(d, left, right, axiom.rhs, neg_mode) + _counterexamples(
        d, right, left, axiom.lhs, neg_mode
    )
    return u, u_plus, u_minus


def score_axiom(
    d: Dataset,
    axiom: Axiom,
    neg_mode: NegMode = NegMode.DISJOINTNESS,
    inferred: bool = True,
) -> ScoreReport:
    """Full score report; see module docstring for the measures."""
    u, u_plus, u_minus = content_counts(d, axiom, neg_mode, inferred)
    pi = possibility(u, u_minus)
    if axiom.kind is AxiomKind.DISJOINT_WITH:
        n = 0.0
        headline, measure = pi, "possibility"
    else:
        n = necessity(u, u_plus, u_minus)
        headline, measure = ari(pi, n), "ari"
    return ScoreReport(
        axiom=axiom,
        support=u,
        confirmations=u_plus,
        counterexamples=u_minus,
        possibility=pi,
        necessity=n,
        ari=n + pi - 1.0,
        headline=headline,
        headline_measure=measure,
    )


_COUNTER_LABEL = {AxiomKind.SUBCLASS_OF: -1.0, AxiomKind.DISJOINT_WITH: 0.0}


def extract_labeled_axioms(
    d: Dataset, kind: AxiomKind, balance: bool = False
) -> list[tuple[Axiom, float]]:
    """Labeled axioms of one kind from the asserted class-axiom edges.

    Asserted axioms of the requested kind get label 1.0; asserted axioms of
    the counter kind, reinterpreted as the requested kind, get the bottom
    of the kind's score range (-1.0 for SubClassOf, 0.0 for DisjointWith).
    With balance=True both label groups are truncated to the smaller
    group's size (in canonical order).
    """
    if kind is AxiomKind.SUBCLASS_OF:
        own, counter = d.subclass_edges, d.disjoint_edges
    elif kind is AxiomKind.DISJOINT_WITH:
        own, counter = d.disjoint_edges, d.subclass_edges
    else:
        raise ValueError(
            "extraction is only defined for SubClassOf and DisjointWith "
            "(no counter type exists for EquivalentClass)"
        )

    labeled: dict[Axiom, float] = {}
    for l, r in counter:
        labeled[Axiom(kind, l, r)] = _COUNTER_LABEL[kind]
    for l, r in own:
        labeled[Axiom(kind, l, r)] = 1.0  # asserted kind wins on conflict

    positives = sorted((a for a, s in labeled.items() if s == 1.0), key=str)
    negatives = sorted((a for a, s in labeled.items() if s != 1.0), key=str)
    if balance:
        keep = min(len(positives), len(negatives))
        positives, negatives = positives[:keep], negatives[:keep]
    return [(a, 1.0) for a in positives] + [(a, _COUNTER_LABEL[kind]) for a in negatives]
