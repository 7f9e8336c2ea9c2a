"""Synthetic ontologies with engineered instance evidence.

Builds a random subsumption tree, populates classes with individuals, and
co-types individuals across class pairs with a fraction that decays with
tree distance.  Scoring the sampled candidate axioms with the package's own
possibilistic scorer then yields labels that vary smoothly with hierarchy
proximity: ancestor pairs score 1, unrelated pairs approach -1, nearby
pairs land in between.  That smoothness is what makes the scores learnable
from ontological similarity alone.
"""

import random

from axiolearn.axiom_similarity import LabeledAxiomSet
from axiolearn.rdf_store import RDF_TYPE, RDFS_SUBCLASS_OF, Dataset, Triple
from axiolearn.scorer import Axiom, AxiomKind, NegMode, score_axiom

EX = "http://example.org/synth#"


def class_iri(i):
    return f"{EX}C{i}"


def _tree(n_classes, rng):
    """parent[i] for i >= 1; index 0 is the single top class."""
    parent = {0: None}
    for i in range(1, n_classes):
        parent[i] = rng.randrange(i)
    return parent


def _depths(parent):
    depth = {}
    for i in parent:
        d, j = 0, i
        while parent[j] is not None:
            d, j = d + 1, parent[j]
        depth[i] = d
    return depth


def _ancestors(i, parent):
    out = []
    while i is not None:
        out.append(i)
        i = parent[i]
    return out


def tree_distance(a, b, parent, depth):
    anc_a = set(_ancestors(a, parent))
    j = b
    while j not in anc_a:
        j = parent[j]
    return depth[a] + depth[b] - 2 * depth[j]


def synthetic_case(
    n_classes=80,
    n_axioms=450,
    per_class=8,
    seed=0,
    ancestor_share=0.2,
    falloff=10.0,
):
    """(Dataset, SubClassOf LabeledAxiomSet scored by the internal scorer)."""
    rng = random.Random(seed)
    parent = _tree(n_classes, rng)
    depth = _depths(parent)

    subclass_triples = [
        Triple(class_iri(i), RDFS_SUBCLASS_OF, class_iri(p))
        for i, p in parent.items()
        if p is not None
    ]
    base_types = {}  # individual -> set of class indexes
    members = {i: [] for i in parent}  # class index -> its direct individuals
    counter = 0
    for i in parent:
        for _ in range(per_class):
            ind = f"{EX}ind{counter}"
            counter += 1
            base_types[ind] = {i}
            members[i].append(ind)

    # inferred extension per class under the tree
    subtree = {i: [] for i in parent}
    for i in parent:
        for a in _ancestors(i, parent):
            subtree[a].append(i)
    extension = {i: [ind for c in subtree[i] for ind in members[c]] for i in parent}

    n_ancestor = int(n_axioms * ancestor_share)
    axioms = set()
    plans = []  # (axiom, co-typing fraction or None)
    while len(axioms) < n_ancestor:
        c = rng.randrange(1, n_classes)
        anc = rng.choice(_ancestors(c, parent)[1:])
        a = Axiom(AxiomKind.SUBCLASS_OF, class_iri(c), class_iri(anc))
        if a not in axioms:
            axioms.add(a)
            plans.append((a, None))
    while len(axioms) < n_axioms:
        c, d = rng.sample(range(n_classes), 2)
        if d in _ancestors(c, parent):
            continue
        a = Axiom(AxiomKind.SUBCLASS_OF, class_iri(c), class_iri(d))
        if a in axioms:
            continue
        axioms.add(a)
        dist = tree_distance(c, d, parent, depth)
        frac = max(0.0, 1.0 - (dist - 1) / falloff)
        plans.append((a, frac))

    # engineer the evidence: co-type a fraction of [C] with D
    index_of = {class_iri(i): i for i in parent}
    for axiom, frac in plans:
        if frac is None or frac == 0.0:
            continue
        ext = extension[index_of[axiom.lhs]]
        chosen = rng.sample(ext, int(frac * len(ext)))
        for ind in chosen:
            base_types[ind].add(index_of[axiom.rhs])

    triples = list(subclass_triples)
    for ind, classes in base_types.items():
        for c in classes:
            triples.append(Triple(ind, RDF_TYPE, class_iri(c)))
    d = Dataset(triples)

    scored = [
        (axiom, score_axiom(d, axiom, NegMode.CWA, inferred=True).headline)
        for axiom, _ in plans
    ]
    return d, LabeledAxiomSet.from_pairs(scored)
