"""Possibility/necessity/ARI identities, content counting, and extraction."""

import math

import pytest

from axiolearn.rdf_store import (
    OWL_DISJOINT_WITH,
    RDF_TYPE,
    RDFS_SUBCLASS_OF,
    parse_triples,
)
from axiolearn.scorer import (
    Axiom,
    AxiomKind,
    NegMode,
    ari,
    content_counts,
    extract_labeled_axioms,
    necessity,
    possibility,
    score_axiom,
)

EX = "urn:x:"
SUB = AxiomKind.SUBCLASS_OF
DIS = AxiomKind.DISJOINT_WITH
EQV = AxiomKind.EQUIVALENT_CLASS


def dataset(*lines):
    return parse_triples("\n".join(lines))


def typed(ind, cls):
    return f"<{EX}{ind}> <{RDF_TYPE}> <{EX}{cls}> ."


def subclass(a, b):
    return f"<{EX}{a}> <{RDFS_SUBCLASS_OF}> <{EX}{b}> ."


def disjoint(a, b):
    return f"<{EX}{a}> <{OWL_DISJOINT_WITH}> <{EX}{b}> ."


class TestMeasures:
    def test_zero_support_is_maximum_ignorance(self):
        assert possibility(0, 0) == 1.0
        assert necessity(0, 0, 0) == 0.0
        assert ari(1.0, 0.0) == 0.0

    def test_no_counterexamples_full_possibility(self):
        assert possibility(10, 0) == 1.0

    def test_possibility_hand_value(self):
        # 1 - sqrt(1 - (2/4)^2) = 1 - sqrt(0.75)
        assert abs(possibility(4, 2) - (1.0 - math.sqrt(0.75))) < 1e-12
        assert possibility(4, 2) == pytest.approx(0.133975, abs=1e-6)

    def test_necessity_hand_values(self):
        assert necessity(4, 4, 0) == 1.0
        assert necessity(4, 2, 1) == 0.0  # any counterexample kills necessity
        assert abs(necessity(4, 2, 0) - math.sqrt(0.75)) < 1e-12
        assert necessity(4, 2, 0) == pytest.approx(0.866025, abs=1e-6)

    def test_ari_hand_values(self):
        assert ari(1.0, necessity(4, 2, 0)) == pytest.approx(0.866025, abs=1e-6)
        assert ari(possibility(4, 2), 0.0) == pytest.approx(-0.866025, abs=1e-6)

    def test_count_preconditions(self):
        with pytest.raises(ValueError):
            possibility(2, 3)
        with pytest.raises(ValueError):
            necessity(4, 3, 2)
        with pytest.raises(ValueError):
            ari(1.2, 0.0)
        with pytest.raises(ValueError):
            ari(0.5, 0.5)  # necessity > 0 with possibility < 1

    def test_exhaustive_sweep_identities(self):
        """All (u, u+, u-) with u <= 50: ranges, duality, exact ARI identity."""
        for u in range(51):
            for u_plus in range(u + 1):
                for u_minus in range(u - u_plus + 1):
                    pi = possibility(u, u_minus)
                    n = necessity(u, u_plus, u_minus)
                    a = ari(pi, n)
                    assert 0.0 <= pi <= 1.0
                    assert 0.0 <= n <= 1.0
                    assert -1.0 <= a <= 1.0
                    assert a == n + pi - 1.0
                    if n > 0.0:
                        assert u_minus == 0
                        assert pi == 1.0

    def test_monotonicity(self):
        for u in (1, 7, 30):
            possibilities = [possibility(u, um) for um in range(u + 1)]
            assert possibilities == sorted(possibilities, reverse=True)
            necessities = [necessity(u, up, 0) for up in range(u + 1)]
            assert necessities == sorted(necessities)


class TestAxiom:
    def test_reflexive_rejected(self):
        with pytest.raises(ValueError):
            Axiom(SUB, EX + "A", EX + "A")

    def test_symmetric_kinds_canonicalize(self):
        assert Axiom(DIS, EX + "B", EX + "A") == Axiom(DIS, EX + "A", EX + "B")
        assert Axiom(EQV, EX + "B", EX + "A") == Axiom(EQV, EX + "A", EX + "B")
        assert Axiom(SUB, EX + "B", EX + "A") != Axiom(SUB, EX + "A", EX + "B")

    def test_parse_round_trip(self):
        a = Axiom(SUB, EX + "B", EX + "A")
        assert Axiom.parse(str(a)) == a
        with pytest.raises(ValueError, match="kind"):
            Axiom.parse(f"Narrower <{EX}B> <{EX}A>")
        with pytest.raises(ValueError):
            Axiom.parse("SubClassOf a b")


class TestContentCounts:
    def test_no_instances_is_ignorance(self):
        d = dataset(subclass("C", "D"))
        a = Axiom(SUB, EX + "C", EX + "Other")
        assert content_counts(d, a) == (0, 0, 0)
        report = score_axiom(d, a)
        assert (report.possibility, report.necessity, report.headline) == (1.0, 0.0, 0.0)

    def test_subclass_cwa_counts(self):
        d = dataset(typed("x", "C"), typed("x", "D"), typed("y", "C"))
        a = Axiom(SUB, EX + "C", EX + "D")
        assert content_counts(d, a, NegMode.CWA) == (2, 1, 1)

    def test_subclass_disjointness_counts(self):
        # y:C and y:E with E disjoint from D -> one real counterexample;
        # z:C with no conflicting type stays undecided under OWA
        d = dataset(
            typed("x", "C"),
            typed("x", "D"),
            typed("y", "C"),
            typed("y", "E"),
            typed("z", "C"),
            disjoint("E", "D"),
        )
        a = Axiom(SUB, EX + "C", EX + "D")
        assert content_counts(d, a, NegMode.DISJOINTNESS) == (3, 1, 1)
        assert content_counts(d, a, NegMode.CWA) == (3, 1, 2)

    def test_disjointness_closure_over_subclasses(self):
        # w:F, F subclass of E, E disjoint from D0, D subclass of D0
        d = dataset(
            typed("w", "C"),
            typed("w", "F"),
            subclass("F", "E"),
            subclass("D", "D0"),
            disjoint("E", "D0"),
        )
        a = Axiom(SUB, EX + "C", EX + "D")
        assert content_counts(d, a, NegMode.DISJOINTNESS) == (1, 0, 1)

    def test_disjoint_axiom_counts(self):
        d = dataset(typed("x", "C"), typed("y", "D"))
        a = Axiom(DIS, EX + "C", EX + "D")
        assert content_counts(d, a) == (2, 2, 0)
        report = score_axiom(d, a)
        assert report.possibility == 1.0
        assert report.headline == 1.0
        assert report.headline_measure == "possibility"

    def test_disjoint_with_overlap(self):
        d = dataset(typed("x", "C"), typed("x", "D"), typed("y", "C"), typed("z", "D"), typed("w", "C"))
        a = Axiom(DIS, EX + "C", EX + "D")
        # u = |{x,y,z,w}| = 4, shared = {x}
        assert content_counts(d, a) == (4, 3, 1)
        assert score_axiom(d, a).headline == pytest.approx(possibility(4, 1))

    def test_equivalent_counts_cwa(self):
        d = dataset(typed("x", "C"), typed("x", "D"), typed("y", "C"), typed("z", "D"))
        a = Axiom(EQV, EX + "C", EX + "D")
        assert content_counts(d, a, NegMode.CWA) == (3, 1, 2)

    def test_inferred_toggle(self):
        d = dataset(subclass("B", "C"), typed("x", "B"), typed("x", "D"))
        a = Axiom(SUB, EX + "C", EX + "D")
        assert content_counts(d, a, NegMode.CWA, inferred=True) == (1, 1, 0)
        assert content_counts(d, a, NegMode.CWA, inferred=False) == (0, 0, 0)


class TestScoreAxiom:
    def test_fully_confirmed_subclass(self):
        d = dataset(*(typed(f"i{k}", "C") for k in range(4)), *(typed(f"i{k}", "D") for k in range(4)))
        report = score_axiom(d, Axiom(SUB, EX + "C", EX + "D"))
        assert report.support == 4
        assert report.headline == 1.0

    def test_disjoint_headline_is_possibility(self):
        d = dataset(*(typed(f"i{k}", "C") for k in range(4)), typed("i0", "D"), typed("i1", "D"))
        report = score_axiom(d, Axiom(DIS, EX + "C", EX + "D"))
        assert report.support == 4
        assert report.counterexamples == 2
        assert report.headline == pytest.approx(1.0 - math.sqrt(0.75), abs=1e-12)
        assert report.necessity == 0.0
        assert report.ari == report.headline - 1.0

    def test_symmetric_kind_consistency(self):
        d = dataset(typed("x", "C"), typed("x", "D"), typed("y", "C"))
        fwd = score_axiom(d, Axiom(DIS, EX + "C", EX + "D"))
        rev = score_axiom(d, Axiom(DIS, EX + "D", EX + "C"))
        assert fwd == rev

    def test_determinism(self):
        d = dataset(typed("x", "C"), typed("y", "D"), subclass("C", "D"))
        a = Axiom(SUB, EX + "C", EX + "D")
        assert score_axiom(d, a) == score_axiom(d, a)


class TestExtraction:
    def test_single_subclass_edge(self):
        d = dataset(subclass("B", "A"))
        assert extract_labeled_axioms(d, SUB) == [(Axiom(SUB, EX + "B", EX + "A"), 1.0)]

    def test_counter_type_labels(self):
        d = dataset(subclass("B", "A"))
        assert extract_labeled_axioms(d, DIS) == [(Axiom(DIS, EX + "B", EX + "A"), 0.0)]
        d = dataset(disjoint("B", "A"))
        assert extract_labeled_axioms(d, SUB) == [(Axiom(SUB, EX + "B", EX + "A"), -1.0)]

    def test_empty_dataset(self):
        assert extract_labeled_axioms(dataset(), SUB) == []

    def test_equivalent_extraction_unsupported(self):
        with pytest.raises(ValueError, match="EquivalentClass"):
            extract_labeled_axioms(dataset(), EQV)

    def test_balance_truncates(self):
        d = dataset(subclass("B", "A"), subclass("C", "A"), subclass("D", "A"), disjoint("E", "F"))
        labeled = extract_labeled_axioms(d, SUB, balance=True)
        assert len(labeled) == 2
        assert sorted(s for _, s in labeled) == [-1.0, 1.0]

    def test_asserted_kind_wins_on_conflict(self):
        d = dataset(subclass("B", "A"), disjoint("B", "A"))
        labeled = dict(extract_labeled_axioms(d, SUB))
        assert labeled[Axiom(SUB, EX + "B", EX + "A")] == 1.0

    def test_counter_fixture_five_plus_five(self):
        """5 subClassOf + 5 disjointWith assertions -> 10 labeled axioms."""
        lines = [subclass(f"S{k}", f"T{k}") for k in range(5)]
        lines += [disjoint(f"P{k}", f"Q{k}") for k in range(5)]
        d = dataset(*lines)
        for kind, counter_label in ((SUB, -1.0), (DIS, 0.0)):
            labeled = extract_labeled_axioms(d, kind)
            assert len(labeled) == 10
            assert sum(1 for _, s in labeled if s == 1.0) == 5
            assert sum(1 for _, s in labeled if s == counter_label) == 5
            for a, _ in labeled:
                assert a.kind is kind
                if kind.symmetric:
                    assert a.lhs <= a.rhs
