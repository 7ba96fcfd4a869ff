from __future__ import annotations

import dataclasses
import random
from collections import Counter
from fractions import Fraction

import pytest

from seccite import (
    CanonicalSection,
    Ledger,
    fractionalize,
    merge,
    modal_cited_journal,
    outer_section_labels,
    parse_article,
    read_ledger,
    resolve_cited_year,
    tally_article,
    write_ledger,
)
from seccite.ledger import ArticleTally
from seccite.sections import SECTION_ORDER

import oracles
from conftest import make_article, random_ledger, ref_entries, xref

I = CanonicalSection.INTRODUCTION
B = CanonicalSection.BACKGROUND
M = CanonicalSection.METHODS
R = CanonicalSection.RESULTS
D = CanonicalSection.DISCUSSION


def tally(mentions, journal="J", year=2019):
    return ArticleTally(None, journal, year, mentions)


class TestFractionalize:
    def test_worked_example_two_intro_one_discussion(self):
        contributions = fractionalize(tally({"10.1/x": {I: 2, D: 1}}))
        weights = {(c.section, c.cited_doi): c.weight for c in contributions}
        assert weights[(I, "10.1/x")] == Fraction(2, 3)
        assert weights[(D, "10.1/x")] == Fraction(1, 3)

    def test_single_mention_full_weight(self):
        (contribution,) = fractionalize(tally({"10.1/x": {M: 1}}))
        assert contribution.weight == Fraction(1)

    def test_four_sections_quarter_each(self):
        contributions = fractionalize(tally({"10.1/x": {I: 1, B: 1, M: 1, R: 1}}))
        assert [c.weight for c in contributions] == [Fraction(1, 4)] * 4

    def test_conservation_random(self):
        rng = random.Random(13)
        for _ in range(200):
            mentions = {}
            for d in range(rng.randint(1, 5)):
                per = {
                    s: rng.randint(1, 9)
                    for s in SECTION_ORDER
                    if rng.random() < 0.5
                }
                if per:
                    mentions[f"10.1/d{d}"] = per
            contributions = fractionalize(tally(mentions))
            per_doi = {}
            for c in contributions:
                per_doi[c.cited_doi] = per_doi.get(c.cited_doi, Fraction(0)) + c.weight
            assert all(total == 1 for total in per_doi.values())
            assert set(per_doi) == set(mentions)


class TestTallyArticle:
    def test_intro_twice_discussion_once(self):
        body = (
            "<sec><title>Introduction</title>"
            f"<p>One {xref('r1')} two {xref('r1')}.</p></sec>"
            f"<sec><title>Discussion</title><p>Three {xref('r1')}.</p></sec>"
        )
        article = parse_article(make_article(body=body), "t.xml")
        result = tally_article(article, outer_section_labels(article))
        assert result.mentions == {"10.2000/aaa": {I: 2, D: 1}}

    def test_unrecognized_section_dropped(self):
        body = f"<sec><title>Acknowledgements</title><p>{xref('r1')}.</p></sec>"
        article = parse_article(make_article(body=body), "t.xml")
        assert tally_article(article, outer_section_labels(article)).mentions == {}

    def test_outside_section_dropped(self):
        article = parse_article(
            make_article(abstract=f"<p>{xref('r1')}</p>"), "t.xml"
        )
        assert tally_article(article, outer_section_labels(article)).mentions == {}

    def test_ref_without_doi_dropped(self):
        refs = ref_entries(2, doi_for=lambda i: None)
        body = f"<sec><title>Methods</title><p>{xref('r1')}.</p></sec>"
        article = parse_article(make_article(body=body, refs=refs), "t.xml")
        assert tally_article(article, outer_section_labels(article)).mentions == {}

    def test_marker_order_irrelevant(self):
        refs = ref_entries(6)
        body = (
            f"<sec><title>Introduction</title><p>{xref('r1')} x {xref('r2')}.</p></sec>"
            f"<sec><title>Methods</title><p>{xref('r3')} x {xref('r1')}.</p></sec>"
        )
        article = parse_article(make_article(body=body, refs=refs), "t.xml")
        labels = outer_section_labels(article)
        baseline = tally_article(article, labels)
        rng = random.Random(3)
        for _ in range(5):
            permuted = list(article.citations)
            rng.shuffle(permuted)
            shuffled = dataclasses.replace(article, citations=tuple(permuted))
            assert tally_article(shuffled, labels).mentions == baseline.mentions


class TestLedgerAccumulation:
    def test_pair_totals_count_pairs(self):
        refs = ref_entries(5)
        body = (
            f"<sec><title>Introduction</title><p>{xref('r1')}, {xref('r2')}.</p></sec>"
            f"<sec><title>Results</title><p>{xref('r1')} and {xref('r3')}.</p></sec>"
        )
        article = parse_article(make_article(body=body, refs=refs), "t.xml")
        ledger = Ledger()
        ledger.add_article(article, outer_section_labels(article))
        total = sum((ledger.total(doi) for doi in ledger.dois()), Fraction(0))
        assert total == 3  # three (citing, cited) pairs

    def test_mixed_pair_keeps_weight_in_sections(self):
        # r1 cited in a recognized section and in the abstract: the abstract
        # mention adds nothing anywhere.
        body = f"<sec><title>Methods</title><p>{xref('r1')}.</p></sec>"
        article = parse_article(
            make_article(body=body, abstract=f"<p>{xref('r1')}</p>"), "t.xml"
        )
        ledger = Ledger()
        ledger.add_article(article, outer_section_labels(article))
        assert ledger.total("10.2000/aaa") == 1
        assert ledger.source_other == {}
        assert ledger.target_other == {}

    def test_other_only_pair_counts_once_in_other(self):
        article = parse_article(
            make_article(abstract=f"<p>{xref('r1')} and {xref('r1')}</p>"), "t.xml"
        )
        ledger = Ledger()
        ledger.add_article(article, outer_section_labels(article))
        assert ledger.vectors == {}
        assert ledger.source_other == {"Fixture Journal": Fraction(1)}
        assert ledger.target_other == {"Cited Journal One": Fraction(1)}

    def test_cohort_and_meta_evidence(self):
        body = f"<sec><title>Introduction</title><p>{xref('r1')}.</p></sec>"
        article = parse_article(make_article(body=body), "t.xml")
        ledger = Ledger()
        ledger.add_article(article, outer_section_labels(article))
        assert ledger.cohort_index["10.2000/aaa"] == {("Fixture Journal", 2019)}
        assert ledger.cited_journals["10.2000/aaa"] == Counter({"Cited Journal One": 1})
        assert ledger.cited_years["10.2000/aaa"] == Counter({2012: 1})
        assert set(ledger.vectors) == set(ledger.cohort_index)


class TestMerge:
    def test_identity(self):
        ledger = random_ledger(random.Random(1))
        assert merge(ledger, Ledger()) == ledger
        assert merge(Ledger(), ledger) == ledger

    def test_halves_add_exactly(self):
        a, b = Ledger(), Ledger()
        for part in (a, b):
            part.vectors["10.1/x"] = {M: Fraction(1, 2)}
            part.cohort_index["10.1/x"] = {("J", 2019)}
        combined = merge(a, b)
        assert combined.vectors["10.1/x"][M] == Fraction(1)

    def test_commutative_associative(self):
        rng = random.Random(5)
        a, b, c = (random_ledger(rng, dois=6) for _ in range(3))
        assert merge(a, b) == merge(b, a)
        assert merge(merge(a, b), c) == merge(a, merge(b, c))

    def test_any_permutation_matches_left_fold(self):
        rng = random.Random(99)
        parts = [random_ledger(rng, dois=4, journals=2) for _ in range(10)]
        reference = oracles.fold_merge(Ledger, merge, parts)
        for _ in range(6):
            shuffled = parts[:]
            rng.shuffle(shuffled)
            assert oracles.fold_merge(Ledger, merge, shuffled) == reference

    def test_merge_does_not_mutate_inputs(self):
        rng = random.Random(8)
        a = random_ledger(rng, dois=3)
        b = random_ledger(rng, dois=3)
        a_copy, b_copy = a.copy(), b.copy()
        merge(a, b)
        assert a == a_copy and b == b_copy


class TestResolution:
    def test_modal_year(self):
        ledger = Ledger()
        ledger.cited_years["10.1/x"] = Counter({2012: 2, 2013: 1})
        assert resolve_cited_year(ledger, "10.1/x") == 2012

    def test_tie_breaks_to_earliest(self):
        ledger = Ledger()
        ledger.cited_years["10.1/x"] = Counter({2011: 1, 2012: 1})
        assert resolve_cited_year(ledger, "10.1/x") == 2011

    def test_no_year_recorded(self):
        ledger = Ledger()
        assert resolve_cited_year(ledger, "10.1/x") is None

    def test_modal_journal_tie_lexicographic(self):
        ledger = Ledger()
        ledger.cited_journals["10.1/x"] = Counter({"B Journal": 1, "A Journal": 1})
        assert modal_cited_journal(ledger, "10.1/x") == "A Journal"


class TestRoundTrip:
    def test_exact_round_trip(self, tmp_path):
        ledger = random_ledger(random.Random(21), dois=20, journals=4)
        write_ledger(ledger, tmp_path)
        assert read_ledger(tmp_path) == ledger

    def test_synth_ledger_round_trip(self, tmp_path, synth_corpus):
        _, truth = synth_corpus
        write_ledger(truth.ledger, tmp_path)
        assert read_ledger(tmp_path) == truth.ledger

    def test_fraction_serialization_exact(self, tmp_path):
        ledger = Ledger()
        ledger.vectors["10.1/x"] = {M: Fraction(1, 3), D: Fraction(10**12, 7)}
        ledger.cohort_index["10.1/x"] = {("J", None)}
        write_ledger(ledger, tmp_path)
        back = read_ledger(tmp_path)
        assert back.vectors["10.1/x"][D] == Fraction(10**12, 7)
        assert back.cohort_index["10.1/x"] == {("J", None)}

    def test_missing_ledger_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_ledger(tmp_path)
