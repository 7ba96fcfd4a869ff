"""Fractional per-section citation counts per cited DOI, mergeable and exact.

Every (citing article, cited DOI) pair contributes total weight exactly 1:
split over the six canonical sections in proportion to mention counts when
the pair has at least one recognized-section mention, otherwise 1 to the
"other" bucket (unrecognized or outside-section contexts). All weights are
`fractions.Fraction`, so conservation, merge associativity/commutativity and
worker-count independence are exact, not approximate.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .jats import ParsedArticle, ReferenceEntry
from .sections import SECTION_ORDER, CanonicalSection, SectionLabel, normalize_section

OTHER_COLUMN = "other"


def outer_section_labels(
    article: ParsedArticle, table: Mapping[str, CanonicalSection] | None = None
) -> dict[str, SectionLabel]:
    """Normalize every outer (depth-1) section of an article."""
    labels = {}
    for node_id in article.sections.roots:
        node = article.sections.nodes[node_id]
        labels[node_id] = normalize_section(node.sec_type, node.title_raw, table)
    return labels


@dataclass(frozen=True)
class ArticleTally:
    """Recognized-section mention counts of one citing article.

    mentions: cited DOI -> section -> mention count (>= 1). Only citations
    with a canonical section and a cited DOI appear.
    """

    citing_doi: str | None
    citing_journal: str
    citing_year: int | None
    mentions: Mapping[str, Mapping[CanonicalSection, int]]


@dataclass(frozen=True)
class CitationContribution:
    cited_doi: str
    section: CanonicalSection
    weight: Fraction


@dataclass(frozen=True)
class SectionCitationVector:
    """Six fractional section counts for one cited DOI."""

    cited_doi: str
    counts: Mapping[CanonicalSection, Fraction]

    @property
    def total(self) -> Fraction:
        return sum(self.counts.values(), Fraction(0))


def _mention_maps(
    article: ParsedArticle, labels: Mapping[str, SectionLabel]
) -> tuple[dict[str, dict[CanonicalSection, int]], dict[str, int]]:
    """Split an article's markers into recognized and other-context mentions.

    Returns (recognized: doi -> section -> count, other: doi -> count). A
    marker counts each distinct cited DOI once.
    """
    refs = article.reference_map()
    recognized: dict[str, dict[CanonicalSection, int]] = {}
    other: dict[str, int] = {}
    for citation in article.citations:
        dois = sorted(
            {
                refs[rid].cited_doi
                for rid in citation.ref_ids
                if rid in refs and refs[rid].cited_doi is not None
            }
        )
        if not dois:
            continue
        label = None
        if citation.outer_section_node_id is not None:
            label = labels.get(citation.outer_section_node_id)
        if label is not None and label.is_recognized:
            assert label.section is not None
            for doi in dois:
                per_section = recognized.setdefault(doi, {})
                per_section[label.section] = per_section.get(label.section, 0) + 1
        else:
            for doi in dois:
                other[doi] = other.get(doi, 0) + 1
    return recognized, other


def tally_article(
    article: ParsedArticle, labels: Mapping[str, SectionLabel]
) -> ArticleTally:
    """Count recognized-section mentions per cited DOI for one article.

    ``labels`` maps outer-section node ids to SectionLabels. Citations in
    unrecognized sections, outside any section, or to references without a
    DOI are dropped. Callers are expected to have filtered to research
    articles already.
    """
    recognized, _ = _mention_maps(article, labels)
    return ArticleTally(
        citing_doi=article.record.doi,
        citing_journal=article.record.journal_title,
        citing_year=article.record.pub_year,
        mentions=recognized,
    )


def fractionalize(tally: ArticleTally) -> list[CitationContribution]:
    """Turn mention counts into per-DOI weights that sum to exactly 1."""
    contributions: list[CitationContribution] = []
    for doi in sorted(tally.mentions):
        per_section = tally.mentions[doi]
        total = sum(per_section.values())
        for section in SECTION_ORDER:
            count = per_section.get(section)
            if count:
                contributions.append(
                    CitationContribution(doi, section, Fraction(count, total))
                )
    return contributions


@dataclass
class Ledger:
    """Mergeable corpus aggregate of section citation weights.

    vectors and cohort_index always share a key set. Sidecar aggregates
    (cited-meta evidence, per-citing-journal weights, per-cited-journal
    other weights) exist so both share-table perspectives can be computed
    from a persisted ledger alone.
    """

    vectors: dict[str, dict[CanonicalSection, Fraction]] = field(default_factory=dict)
    cohort_index: dict[str, set[tuple[str, int | None]]] = field(default_factory=dict)
    cited_journals: dict[str, Counter] = field(default_factory=dict)
    cited_years: dict[str, Counter] = field(default_factory=dict)
    source_sections: dict[str, dict[CanonicalSection, Fraction]] = field(default_factory=dict)
    source_other: dict[str, Fraction] = field(default_factory=dict)
    source_issns: dict[str, set[str]] = field(default_factory=dict)
    target_other: dict[str, Fraction] = field(default_factory=dict)

    def dois(self) -> list[str]:
        return sorted(self.vectors)

    def vector(self, doi: str) -> SectionCitationVector:
        return SectionCitationVector(doi, dict(self.vectors[doi]))

    def total(self, doi: str) -> Fraction:
        return sum(self.vectors[doi].values(), Fraction(0))

    def counts(self, doi: str, section: CanonicalSection) -> Fraction:
        return self.vectors[doi].get(section, Fraction(0))

    def add_article(self, article: ParsedArticle, labels: Mapping[str, SectionLabel]) -> None:
        """Fold one research article's citations into this ledger."""
        recognized, other = _mention_maps(article, labels)
        journal = article.record.journal_title
        year = article.record.pub_year
        refs_by_doi: dict[str, ReferenceEntry] = {}
        for ref in article.references:
            if ref.cited_doi is not None and ref.cited_doi not in refs_by_doi:
                refs_by_doi[ref.cited_doi] = ref

        tally = ArticleTally(article.record.doi, journal, year, recognized)
        for contribution in fractionalize(tally):
            doi = contribution.cited_doi
            vector = self.vectors.setdefault(doi, {})
            vector[contribution.section] = (
                vector.get(contribution.section, Fraction(0)) + contribution.weight
            )
            per_journal = self.source_sections.setdefault(journal, {})
            per_journal[contribution.section] = (
                per_journal.get(contribution.section, Fraction(0)) + contribution.weight
            )
        for doi in recognized:
            self.cohort_index.setdefault(doi, set()).add((journal, year))
            ref = refs_by_doi.get(doi)
            if ref is not None:
                if ref.cited_journal_title:
                    self.cited_journals.setdefault(doi, Counter())[ref.cited_journal_title] += 1
                if ref.cited_year is not None:
                    self.cited_years.setdefault(doi, Counter())[ref.cited_year] += 1

        for doi in other:
            if doi in recognized:
                continue  # mixed pairs carry all their weight in the six sections
            self.source_other[journal] = self.source_other.get(journal, Fraction(0)) + 1
            ref = refs_by_doi.get(doi)
            title = (ref.cited_journal_title if ref is not None else None) or ""
            self.target_other[title] = self.target_other.get(title, Fraction(0)) + 1
        if recognized or other:
            issns = self.source_issns.setdefault(journal, set())
            issns.update(article.record.issn_list)

    def update(self, other: "Ledger") -> None:
        """In-place pointwise addition / evidence union."""
        for doi, counts in other.vectors.items():
            vector = self.vectors.setdefault(doi, {})
            for section, weight in counts.items():
                vector[section] = vector.get(section, Fraction(0)) + weight
        for doi, cohort in other.cohort_index.items():
            self.cohort_index.setdefault(doi, set()).update(cohort)
        for doi, journals in other.cited_journals.items():
            self.cited_journals.setdefault(doi, Counter()).update(journals)
        for doi, years in other.cited_years.items():
            self.cited_years.setdefault(doi, Counter()).update(years)
        for journal, counts in other.source_sections.items():
            per_journal = self.source_sections.setdefault(journal, {})
            for section, weight in counts.items():
                per_journal[section] = per_journal.get(section, Fraction(0)) + weight
        for journal, weight in other.source_other.items():
            self.source_other[journal] = self.source_other.get(journal, Fraction(0)) + weight
        for journal, issns in other.source_issns.items():
            self.source_issns.setdefault(journal, set()).update(issns)
        for title, weight in other.target_other.items():
            self.target_other[title] = self.target_other.get(title, Fraction(0)) + weight

    def copy(self) -> "Ledger":
        result = Ledger()
        result.update(self)
        return result


def merge(left: Ledger, right: Ledger) -> Ledger:
    """Pointwise rational addition of two ledgers; associative and commutative."""
    result = left.copy()
    result.update(right)
    return result


def resolve_cited_year(ledger: Ledger, doi: str) -> int | None:
    """Modal cited-year across citing references; ties break to the earliest."""
    years = ledger.cited_years.get(doi)
    if not years:
        return None
    return min(years.items(), key=lambda item: (-item[1], item[0]))[0]


def modal_cited_journal(ledger: Ledger, doi: str) -> str:
    """Modal cited-journal title; ties break lexicographically. "" if unseen."""
    journals = ledger.cited_journals.get(doi)
    if not journals:
        return ""
    return min(journals.items(), key=lambda item: (-item[1], item[0]))[0]


# ---------------------------------------------------------------------------
# Persistence. One main TSV plus sidecar TSVs; exact round-trip.
# ---------------------------------------------------------------------------

LEDGER_COLUMNS = [s.column for s in SECTION_ORDER]


def _format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def _format_year(year: int | None) -> str:
    return "" if year is None else str(year)


def write_ledger(ledger: Ledger, directory: str | Path, stem: str = "ledger") -> list[Path]:
    """Write the ledger and its sidecars as TSV files; returns written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []

    main = directory / f"{stem}.tsv"
    with main.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("doi\t" + "\t".join(LEDGER_COLUMNS) + "\ttotal\n")
        for doi in sorted(ledger.vectors):
            counts = ledger.vectors[doi]
            cells = [_format_fraction(counts.get(s, Fraction(0))) for s in SECTION_ORDER]
            cells.append(_format_fraction(ledger.total(doi)))
            handle.write(doi + "\t" + "\t".join(cells) + "\n")
    paths.append(main)

    cohort = directory / f"{stem}.cohort.tsv"
    with cohort.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("doi\tciting_journal\tciting_year\n")
        for doi in sorted(ledger.cohort_index):
            rows = sorted(
                ledger.cohort_index[doi],
                key=lambda item: (item[0], item[1] is None, item[1] or 0),
            )
            for journal, year in rows:
                handle.write(f"{doi}\t{journal}\t{_format_year(year)}\n")
    paths.append(cohort)

    meta = directory / f"{stem}.meta.tsv"
    with meta.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("doi\tkind\tvalue\tcount\n")
        for doi in sorted(set(ledger.cited_journals) | set(ledger.cited_years)):
            for title, count in sorted(ledger.cited_journals.get(doi, {}).items()):
                handle.write(f"{doi}\tjournal\t{title}\t{count}\n")
            for year, count in sorted(ledger.cited_years.get(doi, {}).items()):
                handle.write(f"{doi}\tyear\t{year}\t{count}\n")
    paths.append(meta)

    sources = directory / f"{stem}.sources.tsv"
    with sources.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("journal\tissns\t" + "\t".join(LEDGER_COLUMNS) + f"\t{OTHER_COLUMN}\n")
        for journal in sorted(set(ledger.source_sections) | set(ledger.source_other)):
            counts = ledger.source_sections.get(journal, {})
            issns = ";".join(sorted(ledger.source_issns.get(journal, set())))
            cells = [_format_fraction(counts.get(s, Fraction(0))) for s in SECTION_ORDER]
            cells.append(_format_fraction(ledger.source_other.get(journal, Fraction(0))))
            handle.write(journal + "\t" + issns + "\t" + "\t".join(cells) + "\n")
    paths.append(sources)

    targets = directory / f"{stem}.targets.tsv"
    with targets.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"cited_journal\t{OTHER_COLUMN}\n")
        for title in sorted(ledger.target_other):
            handle.write(f"{title}\t{_format_fraction(ledger.target_other[title])}\n")
    paths.append(targets)
    return paths


def _read_rows(path: Path) -> Iterable[list[str]]:
    with path.open("r", encoding="utf-8", newline="\n") as handle:
        header = handle.readline()
        width = len(header.rstrip("\n").split("\t"))
        for line in handle:
            yield line.rstrip("\n").split("\t", width - 1)


def read_ledger(directory: str | Path, stem: str = "ledger") -> Ledger:
    """Load a ledger written by write_ledger; exact inverse."""
    directory = Path(directory)
    ledger = Ledger()

    main = directory / f"{stem}.tsv"
    if not main.exists():
        raise FileNotFoundError(f"ledger file not found: {main}")
    for row in _read_rows(main):
        doi, cells = row[0], row[1:]
        counts = {}
        for section, cell in zip(SECTION_ORDER, cells):
            value = _parse_fraction(cell)
            if value:
                counts[section] = value
        ledger.vectors[doi] = counts
        ledger.cohort_index.setdefault(doi, set())

    for row in _read_rows(directory / f"{stem}.cohort.tsv"):
        doi, journal, year = row
        ledger.cohort_index.setdefault(doi, set()).add(
            (journal, int(year) if year else None)
        )

    for row in _read_rows(directory / f"{stem}.meta.tsv"):
        doi, kind, value, count = row
        if kind == "journal":
            ledger.cited_journals.setdefault(doi, Counter())[value] += int(count)
        elif kind == "year":
            ledger.cited_years.setdefault(doi, Counter())[int(value)] += int(count)
        else:
            raise ValueError(f"unknown meta kind {kind!r} in {stem}.meta.tsv")

    for row in _read_rows(directory / f"{stem}.sources.tsv"):
        journal, issns = row[0], row[1]
        cells = row[2:]
        counts = {}
        for section, cell in zip(SECTION_ORDER, cells):
            value = _parse_fraction(cell)
            if value:
                counts[section] = value
        if counts:
            ledger.source_sections[journal] = counts
        other = _parse_fraction(cells[-1])
        if other:
            ledger.source_other[journal] = other
        if issns:
            ledger.source_issns[journal] = set(issns.split(";"))
        else:
            ledger.source_issns.setdefault(journal, set())

    for row in _read_rows(directory / f"{stem}.targets.tsv"):
        title, weight = row
        ledger.target_other[title] = _parse_fraction(weight)

    return ledger
