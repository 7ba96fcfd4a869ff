"""Statistical analyses over a citation ledger.

Share tables (per source or target field), geometric means with one offset
over anchored subsets, per-field rank-correlation matrices with cross-field
medians and positive counts, and highly-cited single-section detection.

All functions are pure over an immutable ledger. Fractions are converted to
floats only here, at the metrics boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import exp, expm1, fsum, log, log1p, pi, sqrt
from statistics import median
from typing import Mapping, Sequence

from scipy import special as _special
from scipy import stats as _scipy_stats

from .fields import FieldMap, field_of
from .ledger import OTHER_COLUMN, Ledger, modal_cited_journal, resolve_cited_year
from .sections import SECTION_ORDER, CanonicalSection

ALL_COLUMN = "all"
UNCLASSIFIED = "unclassified"

SHARE_COLUMNS: tuple[str, ...] = tuple(s.column for s in SECTION_ORDER) + (OTHER_COLUMN,)
CORRELATION_AXES: tuple[str, ...] = tuple(s.column for s in SECTION_ORDER) + (ALL_COLUMN,)


# ---------------------------------------------------------------------------
# Offset geometric mean
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeoMeanResult:
    n: int
    mean: float
    ci_lo: float
    ci_hi: float


@lru_cache(maxsize=4096)
def _t_quantile(p: float, df: int) -> float:
    """Two-sided Student-t quantile at full double precision.

    scipy's ppf drifts to ~1e-11 relative error at low df, so its value only
    seeds Newton iterations on the survival function (regularized incomplete
    beta), which converge to machine precision.
    """
    t = float(_scipy_stats.t.ppf(p, df))
    q = 1.0 - p
    log_pdf_const = (
        float(_special.gammaln((df + 1) / 2.0))
        - float(_special.gammaln(df / 2.0))
        - 0.5 * log(df * pi)
    )
    for _ in range(3):
        survival = 0.5 * float(_special.betainc(df / 2.0, 0.5, df / (df + t * t)))
        pdf = exp(log_pdf_const - (df + 1) / 2.0 * log1p(t * t / df))
        t += (survival - q) / pdf
    return t


def geometric_mean_ci(values: Sequence[float], confidence: float = 0.95) -> GeoMeanResult:
    """Offset geometric mean exp(mean(ln(1+x)))-1 with a t-based CI.

    The interval is a two-sided t-interval on the log-transformed values,
    back-transformed with exp(.)-1. A single value has a degenerate interval
    equal to the mean.
    """
    if not values:
        raise ValueError("geometric_mean_ci requires at least one value")
    if any(v < 0 for v in values):
        raise ValueError("values must be non-negative")
    n = len(values)
    logs = [log1p(v) for v in values]
    center = fsum(logs) / n
    mean = expm1(center)
    if n == 1:
        return GeoMeanResult(1, mean, mean, mean)
    variance = fsum((y - center) ** 2 for y in logs) / (n - 1)
    se = sqrt(variance / n)
    t = _t_quantile(0.5 + confidence / 2.0, n - 1)
    return GeoMeanResult(n, mean, expm1(center - t * se), expm1(center + t * se))


# ---------------------------------------------------------------------------
# Spearman rank correlation with average ranks for ties
# ---------------------------------------------------------------------------


def _average_ranks(values: Sequence[float]) -> list[float]:
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    start = 0
    while start < n:
        stop = start
        while stop + 1 < n and values[order[stop + 1]] == values[order[start]]:
            stop += 1
        mean_rank = (start + stop) / 2.0 + 1.0  # ranks are 1-based
        for k in range(start, stop + 1):
            ranks[order[k]] = mean_rank
        start = stop + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Spearman rank correlation; ties get average ranks.

    Returns None (undefined, reported as missing) when either rank vector
    has zero variance. Raises ValueError for mismatched lengths or n < 2.
    """
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValueError("spearman requires at least two observations")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    n = len(rx)
    mx = fsum(rx) / n
    my = fsum(ry) / n
    dx = [r - mx for r in rx]
    dy = [r - my for r in ry]
    sxx = fsum(d * d for d in dx)
    syy = fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = fsum(a * b for a, b in zip(dx, dy)) / sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


# ---------------------------------------------------------------------------
# Share tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShareRow:
    shares: tuple[float, ...]  # six sections then "other", summing to 1
    weight: Fraction


@dataclass(frozen=True)
class ShareTable:
    perspective: str  # "source-field" | "target-field"
    rows: Mapping[str, ShareRow]


def share_row(weights: Sequence[Fraction | float | int]) -> tuple[float, ...]:
    """Normalize one row of section weights into shares summing to 1."""
    exact = [Fraction(w) if not isinstance(w, Fraction) else w for w in weights]
    total = sum(exact, Fraction(0))
    if total <= 0:
        raise ValueError("cannot normalize a row with no weight")
    return tuple(float(w / total) for w in exact)


def _seven(counts: Mapping[CanonicalSection, Fraction], other: Fraction) -> list[Fraction]:
    row = [counts.get(s, Fraction(0)) for s in SECTION_ORDER]
    row.append(other)
    return row


def share_by_field(ledger: Ledger, field_map: FieldMap, perspective: str) -> ShareTable:
    """Citation-weight shares per field over seven columns (six sections + other).

    source-field groups by the citing journal's field; target-field groups by
    the cited DOI's field via its modal cited-journal title. Journals that
    match no field are gathered under an "unclassified" row.
    """
    if perspective not in ("source-field", "target-field"):
        raise ValueError(f"unknown perspective {perspective!r}")
    weights: dict[str, list[Fraction]] = {}

    def bucket(field: str | None) -> list[Fraction]:
        key = field if field is not None else UNCLASSIFIED
        return weights.setdefault(key, [Fraction(0)] * 7)

    if perspective == "source-field":
        journals = set(ledger.source_sections) | set(ledger.source_other)
        for journal in sorted(journals):
            issns = sorted(ledger.source_issns.get(journal, set()))
            row = bucket(field_of(field_map, journal, issns))
            for i, value in enumerate(
                _seven(
                    ledger.source_sections.get(journal, {}),
                    ledger.source_other.get(journal, Fraction(0)),
                )
            ):
                row[i] += value
    else:
        for doi in ledger.dois():
            title = modal_cited_journal(ledger, doi)
            row = bucket(field_of(field_map, title))
            for i, section in enumerate(SECTION_ORDER):
                row[i] += ledger.vectors[doi].get(section, Fraction(0))
        for title in sorted(ledger.target_other):
            row = bucket(field_of(field_map, title))
            row[6] += ledger.target_other[title]

    rows = {}
    for field, row in weights.items():
        total = sum(row, Fraction(0))
        if total > 0:
            rows[field] = ShareRow(shares=share_row(row), weight=total)
    return ShareTable(perspective=perspective, rows=rows)


# ---------------------------------------------------------------------------
# Anchored-subset geometric means
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnchoredTable:
    anchor: CanonicalSection
    rows: Mapping[str, Mapping[CanonicalSection, GeoMeanResult]]
    notes: tuple[str, ...]


def _dois_by_field(ledger: Ledger, field_map: FieldMap) -> dict[str, list[str]]:
    """Ledger DOIs grouped by target field; unclassifiable DOIs excluded."""
    grouped: dict[str, list[str]] = {}
    for doi in ledger.dois():
        field = field_of(field_map, modal_cited_journal(ledger, doi))
        if field is not None:
            grouped.setdefault(field, []).append(doi)
    return grouped


def anchored_subset_geomeans(
    ledger: Ledger, field_map: FieldMap, anchor: CanonicalSection
) -> AnchoredTable:
    """Per-field geometric means over DOIs with >= 1 citation in the anchor.

    Zero-truncated: only DOIs present in the ledger participate. Fields with
    an empty anchored subset are omitted, with a note.
    """
    rows: dict[str, dict[CanonicalSection, GeoMeanResult]] = {}
    notes: list[str] = []
    for field, dois in sorted(_dois_by_field(ledger, field_map).items()):
        subset = [doi for doi in dois if ledger.counts(doi, anchor) >= 1]
        if not subset:
            notes.append(f"{field}: no articles cited in {anchor.value}; row omitted")
            continue
        row = {}
        for section in SECTION_ORDER:
            values = [float(ledger.counts(doi, section)) for doi in subset]
            row[section] = geometric_mean_ci(values)
        rows[field] = row
    return AnchoredTable(anchor=anchor, rows=rows, notes=tuple(notes))


# ---------------------------------------------------------------------------
# Correlation tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationMatrix:
    field: str
    year: int
    n: int
    values: tuple[tuple[float | None, ...], ...]  # 7x7 over sections + all


@dataclass(frozen=True)
class CorrelationReport:
    year: int
    per_field: tuple[CorrelationMatrix, ...]
    median: tuple[tuple[float | None, ...], ...]
    positive_share: tuple[tuple[float | None, ...], ...]
    notes: tuple[str, ...]


def _correlation_matrix(ledger: Ledger, dois: Sequence[str]) -> tuple[tuple[float | None, ...], ...]:
    columns = []
    for section in SECTION_ORDER:
        columns.append([float(ledger.counts(doi, section)) for doi in dois])
    columns.append([float(ledger.total(doi)) for doi in dois])
    size = len(columns)
    cells: list[list[float | None]] = [[None] * size for _ in range(size)]
    for i in range(size):
        cells[i][i] = 1.0
        for j in range(i + 1, size):
            value = spearman(columns[i], columns[j])
            cells[i][j] = value
            cells[j][i] = value
    return tuple(tuple(row) for row in cells)


def aggregate_correlations(
    matrices: Sequence[tuple[tuple[float | None, ...], ...]],
) -> tuple[tuple[tuple[float | None, ...], ...], tuple[tuple[float | None, ...], ...]]:
    """Per-cell (median, positive-share) across same-shaped matrices.

    Undefined cells are excluded per cell; the median of an even count is the
    average of the two middle values. Cells with no defined value stay None.
    """
    size = len(CORRELATION_AXES)
    median_cells: list[list[float | None]] = [[None] * size for _ in range(size)]
    positive_cells: list[list[float | None]] = [[None] * size for _ in range(size)]
    for i in range(size):
        for j in range(size):
            observed = [m[i][j] for m in matrices if m[i][j] is not None]
            if observed:
                median_cells[i][j] = float(median(observed))
                positive_cells[i][j] = sum(1 for v in observed if v > 0) / len(observed)
    return (
        tuple(tuple(row) for row in median_cells),
        tuple(tuple(row) for row in positive_cells),
    )


def correlation_tables(
    ledger: Ledger, field_map: FieldMap, year: int
) -> CorrelationReport:
    """Per-field 7x7 Spearman matrices for DOIs resolved to one cited year,
    with a per-cell median matrix and positive-correlation share matrix
    across fields."""
    if year < 1900:
        raise ValueError(f"year {year} out of range")
    per_field: list[CorrelationMatrix] = []
    notes: list[str] = []
    for field, dois in sorted(_dois_by_field(ledger, field_map).items()):
        sample = [doi for doi in dois if resolve_cited_year(ledger, doi) == year]
        if len(sample) < 2:
            notes.append(f"{field}: n={len(sample)} < 2 for {year}; excluded")
            continue
        per_field.append(
            CorrelationMatrix(
                field=field,
                year=year,
                n=len(sample),
                values=_correlation_matrix(ledger, sample),
            )
        )

    median_cells, positive_cells = aggregate_correlations([m.values for m in per_field])
    return CorrelationReport(
        year=year,
        per_field=tuple(per_field),
        median=median_cells,
        positive_share=positive_cells,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Highly cited single-section articles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TopShareEntry:
    cited_doi: str
    section: CanonicalSection
    share: float
    total: Fraction


def top_share_articles(
    ledger: Ledger, min_total: Fraction | int = 100, k: int = 2
) -> list[TopShareEntry]:
    """For each section, the k qualifying DOIs with the highest section share.

    Qualification is total >= min_total over the six sections combined. Ties
    break to the larger total, then the lexicographically smaller DOI. The
    result is ordered by section, then descending share.
    """
    min_total = Fraction(min_total)
    if min_total <= 0:
        raise ValueError("min_total must be positive")
    if k < 1:
        raise ValueError("k must be at least 1")
    qualifying = [(doi, ledger.total(doi)) for doi in ledger.dois()]
    qualifying = [(doi, total) for doi, total in qualifying if total >= min_total]
    entries: list[TopShareEntry] = []
    for section in SECTION_ORDER:
        scored = [
            (ledger.counts(doi, section) / total, total, doi)
            for doi, total in qualifying
        ]
        scored.sort(key=lambda item: (-item[0], -item[1], item[2]))
        for share, total, doi in scored[:k]:
            entries.append(
                TopShareEntry(cited_doi=doi, section=section, share=float(share), total=total)
            )
    return entries
