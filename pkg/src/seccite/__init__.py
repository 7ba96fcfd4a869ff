"""seccite: count citations separately by the section of the citing article."""

__version__ = "0.1.0"

from .fields import FieldMap, FieldMapError, field_of, load_classification
from .jats import (
    ArticleRecord,
    ArticleStructureError,
    ExpansionError,
    InTextCitation,
    JatsError,
    ParsedArticle,
    ReferenceEntry,
    SectionNode,
    XmlParseError,
    expand_citation_list,
    is_research_article,
    locate_in_text_citations,
    normalize_doi,
    parse_article,
)
from .ledger import (
    ArticleTally,
    CitationContribution,
    Ledger,
    SectionCitationVector,
    fractionalize,
    merge,
    modal_cited_journal,
    outer_section_labels,
    read_ledger,
    resolve_cited_year,
    tally_article,
    write_ledger,
)
from .metrics import (
    AnchoredTable,
    CorrelationMatrix,
    CorrelationReport,
    GeoMeanResult,
    ShareTable,
    TopShareEntry,
    anchored_subset_geomeans,
    correlation_tables,
    geometric_mean_ci,
    share_by_field,
    share_row,
    spearman,
    top_share_articles,
)
from .sections import (
    CanonicalSection,
    SECTION_ORDER,
    SectionLabel,
    load_name_table,
    normalize_section,
    strip_title_numbering,
)
from .synth import CorpusSpec, GroundTruth, generate_corpus, write_classification

__all__ = [
    "__version__",
    "ArticleRecord",
    "ArticleStructureError",
    "ArticleTally",
    "AnchoredTable",
    "CanonicalSection",
    "CitationContribution",
    "CorrelationMatrix",
    "CorrelationReport",
    "CorpusSpec",
    "ExpansionError",
    "FieldMap",
    "FieldMapError",
    "GeoMeanResult",
    "GroundTruth",
    "InTextCitation",
    "JatsError",
    "Ledger",
    "ParsedArticle",
    "ReferenceEntry",
    "SECTION_ORDER",
    "SectionCitationVector",
    "SectionLabel",
    "SectionNode",
    "ShareTable",
    "TopShareEntry",
    "XmlParseError",
    "anchored_subset_geomeans",
    "correlation_tables",
    "expand_citation_list",
    "field_of",
    "fractionalize",
    "generate_corpus",
    "geometric_mean_ci",
    "is_research_article",
    "load_classification",
    "load_name_table",
    "locate_in_text_citations",
    "merge",
    "modal_cited_journal",
    "normalize_doi",
    "normalize_section",
    "outer_section_labels",
    "parse_article",
    "read_ledger",
    "resolve_cited_year",
    "share_by_field",
    "share_row",
    "spearman",
    "strip_title_numbering",
    "tally_article",
    "top_share_articles",
    "write_classification",
    "write_ledger",
]
