"""Command-line entry point: ingest, stats, synth, report.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Progress and
diagnostics go to stderr; data goes to files (or stdout for `report`).
Machine-readable outputs are byte-identical across re-runs with the same
inputs and config.
"""

from __future__ import annotations

import argparse
import functools
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .fields import FieldMapError, load_classification
from .jats import JatsError, is_research_article, parse_article
from .ledger import Ledger, outer_section_labels, read_ledger, write_ledger
from .metrics import (
    CORRELATION_AXES,
    SHARE_COLUMNS,
    anchored_subset_geomeans,
    correlation_tables,
    share_by_field,
    top_share_articles,
)
from .sections import SECTION_ORDER, load_name_table
from .synth import CorpusSpec, DEFAULT_STRUCTURE_MIX, generate_corpus

WORKERS_ENV = "SECCITE_WORKERS"


class CliError(Exception):
    """Runtime failure reported on stderr with exit code 1."""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _rate(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {text}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seccite",
        description="Count citations to articles separately by citing section.",
    )
    parser.add_argument("--version", action="version", version=f"seccite {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="Parse a JATS XML corpus into a ledger")
    ingest.add_argument("--corpus-dir", type=Path, default=None)
    ingest.add_argument("--output-dir", type=Path, default=None)
    ingest.add_argument("--workers", type=_positive_int, default=None)
    ingest.add_argument("--section-overrides", type=Path, default=None,
                        help="extra raw-name<TAB>Section mappings")
    ingest.add_argument("--config", type=Path, default=None,
                        help="flat key=value config file (flags win)")

    stats = sub.add_parser("stats", help="Compute all report tables from a ledger")
    stats.add_argument("--ledger-dir", type=Path, default=None)
    stats.add_argument("--classification", type=Path, default=None)
    stats.add_argument("--extension", type=Path, default=None)
    stats.add_argument("--year", type=int, default=None, help="cited-year filter (default 2012)")
    stats.add_argument("--min-total", type=str, default=None,
                       help="citation threshold for top-share lists (default 100)")
    stats.add_argument("--output-dir", type=Path, default=None)
    stats.add_argument("--config", type=Path, default=None)

    synth = sub.add_parser("synth", help="Generate a synthetic corpus + ground truth")
    synth.add_argument("--out-dir", type=Path, required=True)
    synth.add_argument("--articles", type=_positive_int, default=200)
    synth.add_argument("--seed", type=int, default=7)
    synth.add_argument("--doi-coverage", type=_rate, default=0.85)
    synth.add_argument("--range-rate", type=_rate, default=0.25)
    synth.add_argument("--refs-min", type=_positive_int, default=6)
    synth.add_argument("--refs-max", type=_positive_int, default=14)
    synth.add_argument("--structure-mix", type=str, default=None,
                       help='e.g. "IMRDC=0.5,ILM[RD]C=0.5"')

    report = sub.add_parser("report", help="Render a report.json bundle for humans")
    report.add_argument("--input", type=Path, required=True, help="path to report.json")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "ingest": cmd_ingest,
        "stats": cmd_stats,
        "synth": cmd_synth,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (CliError, JatsError, FieldMapError, ValueError, OSError) as exc:
        print(f"seccite: error: {exc}", file=sys.stderr)
        return 1


# ---------------------------------------------------------------------------
# Config resolution: flags > config file > defaults
# ---------------------------------------------------------------------------


def _load_config(path: Path | None) -> dict[str, str]:
    if path is None:
        return {}
    if not path.exists():
        raise CliError(f"config file not found (--config): {path}")
    values = {}
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise CliError(f"{path}:{lineno}: expected key=value")
        key, _, value = stripped.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args: argparse.Namespace, config: dict[str, str], key: str,
             default, convert=str):
    flag_value = getattr(args, key, None)
    if flag_value is not None:
        return flag_value
    if key in config:
        return convert(config[key])
    return default


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=4)
def _name_table(overrides: str | None):
    return load_name_table(overrides)


def _ingest_one(path_text: str, overrides: str | None):
    """Per-file worker: parse, tally, return a one-article ledger delta."""
    path = Path(path_text)
    try:
        parsed = parse_article(path.read_bytes(), source=path_text)
    except JatsError as exc:
        return path_text, None, {}, [str(exc)]
    counts = {"documents": 1}
    if not is_research_article(parsed.record):
        return path_text, Ledger(), counts, list(parsed.issues)
    counts["research_articles"] = 1
    counts["references"] = len(parsed.references)
    counts["references_with_doi"] = sum(
        1 for ref in parsed.references if ref.cited_doi is not None
    )
    labels = outer_section_labels(parsed, _name_table(overrides))
    delta = Ledger()
    delta.add_article(parsed, labels)
    return path_text, delta, counts, list(parsed.issues)


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    corpus_dir = _resolve(args, config, "corpus_dir", None, Path)
    output_dir = _resolve(args, config, "output_dir", None, Path)
    env_workers = os.environ.get(WORKERS_ENV)
    workers = _resolve(
        args, config, "workers", int(env_workers) if env_workers else 1, int
    )
    overrides = _resolve(args, config, "section_overrides", None, Path)
    if corpus_dir is None or output_dir is None:
        raise CliError("ingest requires --corpus-dir and --output-dir")
    if workers < 1:
        raise CliError("--workers must be >= 1")
    if not Path(corpus_dir).is_dir():
        raise CliError(f"corpus directory not found (--corpus-dir): {corpus_dir}")

    files = sorted(str(p) for p in Path(corpus_dir).rglob("*.xml"))
    if not files:
        raise CliError(f"no .xml files under {corpus_dir}")

    overrides_text = str(overrides) if overrides is not None else None
    if overrides_text is not None and not Path(overrides_text).exists():
        raise CliError(f"section override file not found: {overrides_text}")

    ledger = Ledger()
    totals = {"documents": 0, "research_articles": 0,
              "references": 0, "references_with_doi": 0}
    failures: list[tuple[str, str]] = []
    issues: list[tuple[str, str]] = []

    def consume(result) -> None:
        path_text, delta, counts, file_issues = result
        if delta is None:
            failures.append((path_text, file_issues[0]))
            return
        for key, value in counts.items():
            totals[key] += value
        for issue in file_issues:
            issues.append((path_text, issue))
        ledger.update(delta)

    if workers == 1:
        for i, path_text in enumerate(files, 1):
            consume(_ingest_one(path_text, overrides_text))
            if i % 200 == 0:
                print(f"seccite: ingested {i}/{len(files)}", file=sys.stderr)
    else:
        chunk = max(1, len(files) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(
                _ingest_one, files, [overrides_text] * len(files), chunksize=chunk
            ):
                consume(result)

    if totals["documents"] == 0:
        raise CliError(
            f"no parseable articles under {corpus_dir} "
            f"({len(failures)} malformed file(s))"
        )

    output_dir = Path(output_dir)
    written = write_ledger(ledger, output_dir)

    doi_pct = (
        100.0 * totals["references_with_doi"] / totals["references"]
        if totals["references"]
        else 0.0
    )
    log_lines = [
        f"documents seen\t{totals['documents']}",
        f"research articles kept\t{totals['research_articles']}",
        f"references seen\t{totals['references']}",
        f"references with DOIs\t{totals['references_with_doi']}\t({doi_pct:.1f}%)",
        f"cited DOIs in ledger\t{len(ledger.vectors)}",
        f"malformed files\t{len(failures)}",
    ]
    for path_text, reason in sorted(failures):
        log_lines.append(f"MALFORMED\t{path_text}\t{reason}")
    for path_text, issue in sorted(issues):
        log_lines.append(f"ISSUE\t{path_text}\t{issue}")
    (output_dir / "ingest_log.txt").write_text("\n".join(log_lines) + "\n", "utf-8")

    for line in log_lines[:6]:
        print("seccite: " + line.replace("\t", " "), file=sys.stderr)
    print(f"seccite: wrote {len(written)} ledger file(s) to {output_dir}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(value)


def _share_table_json(table) -> dict:
    return {
        "columns": list(SHARE_COLUMNS),
        "rows": {
            field: {
                "shares": [float(s) for s in row.shares],
                "weight": f"{row.weight.numerator}/{row.weight.denominator}",
            }
            for field, row in sorted(table.rows.items())
        },
    }


def _anchored_json(table) -> dict:
    return {
        "anchor": table.anchor.column,
        "rows": {
            field: {
                section.column: {
                    "n": result.n,
                    "mean": result.mean,
                    "ci_lo": result.ci_lo,
                    "ci_hi": result.ci_hi,
                }
                for section, result in row.items()
            }
            for field, row in sorted(table.rows.items())
        },
        "notes": list(table.notes),
    }


def _correlations_json(report) -> dict:
    return {
        "axes": list(CORRELATION_AXES),
        "year": report.year,
        "per_field": [
            {
                "field": matrix.field,
                "n": matrix.n,
                "values": [list(row) for row in matrix.values],
            }
            for matrix in report.per_field
        ],
        "median": [list(row) for row in report.median],
        "positive_share": [list(row) for row in report.positive_share],
        "notes": list(report.notes),
    }


def _write_tsv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("\t".join(header) + "\n")
        for row in rows:
            handle.write("\t".join(row) + "\n")


def _write_share_tsv(path: Path, table) -> None:
    rows = [
        [field, *(_fmt(s) for s in row.shares),
         f"{row.weight.numerator}/{row.weight.denominator}"]
        for field, row in sorted(table.rows.items())
    ]
    _write_tsv(path, ["field", *SHARE_COLUMNS, "weight"], rows)


def _write_anchored_tsv(path: Path, table) -> None:
    header = ["field", "n"]
    for section in SECTION_ORDER:
        header += [f"{section.column}_mean", f"{section.column}_lo", f"{section.column}_hi"]
    rows = []
    for field, row in sorted(table.rows.items()):
        n = row[SECTION_ORDER[0]].n
        cells = [field, str(n)]
        for section in SECTION_ORDER:
            result = row[section]
            cells += [_fmt(result.mean), _fmt(result.ci_lo), _fmt(result.ci_hi)]
        rows.append(cells)
    _write_tsv(path, header, rows)


def _write_matrix_tsv(path: Path, matrix, extra: list[tuple[str, str]] | None = None) -> None:
    header = ["axis", *CORRELATION_AXES]
    rows = []
    for axis, row in zip(CORRELATION_AXES, matrix):
        rows.append([axis, *(_fmt(v) for v in row)])
    if extra:
        for key, value in extra:
            rows.append([key, value] + [""] * (len(CORRELATION_AXES) - 1))
    _write_tsv(path, header, rows)


def cmd_stats(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    ledger_dir = _resolve(args, config, "ledger_dir", None, Path)
    classification = _resolve(args, config, "classification", None, Path)
    extension = _resolve(args, config, "extension", None, Path)
    year = _resolve(args, config, "year", 2012, int)
    min_total = Fraction(_resolve(args, config, "min_total", "100", str))
    output_dir = _resolve(args, config, "output_dir", None, Path)
    if ledger_dir is None or output_dir is None:
        raise CliError("stats requires --ledger-dir and --output-dir")
    if classification is None:
        raise CliError("missing classification file (--classification)")
    if not Path(classification).exists():
        raise CliError(f"classification file not found (--classification): {classification}")
    if extension is not None and not Path(extension).exists():
        raise CliError(f"extension file not found (--extension): {extension}")

    try:
        ledger = read_ledger(ledger_dir)
    except FileNotFoundError as exc:
        raise CliError(f"ledger not found (--ledger-dir): {exc}") from exc
    field_map = load_classification(classification, extension)

    share_source = share_by_field(ledger, field_map, "source-field")
    share_target = share_by_field(ledger, field_map, "target-field")
    anchored = {s: anchored_subset_geomeans(ledger, field_map, s) for s in SECTION_ORDER}
    correlations = correlation_tables(ledger, field_map, year)
    top = top_share_articles(ledger, min_total=min_total, k=2)

    config_used = {
        "ledger_dir": str(ledger_dir),
        "classification": str(classification),
        "extension": str(extension) if extension else "",
        "year": str(year),
        "min_total": str(min_total),
    }
    config_hash = hashlib.sha256(
        "\n".join(f"{k}={v}" for k, v in sorted(config_used.items())).encode("utf-8")
    ).hexdigest()

    bundle = {
        "provenance": {
            "tool": "seccite",
            "version": __version__,
            "config": config_used,
            "config_hash": config_hash,
        },
        "share": {
            "source-field": _share_table_json(share_source),
            "target-field": _share_table_json(share_target),
        },
        "anchored": {s.column: _anchored_json(anchored[s]) for s in SECTION_ORDER},
        "correlations": _correlations_json(correlations),
        "top_share": [
            {
                "doi": entry.cited_doi,
                "section": entry.section.column,
                "share": entry.share,
                "total": f"{entry.total.numerator}/{entry.total.denominator}",
            }
            for entry in top
        ],
    }

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    (output_dir / "report.json").write_text(
        json.dumps(bundle, sort_keys=True, indent=2) + "\n", "utf-8"
    )

    _write_share_tsv(output_dir / "share_source.tsv", share_source)
    _write_share_tsv(output_dir / "share_target.tsv", share_target)
    for section in SECTION_ORDER:
        _write_anchored_tsv(output_dir / f"anchored_{section.column}.tsv", anchored[section])
    per_field_rows = []
    for matrix in correlations.per_field:
        for axis, row in zip(CORRELATION_AXES, matrix.values):
            per_field_rows.append(
                [matrix.field, str(matrix.n), axis, *(_fmt(v) for v in row)]
            )
    _write_tsv(
        output_dir / "corr_fields.tsv",
        ["field", "n", "axis", *CORRELATION_AXES],
        per_field_rows,
    )
    _write_matrix_tsv(output_dir / "corr_median.tsv", correlations.median)
    _write_matrix_tsv(output_dir / "corr_positive.tsv", correlations.positive_share)
    _write_tsv(
        output_dir / "top_share.tsv",
        ["section", "doi", "share", "total"],
        [
            [e.section.column, e.cited_doi, _fmt(e.share),
             f"{e.total.numerator}/{e.total.denominator}"]
            for e in top
        ],
    )

    for note in [*correlations.notes, *(n for s in SECTION_ORDER for n in anchored[s].notes)]:
        print(f"seccite: note: {note}", file=sys.stderr)
    print(f"seccite: wrote report bundle to {output_dir}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


def _parse_structure_mix(text: str) -> dict[str, float]:
    mix = {}
    for item in text.split(","):
        if "=" not in item:
            raise CliError(f"bad --structure-mix entry {item!r}; expected PATTERN=prob")
        pattern, _, prob = item.partition("=")
        mix[pattern.strip()] = float(prob)
    return mix


def cmd_synth(args: argparse.Namespace) -> int:
    mix = (
        _parse_structure_mix(args.structure_mix)
        if args.structure_mix is not None
        else dict(DEFAULT_STRUCTURE_MIX)
    )
    if args.refs_max < args.refs_min:
        raise CliError("--refs-max must be >= --refs-min")
    spec = CorpusSpec(
        seed=args.seed,
        article_count=args.articles,
        structure_mix=mix,
        refs_per_article=(args.refs_min, args.refs_max),
        doi_coverage=args.doi_coverage,
        range_citation_rate=args.range_rate,
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    truth = generate_corpus(spec, args.out_dir)
    truth_dir = Path(args.out_dir) / "ground_truth"
    write_ledger(truth.ledger, truth_dir)
    summary = {k: truth.stats.get(k, 0) for k in
               ("documents", "research_articles", "references", "references_with_doi")}
    (truth_dir / "stats.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", "utf-8"
    )
    print(
        f"seccite: wrote {len(truth.files)} articles to {args.out_dir} "
        f"(ground truth in {truth_dir})",
        file=sys.stderr,
    )
    return 0


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def _render_share(name: str, table: dict) -> list[str]:
    lines = [f"== Share of citation weight by {name} =="]
    header = ["field".ljust(44)] + [c.rjust(11) for c in table["columns"]]
    lines.append("".join(header))
    for field, row in sorted(table["rows"].items()):
        cells = [field.ljust(44)]
        for share in row["shares"]:
            cells.append(f"{100.0 * share:10.1f}%")
        lines.append("".join(cells))
    return lines


def _render_matrix(title: str, axes: list[str], matrix: list[list[float | None]],
                   percent: bool = False) -> list[str]:
    lines = [f"== {title} =="]
    lines.append("".join(["axis".ljust(12)] + [a.rjust(12) for a in axes]))
    for axis, row in zip(axes, matrix):
        cells = [axis.ljust(12)]
        for value in row:
            if value is None:
                cells.append("-".rjust(12))
            elif percent:
                cells.append(f"{100.0 * value:11.0f}%")
            else:
                cells.append(f"{value:12.2f}")
        lines.append("".join(cells))
    return lines


def cmd_report(args: argparse.Namespace) -> int:
    if not args.input.exists():
        raise CliError(f"report bundle not found (--input): {args.input}")
    bundle = json.loads(args.input.read_text("utf-8"))
    out: list[str] = []
    provenance = bundle.get("provenance", {})
    out.append(f"seccite report (tool {provenance.get('version', '?')}, "
               f"config {provenance.get('config_hash', '?')[:12]})")
    out.append("")
    out.extend(_render_share("source field", bundle["share"]["source-field"]))
    out.append("")
    out.extend(_render_share("target field", bundle["share"]["target-field"]))
    out.append("")
    axes = bundle["correlations"]["axes"]
    out.extend(_render_matrix(
        f"Median rank correlation across fields (cited year {bundle['correlations']['year']})",
        axes, bundle["correlations"]["median"]))
    out.append("")
    out.extend(_render_matrix(
        "Share of fields with a positive correlation", axes,
        bundle["correlations"]["positive_share"], percent=True))
    out.append("")
    out.append("== Highly cited articles with the largest single-section share ==")
    for entry in bundle["top_share"]:
        total = Fraction(entry["total"])
        total_text = str(total.numerator) if total.denominator == 1 else f"{float(total):.2f}"
        out.append(
            f"  {entry['section']:<12} {entry['doi']:<40} "
            f"share {100.0 * entry['share']:5.1f}%  total {total_text}"
        )
    notes = bundle["correlations"].get("notes", [])
    for anchored in bundle.get("anchored", {}).values():
        notes = [*notes, *anchored.get("notes", [])]
    if notes:
        out.append("")
        out.append("== Notes ==")
        out.extend(f"  {note}" for note in notes)
    print("\n".join(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
