from __future__ import annotations

import pytest

from seccite.sections import (
    CanonicalSection,
    DEFAULT_NAME_TABLE,
    SECTION_ORDER,
    load_name_table,
    normalize_section,
    strip_title_numbering,
)

# The recognized names, frozen here independently of the module's table.
RECOGNIZED = {
    CanonicalSection.INTRODUCTION: ["intro", "introduction"],
    CanonicalSection.BACKGROUND: ["background", "literature review", "related literature"],
    CanonicalSection.METHODS: [
        "materials|methods", "materials and methods", "methods", "materialsandmethods",
        "materials", "statistical analysis", "data analysis", "statistical analyses",
        "statistics", "study design", "study population", "data collection", "procedure",
        "statistical methods", "measures", "patients and methods", "data",
        "experimental design", "research design and methods", "data extraction",
        "sample collection", "experimental procedures", "methods/design",
    ],
    CanonicalSection.RESULTS: ["results"],
    CanonicalSection.DISCUSSION: [
        "discussion", "results and discussion", "limitations",
        "strengths and limitations", "study limitations",
    ],
    CanonicalSection.CONCLUSION: [
        "conclusion", "conclusions", "summary", "concluding remarks",
        "summary and conclusions", "summary and conclusion", "conclusions and outlook",
        "conclusions and perspectives", "conclusions and recommendations",
        "conclusion and perspectives", "conclusion and outlook",
        "conclusions and future work", "conclusion and future work",
    ],
}

# One-off perturbations of table entries; none may resolve.
HELD_OUT = [
    "discussions", "introductio", "introductions", "backgrounds",
    "literature reviews", "related literatures", "methodss", "method",
    "materialsandmethod", "material", "statistical analysi", "data analyses",
    "statistic", "study designs", "study populations", "data collections",
    "procedures", "statistical method", "measure", "patient and methods",
    "datas", "experimental designs", "research design and method",
    "data extractions", "sample collections", "experimental procedure",
    "methods/designs", "result", "limitation", "strengths and limitation",
    "summaries", "concluding remark", "conclusion and outlooks",
]


class TestNameTable:
    def test_every_listed_name_resolves(self):
        for section, names in RECOGNIZED.items():
            for name in names:
                label = normalize_section(None, name)
                assert label.section is section, name
                # sec-type attribute path resolves identically
                assert normalize_section(name, None).section is section

    def test_table_is_exactly_the_listed_names(self):
        listed = {name for names in RECOGNIZED.values() for name in names}
        assert set(DEFAULT_NAME_TABLE) == listed

    def test_held_out_perturbations_unrecognized(self):
        listed = {name for names in RECOGNIZED.values() for name in names}
        assert len(HELD_OUT) >= 30
        for name in HELD_OUT:
            assert name not in listed, f"{name!r} is not held out"
            label = normalize_section(None, name)
            assert not label.is_recognized, name
            assert label.raw == name

    def test_every_entry_maps_to_one_section(self):
        seen = {}
        for section, names in RECOGNIZED.items():
            for name in names:
                assert name not in seen, f"{name!r} in two lists"
                seen[name] = section


class TestStripTitleNumbering:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("2. Materials and Methods", "materials and methods"),
            ("Introduction", "introduction"),
            ("3) Results:", "results"),
            ("2.1   Data  Collection", "data collection"),
            ("  DISCUSSION.  ", "discussion"),
            ("1 Introduction", "introduction"),
        ],
    )
    def test_examples(self, raw, expected):
        assert strip_title_numbering(raw) == expected

    def test_idempotent(self):
        for raw in ("2. Methods", "RESULTS:", "plain title"):
            once = strip_title_numbering(raw)
            assert strip_title_numbering(once) == once


class TestNormalizeSection:
    def test_title_with_numbering(self):
        assert normalize_section(None, "4. Results and Discussion").section is (
            CanonicalSection.DISCUSSION
        )

    def test_literature_review_is_background(self):
        assert normalize_section(None, "Literature Review").section is (
            CanonicalSection.BACKGROUND
        )

    def test_unlisted_title_unrecognized(self):
        label = normalize_section(None, "Acknowledgements")
        assert not label.is_recognized
        assert label.raw == "acknowledgements"

    def test_attribute_beats_title(self):
        label = normalize_section("results", "Discussion")
        assert label.section is CanonicalSection.RESULTS

    def test_unmatched_attribute_falls_back_to_title(self):
        label = normalize_section("body-section", "Methods")
        assert label.section is CanonicalSection.METHODS

    def test_total_on_empty_input(self):
        label = normalize_section(None, None)
        assert not label.is_recognized
        assert label.raw == ""

    def test_sec_type_pipe_token(self):
        assert normalize_section("materials|methods", None).section is (
            CanonicalSection.METHODS
        )


class TestOverrides:
    def test_override_file_extends_table(self, tmp_path):
        path = tmp_path / "overrides.tsv"
        path.write_text(
            "# custom mappings\nExperimental Setup\tMethods\nWrap-Up\tconclusion\n",
            "utf-8",
        )
        table = load_name_table(path)
        assert normalize_section(None, "Experimental Setup", table).section is (
            CanonicalSection.METHODS
        )
        assert normalize_section(None, "3. Wrap-Up", table).section is (
            CanonicalSection.CONCLUSION
        )
        # shipped entries still intact, and the default table is untouched
        assert normalize_section(None, "Results", table).section is CanonicalSection.RESULTS
        assert normalize_section(None, "Wrap-Up").section is None

    def test_bad_section_name_rejected(self, tmp_path):
        path = tmp_path / "overrides.tsv"
        path.write_text("Epilogue\tAfterword\n", "utf-8")
        with pytest.raises(ValueError, match="Afterword"):
            load_name_table(path)

    def test_missing_tab_rejected(self, tmp_path):
        path = tmp_path / "overrides.tsv"
        path.write_text("Epilogue Conclusion\n", "utf-8")
        with pytest.raises(ValueError, match="TAB"):
            load_name_table(path)


def test_section_order_fixed():
    assert [s.value for s in SECTION_ORDER] == [
        "Introduction", "Background", "Methods", "Results", "Discussion", "Conclusion",
    ]
    assert [s.column for s in SECTION_ORDER] == [
        "intro", "background", "methods", "results", "discussion", "conclusion",
    ]
