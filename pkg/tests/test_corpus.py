"""Corpus-wide checks: expected diagnostics per file and the print/reparse
fixpoint. The manifest below is the ground truth for what each fixture
exercises; a corpus file not listed here fails the completeness test."""

import os

import pytest

from conftest import CORPUS_DIR, corpus_path, mode_named
from medford.diagnostics import MedfordError
from medford.blocks import serialize
from medford.pipeline import analyze_path, parse_document

# file -> (mode, expected diagnostic codes, sorted)
MANIFEST = {
    "01_species_reef.mfd": ("base", []),
    "02_reef.mfd": ("base", []),
    "03_shared_names.mfd": ("base", []),
    "04_duplicate_species.mfd": ("base", ["E-DUPLICATE-NAME"]),
    "05_macro_fig1.mfd": ("base", []),
    "06_macro_fig2.mfd": ("base", []),
    "07_macro_fig3.mfd": ("base", ["W-AMBIGUOUS-MACRO", "W-AMBIGUOUS-MACRO"]),
    "08_macro_v2.mfd": ("base", []),
    "09_macro_mixed.mfd": ("base", []),
    "10_macro_redef.mfd": ("base", ["E-MACRO-REDEF"]),
    "11_macro_empty.mfd": ("base", ["E-MACRO-EMPTY"]),
    "12_macro_undef.mfd": ("base", ["E-MACRO-UNDEF"]),
    "13_macro_bad_name.mfd": ("base", ["E-MACRO-NAME"]),
    "14_macro_ambiguous.mfd": ("base", ["E-MACRO-UNDEF"]),
    "15_orphan_minor.mfd": ("base", ["E-ORPHAN-MINOR"]),
    "16_empty_name.mfd": ("base", ["E-EMPTY-NAME"]),
    "17_orphan_line.mfd": ("base", ["E-ORPHAN-LINE"]),
    "18_bad_token.mfd": ("base", ["E-BAD-TOKEN"]),
    "19_bom.mfd": ("base", ["W-BOM"]),
    "20_comments.mfd": ("base", []),
    "21_multiline.mfd": ("base", []),
    "22_imports_root.mfd": ("base", []),
    "23_import_missing.mfd": ("base", ["E-IMPORT-NOT-FOUND"]),
    "24_import_cycle_a.mfd": ("base", ["E-IMPORT-CYCLE"]),
    "24_import_cycle_b.mfd": ("base", ["E-IMPORT-CYCLE"]),
    "25_import_self.mfd": ("base", ["E-IMPORT-CYCLE"]),
    "26_import_dup_nick.mfd": ("base", ["E-DUPLICATE-NAME", "E-IMPORT-DUP-NICK"]),
    "27_import_bad_nick.mfd": ("base", ["E-IMPORT-BAD-NICK"]),
    "28_import_invalid_target.mfd": ("base", ["W-IMPORT-INVALID"]),
    "29_ref_internal.mfd": ("base", []),
    "30_ref_syntax.mfd": ("base", ["E-REF-SYNTAX", "E-TYPE-REF"]),
    "31_ref_unresolved.mfd": ("base", ["E-REF-UNRESOLVED"]),
    "32_ref_unknown_ns.mfd": ("base", ["E-REF-UNKNOWN-NS"]),
    "33_two_namespaces.mfd": ("base", []),
    "34_institution.mfd": ("base", ["W-DESIRABLE-MISSING"]),
    "35_version_zero.mfd": ("base", ["E-CONSTRAINT"]),
    "36_requires_contributor.mfd": ("bcodmo", ["E-REQUIRED-MISSING"]),
    "37_multiplicity.mfd": ("base", ["E-MULTIPLICITY"]),
    "38_bad_email.mfd": ("base", ["E-TYPE-EMAIL"]),
    "39_bad_types.mfd": ("base", ["E-TYPE-DATE", "E-TYPE-NUMBER", "E-TYPE-PHONE", "E-TYPE-URI"]),
    "40_unknown_major.mfd": ("base", ["W-UNKNOWN-MAJOR"]),
    "41_custom_validator.mfd": ("bcodmo", ["W-CUSTOM-VALIDATOR-SKIPPED"]),
    "42_filepath_empty.mfd": ("base", ["E-TYPE-FILEPATH"]),
    "43_integer.mfd": ("bcodmo", ["E-TYPE-INTEGER", "W-CUSTOM-VALIDATOR-SKIPPED"]),
    "44_type_ref_text.mfd": ("base", ["E-TYPE-REF"]),
    "45_contributors.mfd": ("base", []),
    "46_photos.mfd": ("base", []),
    "47_mixed_valid.mfd": ("base", []),
    "48_deep_nesting.mfd": ("base", []),
    "49_minor_after_child.mfd": ("base", []),
    "50_same_name_children.mfd": ("base", []),
    "51_data_roles.mfd": ("base", []),
    "52_encoding.mfd": ("base", ["E-ENCODING"]),
    "53_crlf.mfd": ("base", []),
    "54_empty.mfd": ("base", []),
    "55_unicode.mfd": ("base", []),
}


def corpus_files():
    return sorted(f for f in os.listdir(CORPUS_DIR) if f.endswith(".mfd"))


@pytest.mark.parametrize("name", sorted(MANIFEST))
def test_expected_diagnostics(name):
    mode_name, expected = MANIFEST[name]
    analysis = analyze_path(corpus_path(name), mode_named(mode_name))
    assert sorted(d.code for d in analysis.diagnostics) == sorted(expected)


def test_manifest_covers_every_corpus_file():
    assert corpus_files() == sorted(MANIFEST)
    assert len(MANIFEST) >= 30


def test_every_parser_reachable_code_is_exercised():
    covered = {code for _, codes in MANIFEST.values() for code in codes}
    expected = {
        "E-ENCODING", "W-BOM", "E-BAD-TOKEN",
        "E-MACRO-REDEF", "E-MACRO-EMPTY", "E-MACRO-UNDEF", "E-MACRO-NAME", "W-AMBIGUOUS-MACRO",
        "E-ORPHAN-MINOR", "E-ORPHAN-LINE", "E-EMPTY-NAME", "E-DUPLICATE-NAME",
        "E-REF-SYNTAX", "E-REF-UNRESOLVED", "E-REF-UNKNOWN-NS",
        "E-IMPORT-NOT-FOUND", "E-IMPORT-CYCLE", "E-IMPORT-DUP-NICK", "E-IMPORT-BAD-NICK",
        "W-IMPORT-INVALID",
        "W-UNKNOWN-MAJOR", "E-REQUIRED-MISSING", "W-DESIRABLE-MISSING", "E-MULTIPLICITY",
        "E-CONSTRAINT", "W-CUSTOM-VALIDATOR-SKIPPED",
        "E-TYPE-EMAIL", "E-TYPE-URI", "E-TYPE-PHONE", "E-TYPE-DATE", "E-TYPE-NUMBER",
        "E-TYPE-INTEGER", "E-TYPE-FILEPATH", "E-TYPE-REF",
    }
    assert expected <= covered


def parseable_corpus_texts():
    for name in corpus_files():
        with open(corpus_path(name), "rb") as handle:
            data = handle.read()
        try:
            yield name, parse_document(data, corpus_path(name))
        except MedfordError:
            continue  # E-ENCODING fixture: nothing to round-trip


def test_parse_serialize_parse_fixpoint_over_corpus():
    checked = 0
    for name, first in parseable_corpus_texts():
        printed = serialize(first)
        second = parse_document(printed, f"printed:{name}")
        assert first.structurally_equal(second), f"fixpoint broken for {name}"
        assert serialize(second) == printed, f"printer not stable for {name}"
        checked += 1
    assert checked >= 30
