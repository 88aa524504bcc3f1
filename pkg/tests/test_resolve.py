import os

import pytest

from medford.blocks import MinorEntry, PayloadKind
from medford.diagnostics import Span
from medford.pipeline import analyze, parse_document
from medford.resolve import RefTarget, classify_payload, load_imports, resolve_all


def entry(payload):
    return MinorEntry("Species", payload, Span(1))


@pytest.mark.parametrize(
    "payload,kind,target",
    [
        ("@Species P.Acuta", PayloadKind.INTERNAL_REF, RefTarget(None, "Species", "P.Acuta")),
        ("from CoralsMFD: @Species P.Dam", PayloadKind.EXTERNAL_REF, RefTarget("CoralsMFD", "Species", "P.Dam")),
        ("Staghorn coral", PayloadKind.TEXT, None),
        ("fromage is not a reference", PayloadKind.TEXT, None),
    ],
)
def test_classify_payload(payload, kind, target):
    got_kind, got_target, diags = classify_payload(entry(payload))
    assert (got_kind, got_target, diags) == (kind, target, [])


@pytest.mark.parametrize("payload", ["@Species", "@Species-Reef x", "from X @Species P.Dam", "from : @S x"])
def test_ref_syntax_errors(payload):
    _, target, diags = classify_payload(entry(payload))
    assert target is None
    assert [d.code for d in diags] == ["E-REF-SYNTAX"]


class _MapLoader:
    def __init__(self, files):
        self.files = {os.path.normpath(os.path.abspath(k)): v.encode() for k, v in files.items()}

    def __call__(self, path):
        try:
            return self.files[os.path.normpath(path)]
        except KeyError:
            raise FileNotFoundError(path)


def make_ws(files, root):
    loader = _MapLoader(files)
    doc = parse_document(loader(os.path.abspath(root)), os.path.abspath(root))
    return load_imports(doc, loader)


def test_import_binds_nickname():
    ws = make_ws(
        {
            "/w/root.mfd": "@Import CoralsMFD\n@Import-File shared/corals.mfd\n",
            "/w/shared/corals.mfd": "@Species P.Dam\n",
        },
        "/w/root.mfd",
    )
    assert ws.diagnostics == []
    assert list(ws.imports) == ["CoralsMFD"]
    assert ws.imports["CoralsMFD"].block("Species", "P.Dam") is not None


def test_external_reference_resolves_to_imported_block():
    ws = make_ws(
        {
            "/w/root.mfd": (
                "@Import CoralsMFD\n@Import-File corals.mfd\n\n"
                "@Reef New Caledonia Barrier Reef\n"
                "@Reef-Species from CoralsMFD: @Species P.Dam\n"
            ),
            "/w/corals.mfd": "@Species P.Dam\n@Species-Construction genome v1.0\n",
        },
        "/w/root.mfd",
    )
    table, diags = resolve_all(ws)
    assert diags == []
    reef = ws.root.block("Reef", "New Caledonia Barrier Reef")
    resolution = table.lookup(ws.root.path, reef.minors[0].span)
    assert resolution is not None
    assert resolution.block.major == "Species" and resolution.block.name == "P.Dam"
    assert resolution.target_file.endswith("corals.mfd")


def test_internal_reference_resolves():
    ws = make_ws(
        {"/w/root.mfd": "@Species P.Acuta\n\n@Reef R1\n@Reef-Species @Species P.Acuta\n"},
        "/w/root.mfd",
    )
    table, diags = resolve_all(ws)
    assert diags == []
    assert len(table) == 1


def test_unresolved_reference():
    ws = make_ws({"/w/root.mfd": "@Reef R1\n@Reef-Species @Species Nonexistent\n"}, "/w/root.mfd")
    _, diags = resolve_all(ws)
    assert [d.code for d in diags] == ["E-REF-UNRESOLVED"]


def test_unknown_namespace():
    ws = make_ws({"/w/root.mfd": "@Reef R1\n@Reef-Species from Nowhere: @Species X\n"}, "/w/root.mfd")
    _, diags = resolve_all(ws)
    assert [d.code for d in diags] == ["E-REF-UNKNOWN-NS"]


def test_same_name_in_two_namespaces_never_collides():
    ws = make_ws(
        {
            "/w/root.mfd": (
                "@Import One\n@Import-File one.mfd\n\n"
                "@Import Two\n@Import-File two.mfd\n\n"
                "@Reef R\n"
                "@Reef-Species from One: @Species P.Dam\n"
                "@Reef-note x\n"
                "@Reef-Species from Two: @Species P.Dam\n"
            ),
            "/w/one.mfd": "@Species P.Dam\n@Species-Construction old genome\n",
            "/w/two.mfd": "@Species P.Dam\n@Species-Construction new genome\n",
        },
        "/w/root.mfd",
    )
    table, diags = resolve_all(ws)
    assert diags == []
    reef = ws.root.blocks[2]
    first = table.lookup(ws.root.path, reef.minors[0].span)
    second = table.lookup(ws.root.path, reef.minors[2].span)
    assert first.target_file.endswith("one.mfd")
    assert second.target_file.endswith("two.mfd")
    assert first.block is not second.block


def test_missing_import_file():
    ws = make_ws({"/w/root.mfd": "@Import X\n@Import-File gone.mfd\n"}, "/w/root.mfd")
    assert [d.code for d in ws.diagnostics] == ["E-IMPORT-NOT-FOUND"]


def test_self_import_is_a_cycle():
    ws = make_ws({"/w/root.mfd": "@Import Me\n@Import-File root.mfd\n"}, "/w/root.mfd")
    assert [d.code for d in ws.diagnostics] == ["E-IMPORT-CYCLE"]


def test_two_file_cycle_terminates():
    ws = make_ws(
        {
            "/w/a.mfd": "@Import B\n@Import-File b.mfd\n",
            "/w/b.mfd": "@Import A\n@Import-File a.mfd\n",
        },
        "/w/a.mfd",
    )
    assert [d.code for d in ws.diagnostics] == ["E-IMPORT-CYCLE"]


def test_diamond_import_is_not_a_cycle():
    ws = make_ws(
        {
            "/w/root.mfd": "@Import L\n@Import-File l.mfd\n\n@Import R\n@Import-File r.mfd\n",
            "/w/l.mfd": "@Import S\n@Import-File shared.mfd\n",
            "/w/r.mfd": "@Import S\n@Import-File shared.mfd\n",
            "/w/shared.mfd": "@Species P.Dam\n",
        },
        "/w/root.mfd",
    )
    assert ws.diagnostics == []
    assert len(ws.documents) == 4  # shared.mfd loaded once


def test_no_transitive_nickname_reexport():
    ws = make_ws(
        {
            "/w/root.mfd": (
                "@Import Mid\n@Import-File mid.mfd\n\n"
                "@Reef R\n@Reef-Species from Deep: @Species P.Dam\n"
            ),
            "/w/mid.mfd": "@Import Deep\n@Import-File deep.mfd\n",
            "/w/deep.mfd": "@Species P.Dam\n",
        },
        "/w/root.mfd",
    )
    _, diags = resolve_all(ws)
    assert [d.code for d in diags] == ["E-REF-UNKNOWN-NS"]


def test_imported_file_errors_warn_at_import_site():
    ws = make_ws(
        {
            "/w/root.mfd": "@Import X\n@Import-File bad.mfd\n",
            "/w/bad.mfd": "@Species P.Dam\n\n@Species P.Dam\n",
        },
        "/w/root.mfd",
    )
    assert [d.code for d in ws.diagnostics] == ["W-IMPORT-INVALID"]
    assert ws.diagnostics[0].file.endswith("root.mfd")


def test_imported_macros_are_file_local():
    ws = make_ws(
        {
            "/w/root.mfd": "@Import X\n@Import-File other.mfd\n\n@Note {`@M}\n",
            "/w/other.mfd": "`@M body\n\n@Note {`@M}\n",
        },
        "/w/root.mfd",
    )
    root_codes = [d.code for d in ws.root.diagnostics]
    assert "E-MACRO-UNDEF" in root_codes
    other = ws.imports["X"]
    assert other.blocks[0].name == "body"


def test_tilde_expansion(tmp_path, monkeypatch):
    monkeypatch.setenv("HOME", str(tmp_path))
    (tmp_path / "shared").mkdir()
    (tmp_path / "shared" / "corals_metadata.mfd").write_text("@Species P.Dam\n")
    root = tmp_path / "work" / "root.mfd"
    root.parent.mkdir()
    root.write_text("@Import CoralsMFD\n@Import-File ~/shared/corals_metadata.mfd\n")
    analysis = analyze(root.read_bytes(), str(root))
    assert analysis.diagnostics == []
    assert analysis.workspace.imports["CoralsMFD"].block("Species", "P.Dam") is not None


def test_resolution_is_deterministic():
    files = {
        "/w/root.mfd": (
            "@Import One\n@Import-File one.mfd\n\n"
            "@Species Local\n\n"
            "@Reef R\n@Reef-Species @Species Local\n@Reef-Species from One: @Species P.Dam\n"
        ),
        "/w/one.mfd": "@Species P.Dam\n",
    }

    def snapshot():
        ws = make_ws(files, "/w/root.mfd")
        table, diags = resolve_all(ws)
        reef = ws.root.block("Reef", "R")
        targets = [
            (r.target_file, r.block.major, r.block.name)
            for r in (table.lookup(ws.root.path, m.span) for m in reef.minors)
        ]
        return targets, [str(d) for d in diags]

    assert snapshot() == snapshot()


def test_removing_unused_import_changes_no_resolution():
    files = {
        "/w/root.mfd": (
            "@Import Used\n@Import-File used.mfd\n\n"
            "@Import Unused\n@Import-File unused.mfd\n\n"
            "@Reef R\n@Reef-Species from Used: @Species P.Dam\n"
        ),
        "/w/used.mfd": "@Species P.Dam\n",
        "/w/unused.mfd": "@Species Other\n",
    }
    ws_full = make_ws(files, "/w/root.mfd")
    table_full, _ = resolve_all(ws_full)

    trimmed = dict(files)
    trimmed["/w/root.mfd"] = (
        "@Import Used\n@Import-File used.mfd\n\n"
        "@Reef R\n@Reef-Species from Used: @Species P.Dam\n"
    )
    ws_trim = make_ws(trimmed, "/w/root.mfd")
    table_trim, _ = resolve_all(ws_trim)

    reef_full = ws_full.root.block("Reef", "R")
    reef_trim = ws_trim.root.block("Reef", "R")
    res_full = table_full.lookup(ws_full.root.path, reef_full.minors[0].span)
    res_trim = table_trim.lookup(ws_trim.root.path, reef_trim.minors[0].span)
    assert res_full.target_file == res_trim.target_file
    assert res_full.block.name == res_trim.block.name
