"""End-to-end drivers shared by the CLI and the language server.

Both front ends run exactly this code, which is what keeps their
diagnostics identical for identical input bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .blocks import Document, parse
from .diagnostics import Diagnostic, MedfordError, sort_key
from .macros import collect_macros, expand_lines
from .resolve import Loader, ResolutionTable, Workspace, load_imports, resolve_all
from .schema import Mode, validate
from .source import load_source


def parse_document(data: bytes | str, path: str) -> Document:
    """Lex, collect macros, expand, and parse one document (no imports)."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    src = load_source(data, path)
    table, residual, macro_diags = collect_macros(src.lines, path)
    expanded, expand_diags = expand_lines(residual, table, path)
    return parse(expanded, table, path, src.diagnostics + macro_diags + expand_diags)


@dataclass
class Analysis:
    workspace: Workspace | None
    resolutions: ResolutionTable
    diagnostics: list[Diagnostic]  # sorted; root document plus import sites

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)


def analyze(
    data: bytes | str, path: str, mode: Mode | None = None, loader: Loader | None = None
) -> Analysis:
    """Run the full pipeline over one root document.

    Diagnostics for problems inside imported files are folded into
    W-IMPORT-INVALID warnings at the import site; everything else points
    into the root document.
    """
    try:
        doc = parse_document(data, path)
    except MedfordError as exc:
        return Analysis(None, ResolutionTable(), [exc.diagnostic])
    ws = load_imports(doc, loader)
    table, ref_diags = resolve_all(ws)
    diags = list(doc.diagnostics) + list(ws.diagnostics)
    diags.extend(d for d in ref_diags if d.file == doc.path)
    if mode is not None:
        diags.extend(validate(ws, mode))
    return Analysis(ws, table, sorted(diags, key=sort_key))


def analyze_path(path: str, mode: Mode | None = None, loader: Loader | None = None) -> Analysis:
    """Like :func:`analyze` but reads from disk; OSError propagates."""
    with open(path, "rb") as handle:
        data = handle.read()
    return analyze(data, path, mode, loader)
