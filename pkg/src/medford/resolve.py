"""Reference and import resolution across a multi-document workspace.

Minor payloads of the form ``@Major Name`` reference a block in the same
document; ``from NICK: @Major Name`` references a block in the file
imported under that nickname. Imports bind a nickname to a whole external
file; nicknames are file-local and never re-exported, so same-named
blocks in different files cannot collide.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Callable

from .blocks import Block, Document, MinorEntry, PayloadKind
from .diagnostics import Diagnostic, Span, error, warning

Loader = Callable[[str], bytes]

_INTERNAL = re.compile(r"^@([A-Za-z0-9_]+)[ \t]+(.+)$")
_EXTERNAL = re.compile(r"^from[ \t]+([A-Za-z0-9]+):[ \t]*@([A-Za-z0-9_]+)[ \t]+(.+)$")


@dataclass(frozen=True)
class RefTarget:
    namespace: str | None
    major: str
    name: str


@dataclass(frozen=True)
class Resolution:
    source_file: str
    target_file: str
    block: Block


class ResolutionTable:
    """Maps every reference site (file, line, col) to its target block."""

    def __init__(self) -> None:
        self._by_site: dict[tuple[str, int, int], Resolution] = {}

    def record(self, file: str, span: Span, resolution: Resolution) -> None:
        self._by_site[(file, span.line, span.col)] = resolution

    def lookup(self, file: str, span: Span) -> Resolution | None:
        return self._by_site.get((file, span.line, span.col))

    def __len__(self) -> int:
        return len(self._by_site)


@dataclass
class Workspace:
    root: Document
    documents: dict[str, Document] = field(default_factory=dict)  # abspath -> doc
    namespaces: dict[str, dict[str, str]] = field(default_factory=dict)  # doc -> nick -> abspath
    load_order: list[str] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def imports(self) -> dict[str, Document]:
        """The root document's nickname bindings."""
        root_ns = self.namespaces.get(normalized_path(self.root.path), {})
        return {nick: self.documents[target] for nick, target in root_ns.items()}


def normalized_path(path: str) -> str:
    """Canonical absolute path used as a document key."""
    return os.path.normpath(os.path.abspath(path))


def _default_loader(path: str) -> bytes:
    with open(path, "rb") as handle:
        return handle.read()


def classify_payload(
    entry: MinorEntry, file: str = ""
) -> tuple[PayloadKind, RefTarget | None, list[Diagnostic]]:
    """Decide whether a payload is a reference; Text otherwise.

    Payloads that start like a reference (``@`` or ``from ``) but do not
    complete the pattern are reported as E-REF-SYNTAX.
    """
    payload = entry.payload
    match = _EXTERNAL.match(payload)
    if match is not None:
        target = RefTarget(match.group(1), match.group(2), match.group(3).strip())
        return PayloadKind.EXTERNAL_REF, target, []
    match = _INTERNAL.match(payload)
    if match is not None:
        target = RefTarget(None, match.group(1), match.group(2).strip())
        return PayloadKind.INTERNAL_REF, target, []
    if payload.startswith("@") or payload.startswith("from "):
        diag = error(
            "E-REF-SYNTAX",
            f"payload {payload!r} looks like a reference but does not match "
            "'@Major Name' or 'from NICK: @Major Name'",
            file, entry.span,
        )
        return PayloadKind.TEXT, None, [diag]
    return PayloadKind.TEXT, None, []


def resolve_import_path(declared: str, importer_path: str) -> str:
    """Resolve an import payload: ``~`` expands, relative paths are taken
    from the importing document's directory."""
    expanded = os.path.expanduser(declared)
    if not os.path.isabs(expanded):
        expanded = os.path.join(os.path.dirname(normalized_path(importer_path)), expanded)
    return os.path.normpath(expanded)


def load_imports(root: Document, loader: Loader | None = None) -> Workspace:
    """Load every imported file (transitively) into a Workspace.

    A file already on the current load stack is a cycle and is reported as
    E-IMPORT-CYCLE rather than followed. Nicknames bind only within the
    importing file; they are not re-exported.
    """
    from .pipeline import parse_document  # deferred: pipeline imports this module

    read = loader or _default_loader
    ws = Workspace(root=root)
    root_key = normalized_path(root.path)
    ws.documents[root_key] = root
    ws.load_order.append(root_key)

    def load_doc(doc: Document, doc_key: str, stack: tuple[str, ...]) -> None:
        bindings: dict[str, str] = {}
        ws.namespaces[doc_key] = bindings
        for decl in doc.imports:
            target = resolve_import_path(decl.file, doc_key)
            site = decl.span
            if target in stack:
                chain = " -> ".join([*stack[stack.index(target):], target])
                ws.diagnostics.append(error(
                    "E-IMPORT-CYCLE", f"import cycle: {chain}", doc.path, site,
                ))
                continue
            if target not in ws.documents:
                try:
                    data = read(target)
                except OSError as exc:
                    ws.diagnostics.append(error(
                        "E-IMPORT-NOT-FOUND", f"cannot read import '{decl.file}': {exc}", doc.path, site,
                    ))
                    continue
                imported = parse_document(data, target)
                ws.documents[target] = imported
                ws.load_order.append(target)
                load_doc(imported, target, stack + (target,))
            loaded = ws.documents[target]
            errors = [d for d in loaded.diagnostics if d.is_error]
            if errors:
                ws.diagnostics.append(warning(
                    "W-IMPORT-INVALID",
                    f"imported file '{decl.file}' has {len(errors)} error(s) (first: {errors[0].code})",
                    doc.path, site,
                ))
            bindings[decl.nickname] = target

    load_doc(root, root_key, (root_key,))
    return ws


def _block_index(doc: Document) -> dict[tuple[str, str], Block]:
    index: dict[tuple[str, str], Block] = {}
    for block in doc.blocks:
        key = (block.major, block.name.strip())
        index.setdefault(key, block)
    return index


def _all_minors(block: Block):
    yield from block.minors
    for child in block.children:
        yield from _all_minors(child)


def resolve_all(ws: Workspace) -> tuple[ResolutionTable, list[Diagnostic]]:
    """Classify every minor payload and bind each reference to its block."""
    table = ResolutionTable()
    diags: list[Diagnostic] = []
    indexes = {path: _block_index(doc) for path, doc in ws.documents.items()}

    for path in ws.load_order:
        doc = ws.documents[path]
        bindings = ws.namespaces.get(path, {})
        for top in doc.blocks:
            for entry in _all_minors(top):
                kind, target, entry_diags = classify_payload(entry, doc.path)
                diags.extend(entry_diags)
                entry.payload_kind = kind
                entry.ref = target
                if target is None:
                    continue
                if target.namespace is None:
                    target_path = path
                else:
                    target_path = bindings.get(target.namespace)
                    if target_path is None:
                        diags.append(error(
                            "E-REF-UNKNOWN-NS",
                            f"'{target.namespace}' is not an imported nickname",
                            doc.path, entry.span,
                        ))
                        continue
                block = indexes[target_path].get((target.major, target.name))
                if block is None:
                    where = f" in '{target.namespace}'" if target.namespace else ""
                    diags.append(error(
                        "E-REF-UNRESOLVED",
                        f"no block '@{target.major} {target.name}'{where}",
                        doc.path, entry.span,
                    ))
                    continue
                table.record(doc.path, entry.span, Resolution(path, target_path, block))
    return table, diags
