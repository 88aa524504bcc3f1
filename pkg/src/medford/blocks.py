"""Block assembly: expanded lines to named blocks with minors and children.

A major token line opens a block named by its payload. A major token of
the form ``Parent_Suffix`` written while a ``Parent`` block is open opens
a child block; otherwise it is an independent top-level block. Minor
lines attach to the innermost open block with a matching major token, and
continuation lines extend the most recent payload.

Block names must be unique among top-level blocks sharing a major token
(children compete only with siblings of the same major), and those names
are compared byte-exactly after macro expansion and whitespace trimming.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .diagnostics import Diagnostic, MedfordError, Span, error
from .macros import MacroTable
from .source import LineKind, RawLine, token_name_parts

if TYPE_CHECKING:  # pragma: no cover
    from .resolve import RefTarget


class PayloadKind(enum.Enum):
    TEXT = "text"
    INTERNAL_REF = "internal-ref"
    EXTERNAL_REF = "external-ref"
    FILEPATH = "filepath"
    URI = "uri"


@dataclass(eq=False)
class MinorEntry:
    minor: str
    payload: str  # verbatim post-expansion; may contain newlines
    span: Span = field(default=Span(0))
    payload_kind: PayloadKind = PayloadKind.TEXT  # assigned by resolver/validator
    ref: "RefTarget | None" = None

    def structurally_equal(self, other: "MinorEntry") -> bool:
        return self.minor == other.minor and self.payload == other.payload


@dataclass(eq=False)
class Block:
    major: str
    name: str
    minors: list[MinorEntry] = field(default_factory=list)
    children: list["Block"] = field(default_factory=list)
    span: Span = field(default=Span(0))

    def structurally_equal(self, other: "Block") -> bool:
        return (
            self.major == other.major
            and self.name == other.name
            and len(self.minors) == len(other.minors)
            and all(a.structurally_equal(b) for a, b in zip(self.minors, other.minors))
            and len(self.children) == len(other.children)
            and all(a.structurally_equal(b) for a, b in zip(self.children, other.children))
        )


@dataclass(frozen=True)
class ImportDecl:
    nickname: str
    file: str
    span: Span = field(compare=False, default=Span(0))


@dataclass
class Document:
    path: str
    macros: MacroTable = field(default_factory=MacroTable)
    blocks: list[Block] = field(default_factory=list)
    imports: list[ImportDecl] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def structurally_equal(self, other: "Document") -> bool:
        return len(self.blocks) == len(other.blocks) and all(
            a.structurally_equal(b) for a, b in zip(self.blocks, other.blocks)
        )

    def block(self, major: str, name: str) -> Block | None:
        """Look up a top-level block by its (major, name) key."""
        for blk in self.blocks:
            if blk.major == major and blk.name.strip() == name.strip():
                return blk
        return None


_NICKNAME = re.compile(r"^[A-Za-z0-9]+$")


def _is_child_major(parent: str, major: str) -> bool:
    return major.startswith(parent + "_") and len(major) > len(parent) + 1


def parse(
    lines: list[RawLine],
    macros: MacroTable | None = None,
    path: str = "",
    prior: list[Diagnostic] | None = None,
) -> Document:
    """Assemble a macro-expanded line stream into a Document.

    Recovery is line-granular: a bad line produces one diagnostic and is
    skipped so later errors are still reported.
    """
    doc = Document(path=path, macros=macros or MacroTable())
    doc.diagnostics.extend(prior or [])
    stack: list[Block] = []
    # Where the next continuation line lands: a block (extends its name) or
    # a minor entry (extends its payload). Blanks and comments clear it.
    cont_target: Block | MinorEntry | None = None

    for line in lines:
        if line.kind is LineKind.BLANK or line.kind is LineKind.COMMENT:
            cont_target = None
            continue
        if line.kind is LineKind.CONTINUATION:
            text = line.content.strip()
            if cont_target is None:
                doc.diagnostics.append(error(
                    "E-ORPHAN-LINE", f"continuation line with nothing to continue: {text!r}",
                    path, Span(line.number, 1, len(line.content)),
                ))
            elif isinstance(cont_target, MinorEntry):
                cont_target.payload += "\n" + text
            else:
                cont_target.name += "\n" + text
            continue
        if line.kind is LineKind.MAJOR:
            cont_target = None
            try:
                major, _, payload = token_name_parts(line, path)
            except MedfordError as exc:
                doc.diagnostics.append(exc.diagnostic)
                continue
            if not payload:
                doc.diagnostics.append(error(
                    "E-EMPTY-NAME", f"block '@{major}' has no name line payload",
                    path, Span(line.number, 1, len(major) + 1),
                ))
            block = Block(major, payload, span=Span(line.number, 1, len(major) + 1))
            while stack and not _is_child_major(stack[-1].major, major):
                stack.pop()
            if stack:
                stack[-1].children.append(block)
            else:
                doc.blocks.append(block)
            stack.append(block)
            cont_target = block
            continue
        if line.kind is LineKind.MINOR:
            cont_target = None
            try:
                major, minor, payload = token_name_parts(line, path)
            except MedfordError as exc:
                doc.diagnostics.append(exc.diagnostic)
                continue
            owner = next((b for b in reversed(stack) if b.major == major), None)
            if owner is None:
                doc.diagnostics.append(error(
                    "E-ORPHAN-MINOR", f"'@{major}-{minor}' has no open '@{major}' block",
                    path, Span(line.number, 1, len(major) + len(minor) + 2),
                ))
                continue
            entry = MinorEntry(minor, payload, Span(line.number, 1, len(major) + len(minor) + 2))
            owner.minors.append(entry)
            cont_target = entry
            continue
        # Macro definition lines are consumed before parsing; tolerate strays.
        cont_target = None

    _check_unique_names(doc.blocks, path, doc.diagnostics)
    _walk_children_uniqueness(doc.blocks, path, doc.diagnostics)
    doc.imports = _extract_imports(doc, path)
    return doc


def _check_unique_names(blocks: list[Block], path: str, diags: list[Diagnostic]) -> None:
    seen: dict[tuple[str, str], Block] = {}
    for block in blocks:
        name = block.name.strip()
        if not name:
            continue
        key = (block.major, name)
        first = seen.get(key)
        if first is None:
            seen[key] = block
        else:
            label = name.replace("\n", "\\n")
            diags.append(error(
                "E-DUPLICATE-NAME",
                f"duplicate '@{block.major}' name '{label}' (first defined at line {first.span.line})",
                path, block.span,
            ))


def _walk_children_uniqueness(blocks: list[Block], path: str, diags: list[Diagnostic]) -> None:
    for block in blocks:
        _check_unique_names(block.children, path, diags)
        _walk_children_uniqueness(block.children, path, diags)


def _extract_imports(doc: Document, path: str) -> list[ImportDecl]:
    decls: list[ImportDecl] = []
    taken: set[str] = set()
    for block in doc.blocks:
        if block.major != "Import":
            continue
        nickname = block.name.strip()
        if not _NICKNAME.match(nickname):
            doc.diagnostics.append(error(
                "E-IMPORT-BAD-NICK",
                f"import nickname {nickname!r} must contain only letters and numbers",
                path, block.span,
            ))
            continue
        file_entry = next((m for m in block.minors if m.minor == "File"), None)
        if file_entry is None or not file_entry.payload.strip():
            # Leave it to schema validation (Import.File is Required there);
            # references to the nickname will report E-REF-UNKNOWN-NS.
            continue
        if nickname in taken:
            doc.diagnostics.append(error(
                "E-IMPORT-DUP-NICK", f"import nickname '{nickname}' already used", path, block.span,
            ))
            continue
        taken.add(nickname)
        decls.append(ImportDecl(nickname, file_entry.payload.strip(), block.span))
    return decls


def _emit_entry(head: str, payload: str, out: list[str]) -> None:
    pieces = payload.split("\n")
    first = pieces[0].strip()
    out.append(f"{head} {first}" if first else head)
    out.extend(piece.strip() for piece in pieces[1:])


def _emit_block(block: Block, out: list[str]) -> None:
    _emit_entry(f"@{block.major}", block.name, out)
    for entry in block.minors:
        _emit_entry(f"@{block.major}-{entry.minor}", entry.payload, out)
    for child in block.children:
        _emit_block(child, out)


def serialize(doc: Document) -> str:
    """Canonical fully-expanded text: parse(serialize(d)) equals parse(d).

    Macro definitions and comments are not reconstructed; spacing between
    token and payload is normalized to a single space and top-level blocks
    are separated by one blank line.
    """
    chunks: list[str] = []
    for block in doc.blocks:
        lines: list[str] = []
        _emit_block(block, lines)
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n" if chunks else ""
