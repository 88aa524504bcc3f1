"""BagIt packaging: zip a workspace with its data files, and verify bags.

Tokens whose name ends in ``_Primary`` or ``_Copy`` name local files that
are stored under ``data/`` and hashed into ``manifest-sha256.txt``;
``_Ref`` tokens carry remote locators that are deliberately excluded from
both. The payload layout mirrors each file's declared path relative to
its owning document, falling back to the bare filename for paths that
escape it (absolute or ``..``/``~`` paths); collisions are renamed and
recorded so verification can still match declarations to payload files.
"""

from __future__ import annotations

import datetime
import hashlib
import os
import posixpath
import zipfile
from dataclasses import dataclass
from enum import Enum

from .blocks import Block, Document
from .diagnostics import Diagnostic, Span, error, warning
from .resolve import Workspace, normalized_path

BAGIT_TXT = "BagIt-Version: 1.0\nTag-File-Character-Encoding: UTF-8\n"
_SUFFIXES = {"_Primary": "primary", "_Copy": "copy", "_Ref": "ref"}
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


class Role(Enum):
    PRIMARY = "primary"
    COPY = "copy"
    REF = "ref"


@dataclass(frozen=True)
class FileRole:
    role: Role
    token: str  # tag carrying the suffix, e.g. "Data_Primary" or "Data-File_Copy"
    source_doc: str  # abspath of the declaring document
    locator: str  # declared payload: local path for primary/copy, locator for ref
    span: Span
    resolved: str | None = None  # abspath on disk (primary/copy only)


@dataclass(frozen=True)
class BagManifest:
    algorithm: str
    entries: tuple[tuple[str, str], ...]  # (hex digest, payload path) sorted by path


def _role_for(token: str) -> Role | None:
    for suffix, value in _SUFFIXES.items():
        if token.endswith(suffix):
            return Role(value)
    return None


def declared_roles(doc: Document) -> list[tuple[Role, str, str, Span]]:
    """Every (role, token, declared path/locator, span) in one document.

    Purely lexical; no filesystem access. For a tagged block the path is
    its ``Path`` minor when present, otherwise the block name.
    """
    found: list[tuple[Role, str, str, Span]] = []

    def walk(block: Block) -> None:
        role = _role_for(block.major)
        if role is not None:
            path_minor = next((m for m in block.minors if m.minor == "Path"), None)
            declared = path_minor.payload.strip() if path_minor else block.name.strip()
            found.append((role, block.major, declared, block.span))
        for entry in block.minors:
            role = _role_for(entry.minor)
            if role is not None:
                found.append((role, f"{block.major}-{entry.minor}", entry.payload.strip(), entry.span))
        for child in block.children:
            walk(child)

    for block in doc.blocks:
        walk(block)
    return found


def collect_file_roles(ws: Workspace) -> tuple[list[FileRole], list[Diagnostic]]:
    """Gather file roles across the whole workspace and check local paths."""
    roles: list[FileRole] = []
    diags: list[Diagnostic] = []
    for doc_path in ws.load_order:
        doc = ws.documents[doc_path]
        base = os.path.dirname(normalized_path(doc_path))
        for role, token, declared, span in declared_roles(doc):
            if role is Role.REF:
                roles.append(FileRole(role, token, doc_path, declared, span))
                continue
            resolved = os.path.expanduser(declared)
            if not os.path.isabs(resolved):
                resolved = os.path.normpath(os.path.join(base, resolved))
            if not os.path.isfile(resolved):
                diags.append(error(
                    "E-FILE-MISSING", f"'@{token}' file not found: {declared}", doc.path, span,
                ))
                continue
            roles.append(FileRole(role, token, doc_path, declared, span, resolved))
    return roles, diags


def _arc_for(declared: str, owner_arc_dir: str) -> str:
    """Payload path (under data/) for a declared file path.

    Must stay in lockstep with verification, which recomputes this from
    the declarations embedded in the bag.
    """
    expanded = os.path.expanduser(declared)
    if os.path.isabs(expanded):
        return posixpath.basename(expanded.replace(os.sep, "/"))
    candidate = posixpath.normpath(posixpath.join(owner_arc_dir, expanded.replace(os.sep, "/")))
    if candidate.startswith(".."):
        return posixpath.basename(candidate)
    return candidate


def _renamed(arc: str, taken: set[str]) -> str:
    stem, ext = posixpath.splitext(arc)
    n = 2
    while f"{stem}-{n}{ext}" in taken:
        n += 1
    return f"{stem}-{n}{ext}"


def create_bag(ws: Workspace, roles: list[FileRole], out_path: str) -> tuple[BagManifest | None, list[Diagnostic]]:
    """Write a BagIt 1.0 zip; returns the manifest, or None on failure.

    The payload is the root document, every imported document, and every
    primary/copy file. Zip timestamps are pinned so identical inputs
    produce identical archives.
    """
    diags: list[Diagnostic] = []
    stage: dict[str, str] = {}  # arc under data/ -> source abspath
    renames: list[tuple[str, str]] = []
    tagged_arcs: set[str] = set()

    def stage_file(declared: str, owner_arc_dir: str, source: str) -> str:
        arc = _arc_for(declared, owner_arc_dir)
        if arc in stage:
            if stage[arc] == source:
                return arc
            new_arc = _renamed(arc, set(stage))
            renames.append((arc, new_arc))
            diags.append(warning(
                "W-BAG-RENAME", f"payload name collision: '{arc}' stored as '{new_arc}'",
                ws.root.path, Span(1),
            ))
            arc = new_arc
        stage[arc] = source
        return arc

    root_key = normalized_path(ws.root.path)
    root_arc = posixpath.basename(root_key.replace(os.sep, "/"))
    stage[root_arc] = root_key
    doc_arc_dirs = {root_key: ""}

    # Imported documents, in load order so importer arcs are known first.
    for doc_path in ws.load_order:
        owner_dir = doc_arc_dirs.get(doc_path)
        if owner_dir is None:
            continue
        for decl in ws.documents[doc_path].imports:
            target = ws.namespaces.get(doc_path, {}).get(decl.nickname)
            if target is None or target in doc_arc_dirs:
                continue
            arc = stage_file(decl.file, owner_dir, target)
            doc_arc_dirs[target] = posixpath.dirname(arc)

    for role in roles:
        if role.role is Role.REF or role.resolved is None:
            continue
        owner_dir = doc_arc_dirs.get(normalized_path(role.source_doc), "")
        tagged_arcs.add(stage_file(role.locator, owner_dir, role.resolved))

    mfd_arcs = set(doc_arc_dirs)
    for arc, source in stage.items():
        if source not in mfd_arcs and arc not in tagged_arcs:
            diags.append(error(
                "E-FILE-UNTAGGED", f"staged payload '{arc}' has no corresponding tag", ws.root.path, Span(1),
            ))
    if any(d.is_error for d in diags):
        return None, diags

    entries: list[tuple[str, str, bytes]] = []  # (arc, digest, data)
    octets = 0
    try:
        for arc in sorted(stage):
            with open(stage[arc], "rb") as handle:
                data = handle.read()
            entries.append((arc, hashlib.sha256(data).hexdigest(), data))
            octets += len(data)
        manifest_text = "".join(f"{digest}  data/{arc}\n" for arc, digest, _ in entries)
        info_lines = [
            f"Bagging-Date: {datetime.date.today().isoformat()}",
            f"Payload-Oxum: {octets}.{len(entries)}",
            f"MEDFORD-Root: data/{root_arc}",
        ]
        info_lines.extend(f"MEDFORD-Renamed: data/{old} -> data/{new}" for old, new in renames)
        info_text = "\n".join(info_lines) + "\n"

        with zipfile.ZipFile(out_path, "w", zipfile.ZIP_DEFLATED) as bag:

            def put(name: str, data: bytes) -> None:
                info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
                info.compress_type = zipfile.ZIP_DEFLATED
                bag.writestr(info, data)

            put("bagit.txt", BAGIT_TXT.encode("utf-8"))
            put("bag-info.txt", info_text.encode("utf-8"))
            put("manifest-sha256.txt", manifest_text.encode("utf-8"))
            for arc, _, data in entries:
                put(f"data/{arc}", data)
    except OSError as exc:
        return None, diags + [error("E-BAG-IO", f"cannot write bag: {exc}", out_path, Span(1))]

    manifest = BagManifest("sha256", tuple((digest, f"data/{arc}") for arc, digest, _ in entries))
    return manifest, diags


def _parse_labels(text: str) -> dict[str, list[str]]:
    labels: dict[str, list[str]] = {}
    for line in text.splitlines():
        if ": " in line:
            key, value = line.split(": ", 1)
            labels.setdefault(key, []).append(value)
    return labels


def verify_bag(bag_path: str) -> list[Diagnostic]:
    """Check structure, hashes, payload coverage, Payload-Oxum, and that
    every file the embedded documents expect is actually in the bag."""
    from .pipeline import parse_document

    def diag(code: str, message: str) -> Diagnostic:
        return error(code, message, bag_path, Span(1))

    diags: list[Diagnostic] = []
    try:
        bag = zipfile.ZipFile(bag_path)
    except (OSError, zipfile.BadZipFile) as exc:
        return [diag("E-BAG-IO", f"cannot open bag: {exc}")]

    with bag:
        names = {info.filename for info in bag.infolist() if not info.is_dir()}

        def read(name: str) -> bytes:
            return bag.read(name)

        if "bagit.txt" not in names:
            diags.append(diag("E-BAG-STRUCTURE", "bagit.txt missing"))
        elif read("bagit.txt").decode("utf-8", "replace") != BAGIT_TXT:
            diags.append(diag("E-BAG-STRUCTURE", "bagit.txt does not declare BagIt 1.0 / UTF-8"))

        payload = {n for n in names if n.startswith("data/")}
        manifest_entries: list[tuple[str, str]] = []
        if "manifest-sha256.txt" not in names:
            diags.append(diag("E-BAG-STRUCTURE", "manifest-sha256.txt missing"))
        else:
            for raw in read("manifest-sha256.txt").decode("utf-8", "replace").splitlines():
                if not raw.strip():
                    continue
                digest, sep, path = raw.partition("  ")
                if not sep or len(digest) != 64 or not path.startswith("data/") or ".." in path:
                    diags.append(diag("E-BAG-STRUCTURE", f"malformed manifest line: {raw!r}"))
                    continue
                manifest_entries.append((digest, path))
            for digest, path in manifest_entries:
                if path not in names:
                    diags.append(diag("E-BAG-MISSING-FILE", f"manifest lists '{path}' but it is not in the bag"))
                elif hashlib.sha256(read(path)).hexdigest() != digest:
                    diags.append(diag("E-BAG-HASH", f"checksum mismatch for '{path}'"))
            listed = {path for _, path in manifest_entries}
            for path in sorted(payload - listed):
                diags.append(diag("E-BAG-ORPHAN-FILE", f"'{path}' is in the payload but not the manifest"))

        renames: dict[str, str] = {}
        if "bag-info.txt" not in names:
            diags.append(diag("E-BAG-STRUCTURE", "bag-info.txt missing"))
        else:
            labels = _parse_labels(read("bag-info.txt").decode("utf-8", "replace"))
            for record in labels.get("MEDFORD-Renamed", []):
                old, sep, new = record.partition(" -> ")
                if sep:
                    renames[old] = new
            if "Bagging-Date" not in labels:
                diags.append(diag("E-BAG-STRUCTURE", "bag-info.txt missing Bagging-Date"))
            oxum = labels.get("Payload-Oxum")
            if not oxum:
                diags.append(diag("E-BAG-STRUCTURE", "bag-info.txt missing Payload-Oxum"))
            else:
                actual = f"{sum(len(read(n)) for n in payload)}.{len(payload)}"
                if oxum[0] != actual:
                    diags.append(diag("E-BAG-OXUM", f"Payload-Oxum is {oxum[0]} but payload is {actual}"))

        # Completeness per the embedded documents themselves.
        def present(arc: str) -> bool:
            name = f"data/{arc}"
            return name in names or renames.get(name, "") in names

        for mfd in sorted(n for n in payload if n.endswith(".mfd")):
            try:
                doc = parse_document(read(mfd), mfd)
            except Exception:
                diags.append(diag("E-BAG-STRUCTURE", f"embedded document '{mfd}' is unreadable"))
                continue
            owner_dir = posixpath.dirname(mfd[len("data/"):])
            for role, token, declared, _ in declared_roles(doc):
                if role is Role.REF:
                    continue
                if not present(_arc_for(declared, owner_dir)):
                    diags.append(diag(
                        "E-BAG-MISSING-FILE", f"'{mfd}' tags '@{token} {declared}' but the file is not in the bag",
                    ))
            for decl in doc.imports:
                if not present(_arc_for(decl.file, owner_dir)):
                    diags.append(diag(
                        "E-BAG-MISSING-FILE", f"'{mfd}' imports '{decl.file}' but it is not in the bag",
                    ))
    return diags
