"""Language server: diagnostics, completion, and symbols over stdio.

JSON-RPC 2.0 with Content-Length framing, full-document sync. Every
edit re-runs the same pipeline the CLI uses, which keeps published
diagnostics identical to ``medford validate --format json`` on the same
bytes. The server holds one validation mode per session, chosen through
``initializationOptions`` (``{"mode": ..., "mvd": ...}``) and defaulting
to the bundled base mode.
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass, field
from typing import Any, BinaryIO
from urllib.parse import unquote, urlparse

from .blocks import Block, Document
from .diagnostics import Diagnostic, Severity, Span, error
from .pipeline import analyze
from .schema import Mode, base_mode, load_schema_file, load_validation_map

_MINOR_CONTEXT = re.compile(r"@([A-Za-z0-9_]+)-([A-Za-z0-9_]*)$")
_MAJOR_CONTEXT = re.compile(r"(?:^|[\s{(])@([A-Za-z0-9_]*)$")

_PARSE_ERROR = -32700
_INVALID_REQUEST = -32600
_METHOD_NOT_FOUND = -32601
_SERVER_NOT_INITIALIZED = -32002


@dataclass
class _OpenDoc:
    version: int
    text: str
    document: Document | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _uri_to_path(uri: str) -> str:
    parsed = urlparse(uri)
    if parsed.scheme == "file":
        return unquote(parsed.path) or uri
    return uri


def _lsp_diag(diag: Diagnostic) -> dict[str, Any]:
    line = max(diag.span.line - 1, 0)
    col = max(diag.span.col - 1, 0)
    return {
        "range": {
            "start": {"line": line, "character": col},
            "end": {"line": line, "character": col + max(diag.span.length, 1)},
        },
        "severity": 1 if diag.severity is Severity.ERROR else 2,
        "code": diag.code,
        "source": "medford",
        "message": diag.message,
    }


class LspServer:
    def __init__(
        self,
        reader: BinaryIO | None = None,
        writer: BinaryIO | None = None,
        default_mode: Mode | None = None,
    ):
        self._reader = reader or sys.stdin.buffer
        self._writer = writer or sys.stdout.buffer
        self._mode = default_mode or base_mode()
        self._docs: dict[str, _OpenDoc] = {}
        self._initialized = False
        self._shutdown_seen = False

    # -- framing ----------------------------------------------------------

    def _read_message(self) -> dict[str, Any] | None:
        headers: dict[str, str] = {}
        while True:
            line = self._reader.readline()
            if not line:
                return None
            if line in (b"\r\n", b"\n"):
                break
            name, _, value = line.decode("ascii", "replace").partition(":")
            headers[name.strip().lower()] = value.strip()
        try:
            length = int(headers.get("content-length", ""))
        except ValueError:
            return None
        body = self._reader.read(length)
        if body is None or len(body) < length:
            return None
        try:
            message = json.loads(body.decode("utf-8", "replace"))
        except json.JSONDecodeError:
            return {"__malformed__": True}
        return message if isinstance(message, dict) else {"__malformed__": True}

    def _send(self, payload: dict[str, Any]) -> None:
        body = json.dumps({"jsonrpc": "2.0", **payload}, ensure_ascii=False).encode("utf-8")
        self._writer.write(f"Content-Length: {len(body)}\r\n\r\n".encode("ascii"))
        self._writer.write(body)
        self._writer.flush()

    def _respond(self, msg_id: Any, result: Any) -> None:
        self._send({"id": msg_id, "result": result})

    def _respond_error(self, msg_id: Any, code: int, message: str) -> None:
        self._send({"id": msg_id, "error": {"code": code, "message": message}})

    def _notify(self, method: str, params: dict[str, Any]) -> None:
        self._send({"method": method, "params": params})

    # -- session ----------------------------------------------------------

    def serve(self) -> int:
        while True:
            message = self._read_message()
            if message is None:
                return 0 if self._shutdown_seen else 1
            if message.get("__malformed__"):
                self._send({"id": None, "error": {"code": _PARSE_ERROR, "message": "parse error"}})
                continue
            method = message.get("method")
            msg_id = message.get("id")
            params = message.get("params") or {}
            if method == "exit":
                return 0 if self._shutdown_seen else 1
            if msg_id is not None and method is not None:
                self._handle_request(msg_id, method, params)
            elif method is not None:
                self._handle_notification(method, params)

    def _handle_request(self, msg_id: Any, method: str, params: dict[str, Any]) -> None:
        if method == "initialize":
            if self._initialized:
                self._respond_error(msg_id, _INVALID_REQUEST, "server already initialized")
                return
            self._initialized = True
            self._configure(params.get("initializationOptions") or {})
            self._respond(msg_id, {
                "capabilities": {
                    "textDocumentSync": 1,  # full-document sync
                    "completionProvider": {"triggerCharacters": ["@", "-"]},
                    "documentSymbolProvider": True,
                },
                "serverInfo": {"name": "medford", "version": "0.1.0"},
            })
            return
        if not self._initialized:
            self._respond_error(msg_id, _SERVER_NOT_INITIALIZED, "server not initialized")
            return
        if method == "shutdown":
            self._shutdown_seen = True
            self._respond(msg_id, None)
            return
        if self._shutdown_seen:
            self._respond_error(msg_id, _INVALID_REQUEST, "server is shutting down")
            return
        if method == "textDocument/completion":
            self._respond(msg_id, self._completion(params))
            return
        if method == "textDocument/documentSymbol":
            self._respond(msg_id, self._symbols(params))
            return
        self._respond_error(msg_id, _METHOD_NOT_FOUND, f"method not found: {method}")

    def _handle_notification(self, method: str, params: dict[str, Any]) -> None:
        if not self._initialized or self._shutdown_seen:
            return
        if method == "textDocument/didOpen":
            doc = params.get("textDocument") or {}
            uri = doc.get("uri")
            if isinstance(uri, str):
                self._update(uri, int(doc.get("version") or 0), str(doc.get("text") or ""), opened=True)
        elif method == "textDocument/didChange":
            doc = params.get("textDocument") or {}
            uri = doc.get("uri")
            changes = params.get("contentChanges") or []
            if isinstance(uri, str) and uri in self._docs and changes:
                text = changes[-1].get("text")
                if isinstance(text, str):
                    self._update(uri, int(doc.get("version") or 0), text, opened=False)
        elif method == "textDocument/didClose":
            doc = params.get("textDocument") or {}
            uri = doc.get("uri")
            if isinstance(uri, str) and self._docs.pop(uri, None) is not None:
                self._notify("textDocument/publishDiagnostics", {"uri": uri, "diagnostics": []})

    def _configure(self, options: dict[str, Any]) -> None:
        mode_name = options.get("mode")
        mvd = options.get("mvd")
        if isinstance(mvd, str) and isinstance(mode_name, str):
            vmap, _ = load_validation_map(mvd)
            schema_path = vmap.modes.get(mode_name)
            if schema_path is not None:
                mode, diags = load_schema_file(schema_path, mode_name)
                if not any(d.is_error for d in diags):
                    self._mode = mode

    # -- pipeline ---------------------------------------------------------

    def _update(self, uri: str, version: int, text: str, opened: bool) -> None:
        existing = self._docs.get(uri)
        if not opened and existing is not None and version <= existing.version:
            return  # stale update
        path = _uri_to_path(uri)
        try:
            analysis = analyze(text.encode("utf-8"), path, self._mode)
            document = analysis.workspace.root if analysis.workspace else None
            diags = analysis.diagnostics
        except Exception as exc:  # never crash the session on bad input
            document = None
            diags = [error("E-INTERNAL", f"internal failure while analyzing: {exc}", path, Span(1))]
        self._docs[uri] = _OpenDoc(version, text, document, diags)
        self._notify("textDocument/publishDiagnostics", {
            "uri": uri,
            "version": version,
            "diagnostics": [_lsp_diag(d) for d in diags],
        })

    # -- features ---------------------------------------------------------

    def _completion(self, params: dict[str, Any]) -> list[dict[str, Any]]:
        doc = self._docs.get((params.get("textDocument") or {}).get("uri", ""))
        position = params.get("position") or {}
        if doc is None:
            return []
        lines = doc.text.split("\n")
        line_no = int(position.get("line") or 0)
        if line_no >= len(lines):
            return []
        prefix = lines[line_no][: int(position.get("character") or 0)]
        match = _MINOR_CONTEXT.search(prefix)
        if match is not None:
            spec = self._mode.tokens.get(match.group(1))
            if spec is None:
                return []
            typed = match.group(2)
            return [
                {
                    "label": f.name,
                    "kind": 5,  # Field
                    "detail": f"{f.type} · {f.presence.value}",
                }
                for f in spec.fields
                if f.name.startswith(typed)
            ]
        match = _MAJOR_CONTEXT.search(prefix)
        if match is not None:
            typed = match.group(1)
            return [
                {
                    "label": major,
                    "kind": 7,  # Class
                    "detail": spec.presence.value + (" · Multiple" if spec.multiple else ""),
                }
                for major, spec in self._mode.tokens.items()
                if major.startswith(typed)
            ]
        return []

    def _symbols(self, params: dict[str, Any]) -> list[dict[str, Any]]:
        doc = self._docs.get((params.get("textDocument") or {}).get("uri", ""))
        if doc is None or doc.document is None:
            return []
        lines = doc.text.split("\n")

        def to_symbol(block: Block) -> dict[str, Any]:
            line = max(block.span.line - 1, 0)
            width = len(lines[line]) if line < len(lines) else 1
            rng = {
                "start": {"line": line, "character": 0},
                "end": {"line": line, "character": max(width, 1)},
            }
            label = block.name.split("\n", 1)[0].strip()
            return {
                "name": f"@{block.major} {label}".rstrip(),
                "kind": 2,  # Module
                "range": rng,
                "selectionRange": rng,
                "children": [to_symbol(child) for child in block.children],
            }

        return [to_symbol(block) for block in doc.document.blocks]
