"""Macro definition collection and payload expansion.

Two marker dialects are accepted in the same file: the original backtick
form (`` `@Name`` to define, `` `@Name`` or ``{`@Name}`` to invoke) and
the newer arrow form (``>@Name`` to define, ``<@Name`` or ``{<@Name}`` to
invoke). A backtick line whose name is already defined is not a second
definition: it is reclassified as a continuation carrying an invocation,
which is how multi-line payloads that place an invocation at the start of
a line are disambiguated.

Macro bodies are fully expanded when the definition is recorded, so
expanding a payload is a single left-to-right pass and always terminates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .diagnostics import Diagnostic, Span, error, warning
from .source import LineKind, RawLine

V1 = "v1"
V2 = "v2"

_NAME_RUN = re.compile(r"[A-Za-z0-9]*")
_BRACED = re.compile(r"\{(`@|<@)([A-Za-z0-9]+)\}")


@dataclass(frozen=True)
class MacroDef:
    name: str  # letters and digits only
    body: str  # may contain embedded newlines; contains no invocation markers
    dialect: str  # V1 or V2
    line: int  # definition site


@dataclass
class MacroTable:
    defs: dict[str, MacroDef] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)

    def __contains__(self, name: str) -> bool:
        return name in self.defs

    def get(self, name: str) -> MacroDef | None:
        return self.defs.get(name)

    def add(self, definition: MacroDef) -> None:
        self.defs[definition.name] = definition
        self.order.append(definition.name)


@dataclass
class _Pending:
    name: str
    segments: list[str]
    dialect: str
    line: RawLine


def _split_definition(content: str, marker_len: int) -> tuple[str, str] | None:
    """Return (name, first body segment) or None when the name is malformed.

    The name is the alphanumeric run directly after the marker; it must be
    followed by whitespace or end-of-line.
    """
    rest = content[marker_len:]
    name = _NAME_RUN.match(rest).group(0)
    after = rest[len(name):]
    if not name or (after and after[0] not in " \t"):
        return None
    return name, after[1:].strip() if after else ""


def collect_macros(
    lines: list[RawLine], path: str = ""
) -> tuple[MacroTable, list[RawLine], list[Diagnostic]]:
    """Build the macro table and return the residual (non-macro) lines."""
    table = MacroTable()
    residual: list[RawLine] = []
    diags: list[Diagnostic] = []
    pending: _Pending | None = None

    def finalize() -> None:
        nonlocal pending
        if pending is None:
            return
        segments = pending.segments
        if segments and segments[0] == "" and len(segments) > 1:
            segments = segments[1:]
        body = "\n".join(segments)
        span = Span(pending.line.number, 1, 2)
        if not body:
            diags.append(error("E-MACRO-EMPTY", f"macro '{pending.name}' has an empty body", path, span))
        else:
            body, body_diags = expand(body, table, path, pending.line.number)
            diags.extend(body_diags)
            if not any(d.is_error for d in body_diags):
                table.add(MacroDef(pending.name, body, pending.dialect, pending.line.number))
        pending = None

    for line in lines:
        if line.kind is LineKind.CONTINUATION and pending is not None:
            pending.segments.append(line.content.strip())
            continue
        if line.kind is LineKind.MACRO_DEF_V2:
            finalize()
            parts = _split_definition(line.content, 2)
            if parts is None:
                diags.append(error("E-MACRO-NAME", "macro names may contain only letters and numbers", path, Span(line.number)))
                continue
            name, first = parts
            existing = table.get(name)
            if existing is not None:
                diags.append(error(
                    "E-MACRO-REDEF",
                    f"macro '{name}' already defined at line {existing.line}",
                    path, Span(line.number),
                ))
                continue
            pending = _Pending(name, [first], V2, line)
        elif line.kind is LineKind.MACRO_DEF_V1:
            finalize()
            run = _NAME_RUN.match(line.content[2:]).group(0)
            if run and run in table:
                # Defined name at line start: this is an invocation written
                # on its own line, not a redefinition.
                diags.append(warning(
                    "W-AMBIGUOUS-MACRO",
                    f"'`@{run}' names an existing macro; line treated as an invocation continuation",
                    path, Span(line.number, 1, len(run) + 2),
                ))
                residual.append(replace(line, kind=LineKind.CONTINUATION))
                continue
            parts = _split_definition(line.content, 2)
            if parts is None:
                diags.append(error("E-MACRO-NAME", "macro names may contain only letters and numbers", path, Span(line.number)))
                continue
            name, first = parts
            pending = _Pending(name, [first], V1, line)
        else:
            finalize()
            residual.append(line)
    finalize()
    return table, residual, diags


def expand(
    payload: str, table: MacroTable, path: str = "", line: int = 0
) -> tuple[str, list[Diagnostic]]:
    """Replace every macro invocation in ``payload`` with its body.

    Braced invocations (``{`@Name}`` / ``{<@Name}``) delimit the name
    explicitly; bare invocations consume the longest alphanumeric run after
    the marker, and that exact run must be a defined macro. Unknown names
    produce E-MACRO-UNDEF and are left in place.
    """
    diags: list[Diagnostic] = []
    out: list[str] = []
    span = Span(max(line, 1))
    i = 0
    n = len(payload)
    while i < n:
        ch = payload[i]
        if ch == "{":
            match = _BRACED.match(payload, i)
            if match is not None:
                marker, name = match.group(1), match.group(2)
                definition = table.get(name)
                if definition is None:
                    diags.append(error("E-MACRO-UNDEF", f"undefined macro '{marker}{name}'", path, span))
                    out.append(match.group(0))
                else:
                    out.append(definition.body)
                i = match.end()
                continue
        if payload.startswith("`@", i) or payload.startswith("<@", i):
            marker = payload[i:i + 2]
            run = _NAME_RUN.match(payload, i + 2).group(0)
            definition = table.get(run) if run else None
            if definition is not None:
                out.append(definition.body)
            elif run:
                diags.append(error("E-MACRO-UNDEF", f"undefined macro '{marker}{run}'", path, span))
                out.append(marker + run)
            else:
                diags.append(error("E-MACRO-UNDEF", f"macro marker '{marker}' with no name", path, span))
                out.append(marker)
            i += 2 + len(run)
            continue
        out.append(ch)
        i += 1
    return "".join(out), diags


def _split_head(content: str) -> tuple[str, str]:
    match = re.match(r"^(\S+)[ \t]*", content)
    head = match.group(1)
    return head, content[match.end():]


def expand_lines(
    lines: list[RawLine], table: MacroTable, path: str = ""
) -> tuple[list[RawLine], list[Diagnostic]]:
    """Expand invocations in token payloads and continuation lines.

    Token heads themselves are never expanded; comments and blank lines
    pass through untouched.
    """
    out: list[RawLine] = []
    diags: list[Diagnostic] = []
    for line in lines:
        if line.kind in (LineKind.MAJOR, LineKind.MINOR):
            head, rest = _split_head(line.content)
            expanded, line_diags = expand(rest, table, path, line.number)
            diags.extend(line_diags)
            content = f"{head} {expanded}" if expanded else head
            out.append(replace(line, content=content))
        elif line.kind is LineKind.CONTINUATION:
            expanded, line_diags = expand(line.content, table, path, line.number)
            diags.extend(line_diags)
            out.append(replace(line, content=expanded))
        else:
            out.append(line)
    return out, diags
