"""Lexical layer: raw text to a classified line stream with exact spans.

Classification is a total function over lines; the tie-break order is
macro-definition markers first, then token lines, then comments, blanks,
and finally continuations. Joining ``content + terminator`` over the
classified lines reproduces the input text byte for byte.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from .diagnostics import Diagnostic, MedfordError, Span, error, warning


class LineKind(enum.Enum):
    MAJOR = "major"
    MINOR = "minor"
    MACRO_DEF_V1 = "macro-def-v1"
    MACRO_DEF_V2 = "macro-def-v2"
    COMMENT = "comment"
    BLANK = "blank"
    CONTINUATION = "continuation"


@dataclass(frozen=True)
class RawLine:
    """One physical line; ``content`` excludes the terminator."""

    number: int  # 1-based, contiguous
    content: str
    kind: LineKind
    start: int  # byte offset of the first content byte
    end: int  # byte offset past the last content byte
    terminator: str = "\n"  # "\n", "\r\n", or "" on the final line


@dataclass
class SourceFile:
    path: str
    text: str
    lines: list[RawLine]
    diagnostics: list[Diagnostic] = field(default_factory=list)


_TOKEN_HEAD = re.compile(r"^@(\S*)")
_TOKEN_PART = re.compile(r"^[A-Za-z0-9_]+$")


def _classify(content: str) -> LineKind:
    if content.startswith(">@"):
        return LineKind.MACRO_DEF_V2
    if content.startswith("`@"):
        return LineKind.MACRO_DEF_V1
    if content.startswith("@"):
        word = _TOKEN_HEAD.match(content).group(1)
        return LineKind.MINOR if "-" in word else LineKind.MAJOR
    stripped = content.strip()
    if not stripped:
        return LineKind.BLANK
    if stripped.startswith("#"):
        return LineKind.COMMENT
    return LineKind.CONTINUATION


def _split_physical_lines(text: str):
    """Yield (content, terminator) pairs; only LF and CRLF end lines."""
    pos = 0
    n = len(text)
    while pos < n:
        nl = text.find("\n", pos)
        if nl < 0:
            yield text[pos:], ""
            return
        piece = text[pos:nl]
        if piece.endswith("\r"):
            yield piece[:-1], "\r\n"
        else:
            yield piece, "\n"
        pos = nl + 1


def classify_lines(text: str) -> list[RawLine]:
    """Classify every line of ``text``; spans are byte offsets into it."""
    lines: list[RawLine] = []
    offset = 0
    for number, (content, terminator) in enumerate(_split_physical_lines(text), 1):
        start = offset
        end = start + len(content.encode("utf-8"))
        offset = end + len(terminator)
        lines.append(RawLine(number, content, _classify(content), start, end, terminator))
    return lines


def load_source(data: bytes, path: str) -> SourceFile:
    """Decode ``data`` and classify it.

    Raises :class:`MedfordError` with E-ENCODING when the bytes are not
    valid UTF-8. A leading byte-order mark is stripped with W-BOM.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MedfordError(
            error("E-ENCODING", f"file is not valid UTF-8: {exc.reason} at byte {exc.start}", path, Span(1))
        ) from exc
    diags: list[Diagnostic] = []
    if text.startswith("﻿"):
        text = text[1:]
        diags.append(warning("W-BOM", "leading byte-order mark stripped", path, Span(1)))
    return SourceFile(path, text, classify_lines(text), diags)


def read_source(path: str) -> SourceFile:
    with open(path, "rb") as handle:
        return load_source(handle.read(), path)


def token_name_parts(line: RawLine, file: str = "") -> tuple[str, str | None, str]:
    """Split a token line into (major, minor, payload).

    The payload is the remainder after the token word, stripped of
    surrounding whitespace. Raises :class:`MedfordError` with E-BAD-TOKEN
    for names outside ``[A-Za-z0-9_]`` or with more than one ``-``.
    """
    match = _TOKEN_HEAD.match(line.content)
    if match is None:
        raise MedfordError(
            error("E-BAD-TOKEN", f"not a token line: {line.content!r}", file, Span(line.number))
        )
    word = match.group(1)
    payload = line.content[match.end():].strip()
    span = Span(line.number, 1, len(word) + 1)

    def bad(reason: str) -> MedfordError:
        return MedfordError(error("E-BAD-TOKEN", f"malformed token '@{word}': {reason}", file, span))

    if "-" in word:
        major, _, minor = word.partition("-")
        if "-" in minor:
            raise bad("token names may contain at most one '-'")
        if not _TOKEN_PART.match(major) or not _TOKEN_PART.match(minor):
            raise bad("name parts must match [A-Za-z0-9_]+")
        return major, minor, payload
    if not _TOKEN_PART.match(word):
        raise bad("name must match [A-Za-z0-9_]+")
    return word, None, payload
