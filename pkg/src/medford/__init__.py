"""Tools for the MEDFORD metadata description language."""

from .blocks import Block, Document, ImportDecl, MinorEntry, PayloadKind, parse, serialize
from .diagnostics import Diagnostic, MedfordError, Severity, Span
from .macros import MacroDef, MacroTable, collect_macros, expand
from .pipeline import Analysis, analyze, analyze_path, parse_document
from .resolve import RefTarget, Workspace, classify_payload, load_imports, resolve_all
from .schema import Mode, base_mode, load_schema, load_schema_file, load_validation_map, validate
from .source import LineKind, RawLine, SourceFile, classify_lines, load_source, token_name_parts

__version__ = "0.1.0"

__all__ = [
    "Analysis",
    "Block",
    "Diagnostic",
    "Document",
    "ImportDecl",
    "LineKind",
    "MacroDef",
    "MacroTable",
    "MedfordError",
    "MinorEntry",
    "Mode",
    "PayloadKind",
    "RawLine",
    "RefTarget",
    "Severity",
    "SourceFile",
    "Span",
    "Workspace",
    "analyze",
    "analyze_path",
    "base_mode",
    "classify_lines",
    "classify_payload",
    "collect_macros",
    "expand",
    "load_imports",
    "load_schema",
    "load_schema_file",
    "load_source",
    "load_validation_map",
    "parse",
    "parse_document",
    "resolve_all",
    "serialize",
    "token_name_parts",
    "validate",
]
