"""Declarative data models and the validation engine.

A schema file is a YAML mapping from major token names to a list of
entries: presence flags (``Required``/``Optional``), ``Multiple``, a
``Type`` for the block's name line, an optional numeric ``Constraint``,
an optional ``Validator`` id, and a ``Contents`` list describing minor
tokens the same way (plus the ``Desirable`` presence level, which warns
instead of erroring when the minor is absent).

Only a restricted YAML subset is accepted: mappings, sequences, scalars
and comments. Anchors and aliases are rejected.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import yaml

from .blocks import Block, MinorEntry, PayloadKind
from .diagnostics import Diagnostic, Span, error, sort_key, warning
from .resolve import Workspace


class Presence(Enum):
    REQUIRED = "Required"
    DESIRABLE = "Desirable"
    OPTIONAL = "Optional"


_TYPE_NAMES = {"string", "number", "integer", "email", "uri", "phone", "date", "filepath"}
_REF = re.compile(r"^ref\(([A-Za-z0-9_]+)\)$")
_NUMERIC_KINDS = {"number", "integer"}
_CONSTRAINT = re.compile(r"^(>=|<=|==|>|<)\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+))$")


@dataclass(frozen=True)
class TypeSpec:
    kind: str  # one of _TYPE_NAMES or "ref"
    ref_major: str | None = None

    def __str__(self) -> str:
        return f"ref({self.ref_major})" if self.kind == "ref" else self.kind


STRING = TypeSpec("string")


@dataclass(frozen=True)
class Constraint:
    op: str  # >, >=, <, <=, ==
    bound: float

    def holds(self, value: float) -> bool:
        return {
            ">": value > self.bound,
            ">=": value >= self.bound,
            "<": value < self.bound,
            "<=": value <= self.bound,
            "==": value == self.bound,
        }[self.op]

    def __str__(self) -> str:
        return f"{self.op} {self.bound:g}"


@dataclass
class FieldSpec:
    name: str
    type: TypeSpec = STRING
    presence: Presence = Presence.OPTIONAL
    multiple: bool = False
    constraint: Constraint | None = None


@dataclass
class TokenSpec:
    major: str
    presence: Presence = Presence.OPTIONAL
    multiple: bool = False
    name_type: TypeSpec = STRING
    name_constraint: Constraint | None = None
    fields: list[FieldSpec] = field(default_factory=list)
    custom_validator: str | None = None

    def field_spec(self, name: str) -> FieldSpec | None:
        for spec in self.fields:
            if spec.name == name:
                return spec
        return None


@dataclass
class Mode:
    name: str
    tokens: dict[str, TokenSpec] = field(default_factory=dict)


@dataclass
class ValidationMap:
    path: str
    modes: dict[str, str] = field(default_factory=dict)  # mode name -> schema abspath
    validators: dict[str, str] = field(default_factory=dict)  # id -> descriptor


# ---------------------------------------------------------------------------
# Typed value validators. Deliberately shallow: the goal is "appears
# reasonable", not RFC-grade acceptance. All are total over arbitrary text.

_URI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:.+$")
_DATE_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?)?$")
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")
_INTEGER_RE = re.compile(r"^[+-]?\d+$")
_PHONE_STRIP = re.compile(r"[+\-(). ]")


def is_email(text: str) -> bool:
    if text.count("@") != 1:
        return False
    local, domain = text.split("@")
    return bool(local) and bool(domain) and "." in domain


def is_uri(text: str) -> bool:
    return _URI_RE.match(text) is not None


def is_phone(text: str) -> bool:
    digits = _PHONE_STRIP.sub("", text)
    return len(digits) >= 7 and digits.isascii() and digits.isdigit()


def is_date(text: str) -> bool:
    match = _DATE_RE.match(text)
    if match is None:
        return False
    import datetime

    try:
        datetime.date(int(match.group(1)), int(match.group(2)), int(match.group(3)))
    except ValueError:
        return False
    return True


def is_number(text: str) -> bool:
    return _NUMBER_RE.match(text) is not None


def is_integer(text: str) -> bool:
    return _INTEGER_RE.match(text) is not None


def is_filepath(text: str) -> bool:
    return bool(text) and "\x00" not in text and "\n" not in text


_CHECKERS = {
    "string": lambda text: True,
    "email": is_email,
    "uri": is_uri,
    "phone": is_phone,
    "date": is_date,
    "number": is_number,
    "integer": is_integer,
    "filepath": is_filepath,
}


# ---------------------------------------------------------------------------
# Schema loading


def _parse_type(text: str, path: str, diags: list[Diagnostic]) -> TypeSpec | None:
    ref = _REF.match(text.strip())
    if ref is not None:
        return TypeSpec("ref", ref.group(1))
    kind = text.strip().lower()
    if kind in _TYPE_NAMES:
        return TypeSpec(kind)
    diags.append(error("E-SCHEMA-BAD-TYPE", f"unknown field type {text!r}", path, Span(1)))
    return None


def _parse_constraint(text: str, path: str, diags: list[Diagnostic]) -> Constraint | None:
    match = _CONSTRAINT.match(str(text).strip())
    if match is None:
        diags.append(error(
            "E-SCHEMA-BAD-CONSTRAINT",
            f"constraint {text!r} must be an operator (>, >=, <, <=, ==) and a number",
            path, Span(1),
        ))
        return None
    return Constraint(match.group(1), float(match.group(2)))


def _reject_anchors(text: str, path: str) -> Diagnostic | None:
    try:
        for event in yaml.parse(text):
            if isinstance(event, yaml.AliasEvent) or getattr(event, "anchor", None):
                return error("E-SCHEMA-SYNTAX", "YAML anchors and aliases are not supported", path, Span(1))
    except yaml.YAMLError as exc:
        return error("E-SCHEMA-SYNTAX", f"not valid YAML: {exc}", path, Span(1))
    return None


def _parse_field(name: str, items: object, path: str, diags: list[Diagnostic]) -> FieldSpec | None:
    spec = FieldSpec(str(name))
    if items is None:
        return spec
    if not isinstance(items, list):
        diags.append(error("E-SCHEMA-SYNTAX", f"entries for minor '{name}' must be a list", path, Span(1)))
        return None
    pending_constraint: object | None = None
    for item in items:
        if isinstance(item, str):
            flag = item.strip()
            if flag == "Required":
                spec.presence = Presence.REQUIRED
            elif flag == "Desirable":
                spec.presence = Presence.DESIRABLE
            elif flag == "Optional":
                spec.presence = Presence.OPTIONAL
            elif flag == "Multiple":
                spec.multiple = True
            else:
                diags.append(warning("W-SCHEMA-UNKNOWN-KEY", f"unknown entry {flag!r} for minor '{name}'", path, Span(1)))
        elif isinstance(item, dict):
            for key, value in item.items():
                if key == "Type":
                    parsed = _parse_type(str(value), path, diags)
                    if parsed is not None:
                        spec.type = parsed
                elif key == "Constraint":
                    pending_constraint = value
                else:
                    diags.append(warning("W-SCHEMA-UNKNOWN-KEY", f"unknown key {key!r} for minor '{name}'", path, Span(1)))
        else:
            diags.append(error("E-SCHEMA-SYNTAX", f"unexpected entry {item!r} for minor '{name}'", path, Span(1)))
    if pending_constraint is not None:
        constraint = _parse_constraint(str(pending_constraint), path, diags)
        if constraint is not None:
            if spec.type.kind in _NUMERIC_KINDS:
                spec.constraint = constraint
            else:
                diags.append(error(
                    "E-SCHEMA-BAD-CONSTRAINT",
                    f"constraint on non-numeric minor '{name}' (type {spec.type})",
                    path, Span(1),
                ))
    return spec


def _parse_contents(value: object, major: str, path: str, diags: list[Diagnostic]) -> list[FieldSpec]:
    fields: list[FieldSpec] = []
    if not isinstance(value, list):
        diags.append(error("E-SCHEMA-SYNTAX", f"Contents of '{major}' must be a list", path, Span(1)))
        return fields
    for item in value:
        if not isinstance(item, dict) or len(item) != 1:
            diags.append(error("E-SCHEMA-SYNTAX", f"each Contents entry of '{major}' must name one minor", path, Span(1)))
            continue
        (minor, entries), = item.items()
        spec = _parse_field(str(minor), entries, path, diags)
        if spec is None:
            continue
        if any(existing.name == spec.name for existing in fields):
            diags.append(error("E-SCHEMA-SYNTAX", f"duplicate minor '{spec.name}' in '{major}'", path, Span(1)))
            continue
        fields.append(spec)
    return fields


def _parse_token(major: str, items: object, path: str, diags: list[Diagnostic]) -> TokenSpec | None:
    spec = TokenSpec(str(major))
    if items is None:
        return spec
    if not isinstance(items, list):
        diags.append(error("E-SCHEMA-SYNTAX", f"entries for '{major}' must be a list", path, Span(1)))
        return None
    pending_constraint: object | None = None
    for item in items:
        if isinstance(item, str):
            flag = item.strip()
            if flag == "Required":
                spec.presence = Presence.REQUIRED
            elif flag == "Optional":
                spec.presence = Presence.OPTIONAL
            elif flag == "Multiple":
                spec.multiple = True
            else:
                diags.append(warning("W-SCHEMA-UNKNOWN-KEY", f"unknown entry {flag!r} for '{major}'", path, Span(1)))
        elif isinstance(item, dict):
            for key, value in item.items():
                if key == "Type":
                    parsed = _parse_type(str(value), path, diags)
                    if parsed is not None:
                        spec.name_type = parsed
                elif key == "Constraint":
                    pending_constraint = value
                elif key == "Contents":
                    spec.fields = _parse_contents(value, major, path, diags)
                elif key == "Validator":
                    spec.custom_validator = str(value)
                else:
                    diags.append(warning("W-SCHEMA-UNKNOWN-KEY", f"unknown key {key!r} for '{major}'", path, Span(1)))
        else:
            diags.append(error("E-SCHEMA-SYNTAX", f"unexpected entry {item!r} for '{major}'", path, Span(1)))
    if pending_constraint is not None:
        constraint = _parse_constraint(str(pending_constraint), path, diags)
        if constraint is not None:
            if spec.name_type.kind in _NUMERIC_KINDS:
                spec.name_constraint = constraint
            else:
                diags.append(error(
                    "E-SCHEMA-BAD-CONSTRAINT",
                    f"constraint on non-numeric name of '{major}' (type {spec.name_type})",
                    path, Span(1),
                ))
    return spec


def load_schema(text: str, path: str = "<schema>", mode_name: str = "") -> tuple[Mode, list[Diagnostic]]:
    """Parse one schema document into a Mode.

    Unknown keys warn (W-SCHEMA-UNKNOWN-KEY) for forward compatibility;
    structural problems are E-SCHEMA-SYNTAX.
    """
    diags: list[Diagnostic] = []
    mode = Mode(mode_name or os.path.splitext(os.path.basename(path))[0])
    rejection = _reject_anchors(text, path)
    if rejection is not None:
        return mode, [rejection]
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        return mode, [error("E-SCHEMA-SYNTAX", f"not valid YAML: {exc}", path, Span(1))]
    if data is None:
        return mode, diags
    if not isinstance(data, dict):
        return mode, [error("E-SCHEMA-SYNTAX", "schema root must be a mapping of major tokens", path, Span(1))]
    for major, items in data.items():
        spec = _parse_token(str(major), items, path, diags)
        if spec is not None:
            mode.tokens[spec.major] = spec
    return mode, diags


def load_schema_file(path: str, mode_name: str = "") -> tuple[Mode, list[Diagnostic]]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        return Mode(mode_name or path), [error("E-SCHEMA-SYNTAX", f"cannot read schema: {exc}", path, Span(1))]
    return load_schema(text, path, mode_name)


def base_mode() -> Mode:
    """The bundled default mode, usable with no configuration at all."""
    text = resources.files("medford").joinpath("schemas/base.yaml").read_text(encoding="utf-8")
    mode, diags = load_schema(text, "schemas/base.yaml", "base")
    assert not diags, "bundled schema must load cleanly"
    return mode


def load_validation_map(path: str) -> tuple[ValidationMap, list[Diagnostic]]:
    """Load the mode-to-schema mapping file (``MEDFORD.mvd``)."""
    vmap = ValidationMap(path)
    diags: list[Diagnostic] = []
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        return vmap, [error("E-MVD-SYNTAX", f"cannot read validation map: {exc}", path, Span(1))]
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        return vmap, [error("E-MVD-SYNTAX", f"not valid YAML: {exc}", path, Span(1))]
    if data is None:
        return vmap, [warning("W-MVD-EMPTY", "validation map is empty", path, Span(1))]
    if not isinstance(data, dict):
        return vmap, [error("E-MVD-SYNTAX", "validation map root must be a mapping", path, Span(1))]
    base_dir = os.path.dirname(os.path.abspath(path))
    modes = data.get("modes")
    if modes is not None:
        if not isinstance(modes, dict):
            diags.append(error("E-MVD-SYNTAX", "'modes' must map mode names to schema paths", path, Span(1)))
        else:
            for name, schema_path in modes.items():
                resolved = os.path.normpath(os.path.join(base_dir, str(schema_path)))
                if not os.path.isfile(resolved):
                    diags.append(error(
                        "E-MVD-MISSING-SCHEMA", f"schema for mode '{name}' not found: {schema_path}", path, Span(1),
                    ))
                    continue
                vmap.modes[str(name)] = resolved
    validators = data.get("validators")
    if validators is not None:
        if not isinstance(validators, dict):
            diags.append(error("E-MVD-SYNTAX", "'validators' must map ids to descriptors", path, Span(1)))
        else:
            vmap.validators = {str(k): str(v) for k, v in validators.items()}
    for key in data:
        if key not in ("modes", "validators"):
            diags.append(warning("W-SCHEMA-UNKNOWN-KEY", f"unknown validation map key {key!r}", path, Span(1)))
    if not vmap.modes and not vmap.validators and not diags:
        diags.append(warning("W-MVD-EMPTY", "validation map defines no modes or validators", path, Span(1)))
    return vmap, diags


# ---------------------------------------------------------------------------
# Validation


def _check_typed(
    value: str, spec_type: TypeSpec, entry: MinorEntry | None,
    label: str, file: str, span: Span, diags: list[Diagnostic],
) -> bool:
    """Check one payload against a type; returns True when it conforms."""
    if spec_type.kind == "ref":
        ref_kinds = (PayloadKind.INTERNAL_REF, PayloadKind.EXTERNAL_REF)
        if entry is None or entry.payload_kind not in ref_kinds or entry.ref is None:
            diags.append(error(
                "E-TYPE-REF", f"{label} must reference '@{spec_type.ref_major} <Name>'", file, span,
            ))
            return False
        if entry.ref.major != spec_type.ref_major:
            diags.append(error(
                "E-TYPE-REF",
                f"{label} must reference a '@{spec_type.ref_major}' block, not '@{entry.ref.major}'",
                file, span,
            ))
            return False
        return True
    ok = _CHECKERS[spec_type.kind](value.strip())
    if not ok:
        diags.append(error(
            f"E-TYPE-{spec_type.kind.upper()}", f"{label} is not a valid {spec_type.kind}: {value!r}", file, span,
        ))
        return False
    if entry is not None:
        if spec_type.kind == "filepath":
            entry.payload_kind = PayloadKind.FILEPATH
        elif spec_type.kind == "uri":
            entry.payload_kind = PayloadKind.URI
    return True


def _check_constraint(
    value: str, constraint: Constraint | None, label: str,
    file: str, span: Span, diags: list[Diagnostic],
) -> None:
    if constraint is None:
        return
    try:
        number = float(value.strip())
    except ValueError:
        return  # the type check already reported this payload
    if not constraint.holds(number):
        diags.append(error("E-CONSTRAINT", f"{label} must be {constraint}, got {value.strip()!r}", file, span))


def _validate_block(block: Block, spec: TokenSpec, mode: Mode, file: str, diags: list[Diagnostic]) -> None:
    label = f"'@{block.major}' name"
    name = block.name.strip()
    if name:
        if _check_typed(name, spec.name_type, None, label, file, block.span, diags):
            _check_constraint(name, spec.name_constraint, label, file, block.span, diags)
    if spec.custom_validator is not None:
        diags.append(warning(
            "W-CUSTOM-VALIDATOR-SKIPPED",
            f"custom validator '{spec.custom_validator}' for '@{block.major}' not executed",
            file, block.span,
        ))
    grouped: dict[str, list[MinorEntry]] = {}
    for entry in block.minors:
        grouped.setdefault(entry.minor, []).append(entry)
    for field_spec in spec.fields:
        entries = grouped.get(field_spec.name, [])
        minor_label = f"'@{block.major}-{field_spec.name}'"
        if not entries:
            if field_spec.presence is Presence.REQUIRED:
                diags.append(error(
                    "E-REQUIRED-MISSING", f"block '@{block.major} {name}' is missing required minor {minor_label}",
                    file, block.span,
                ))
            elif field_spec.presence is Presence.DESIRABLE:
                diags.append(warning(
                    "W-DESIRABLE-MISSING", f"block '@{block.major} {name}' has no {minor_label} (desirable)",
                    file, block.span,
                ))
            continue
        if len(entries) > 1 and not field_spec.multiple:
            for extra in entries[1:]:
                diags.append(error(
                    "E-MULTIPLICITY", f"{minor_label} given {len(entries)} times but allows one",
                    file, extra.span,
                ))
        for entry in entries:
            if _check_typed(entry.payload, field_spec.type, entry, minor_label, file, entry.span, diags):
                _check_constraint(entry.payload, field_spec.constraint, minor_label, file, entry.span, diags)
    for child in block.children:
        child_spec = mode.tokens.get(child.major)
        if child_spec is not None:
            _validate_block(child, child_spec, mode, file, diags)


def validate(ws: Workspace, mode: Mode) -> list[Diagnostic]:
    """Validate the workspace's root document against one output mode.

    Findings are diagnostics, never exceptions; an empty list means valid.
    Imported files are not re-validated against the root's mode.
    """
    doc = ws.root
    diags: list[Diagnostic] = []
    by_major: dict[str, list[Block]] = {}
    for block in doc.blocks:
        by_major.setdefault(block.major, []).append(block)

    for major, spec in mode.tokens.items():
        blocks = by_major.get(major, [])
        if spec.presence is Presence.REQUIRED and not blocks:
            diags.append(error(
                "E-REQUIRED-MISSING", f"mode '{mode.name}' requires at least one '@{major}' block",
                doc.path, Span(1),
            ))
        if len(blocks) > 1 and not spec.multiple:
            for extra in blocks[1:]:
                diags.append(error(
                    "E-MULTIPLICITY", f"'@{major}' given {len(blocks)} times but mode '{mode.name}' allows one",
                    doc.path, extra.span,
                ))

    for block in doc.blocks:
        spec = mode.tokens.get(block.major)
        if spec is None:
            diags.append(warning(
                "W-UNKNOWN-MAJOR", f"'@{block.major}' is not defined by mode '{mode.name}'",
                doc.path, block.span,
            ))
            continue
        _validate_block(block, spec, mode, doc.path, diags)
    return sorted(diags, key=sort_key)
