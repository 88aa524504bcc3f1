"""Command-line entry point: one ``medford`` binary with subcommands."""

from __future__ import annotations

import os
import sys

import click

from .bag import collect_file_roles, create_bag, verify_bag
from .blocks import Document, serialize
from .diagnostics import Diagnostic, MedfordError, Span, error, has_errors
from .exif import ExifError, exif_to_block, read_exif_file
from .pipeline import analyze_path, parse_document
from .schema import Mode, base_mode, load_schema_file, load_validation_map


def _render_human(diag: Diagnostic) -> str:
    out = [str(diag)]
    try:
        with open(diag.file, "r", encoding="utf-8", errors="replace") as handle:
            lines = handle.read().split("\n")
        text = lines[diag.span.line - 1]
    except (OSError, IndexError):
        return out[0]
    gutter = f"  {diag.span.line} | "
    out.append(f"{gutter}{text}")
    pad = " " * (len(gutter) + diag.span.col - 1)
    out.append(f"{pad}{'^' * max(1, min(diag.span.length, len(text) or 1))}")
    return "\n".join(out)


def _emit(diags: list[Diagnostic], fmt: str) -> None:
    for diag in diags:
        if fmt == "json":
            click.echo(diag.to_json())
        else:
            click.echo(_render_human(diag))


def _resolve_mode(mode_name: str, mvd: str | None) -> tuple[Mode, list[Diagnostic]]:
    """Pick the validation mode: an .mvd mapping wins, then the bundled base."""
    diags: list[Diagnostic] = []
    if mvd:
        vmap, mvd_diags = load_validation_map(mvd)
        diags.extend(mvd_diags)
        schema_path = vmap.modes.get(mode_name)
        if schema_path is not None:
            mode, schema_diags = load_schema_file(schema_path, mode_name)
            return mode, diags + schema_diags
        if mode_name != "base":
            raise click.UsageError(f"mode '{mode_name}' not defined in {mvd}")
    if mode_name != "base":
        raise click.UsageError(f"unknown mode '{mode_name}' (no --mvd mapping provides it)")
    return base_mode(), diags


@click.group()
@click.version_option(package_name="medford")
def main() -> None:
    """Parse, validate, package, and serve MEDFORD metadata files."""


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", "mode_name", default="base", show_default=True, help="Validation mode name.")
@click.option("--mvd", envvar="MEDFORD_MVD", type=click.Path(exists=True, dir_okay=False),
              help="Validation mapping file (falls back to $MEDFORD_MVD).")
@click.option("--format", "fmt", type=click.Choice(["human", "json"]), default="human", show_default=True)
def validate(paths: tuple[str, ...], mode_name: str, mvd: str | None, fmt: str) -> None:
    """Check syntax, references, and schema conformance. Exit 1 on errors."""
    mode, diags = _resolve_mode(mode_name, mvd)
    for path in paths:
        diags.extend(analyze_path(path, mode).diagnostics)
    _emit(diags, fmt)
    sys.exit(1 if has_errors(diags) else 0)


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def expand(path: str) -> None:
    """Expand macros and print the document in canonical form."""
    try:
        with open(path, "rb") as handle:
            doc = parse_document(handle.read(), path)
    except MedfordError as exc:
        click.echo(_render_human(exc.diagnostic), err=True)
        sys.exit(1)
    for diag in doc.diagnostics:
        click.echo(_render_human(diag), err=True)
    click.echo(serialize(doc), nl=False)
    macro_errors = [d for d in doc.diagnostics if d.is_error and d.code.startswith("E-MACRO")]
    sys.exit(1 if macro_errors else 0)


@main.group()
def bag() -> None:
    """Create and verify BagIt archives."""


@bag.command("create")
@click.argument("root", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False), help="Output zip path.")
@click.option("--mode", "mode_name", default="base", show_default=True)
@click.option("--mvd", envvar="MEDFORD_MVD", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["human", "json"]), default="human", show_default=True)
def bag_create(root: str, out: str, mode_name: str, mvd: str | None, fmt: str) -> None:
    """Package ROOT and everything it references into a BagIt zip.

    Refuses to write anything when validation reports errors.
    """
    mode, diags = _resolve_mode(mode_name, mvd)
    analysis = analyze_path(root, mode)
    diags.extend(analysis.diagnostics)
    if has_errors(diags) or analysis.workspace is None:
        _emit(diags, fmt)
        sys.exit(1)
    roles, role_diags = collect_file_roles(analysis.workspace)
    diags.extend(role_diags)
    if has_errors(diags):
        _emit(diags, fmt)
        sys.exit(1)
    manifest, bag_diags = create_bag(analysis.workspace, roles, out)
    diags.extend(bag_diags)
    _emit(diags, fmt)
    sys.exit(1 if manifest is None or has_errors(diags) else 0)


@bag.command("verify")
@click.argument("bag_path", metavar="BAG", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["human", "json"]), default="human", show_default=True)
def bag_verify(bag_path: str, fmt: str) -> None:
    """Check a bag's structure, hashes, and completeness."""
    diags = verify_bag(bag_path)
    _emit(diags, fmt)
    sys.exit(1 if has_errors(diags) else 0)


@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--name", help="Block name; defaults to the image filename.")
def exif(image: str, name: str | None) -> None:
    """Print a @Photo block built from the image's EXIF metadata."""
    try:
        record = read_exif_file(image)
    except ExifError as exc:
        diag = error(exc.code, str(exc), image, Span(1))
        click.echo(str(diag), err=True)
        sys.exit(1)
    block = exif_to_block(record, name or os.path.basename(image))
    click.echo(serialize(Document(path=image, blocks=[block])), nl=False)


@main.command()
@click.option("--mode", "mode_name", default="base", show_default=True)
@click.option("--mvd", envvar="MEDFORD_MVD", type=click.Path(exists=True, dir_okay=False))
def lsp(mode_name: str, mvd: str | None) -> None:
    """Serve editor diagnostics and completion over stdio (LSP)."""
    from .lsp import LspServer

    mode, _ = _resolve_mode(mode_name, mvd)
    sys.exit(LspServer(default_mode=mode).serve())


if __name__ == "__main__":
    main()
