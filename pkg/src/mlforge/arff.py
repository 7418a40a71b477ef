"""Minimal ARFF reader and canonical writer.

Supported subset: numeric and nominal attributes, ``%`` comments,
case-insensitive keywords, quoted names. Sparse ARFF, string/date attributes
and missing-value tokens (``?``) are rejected. The writer emits a canonical
form so that parse -> write -> parse is a fixed point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import IngestError

_NAME_RE = re.compile(r"[A-Za-z0-9_.\-+]+\Z")


@dataclass(frozen=True)
class ArffAttribute:
    name: str
    type: str                        # "numeric" or "nominal"
    values: tuple[str, ...] = ()     # declared value set for nominal attributes

    def __post_init__(self):
        if self.type not in ("numeric", "nominal"):
            raise IngestError(f"unsupported attribute type {self.type!r}")
        if self.type == "nominal" and not self.values:
            raise IngestError(f"nominal attribute {self.name!r} declares no values")


@dataclass(frozen=True)
class ArffDocument:
    relation: str
    attributes: tuple[ArffAttribute, ...]
    rows: tuple[tuple, ...]          # cells are float (numeric) or str (nominal)


def _strip_comment(line: str) -> str:
    # '%' starts a comment unless inside quotes
    out = []
    quote = None
    for ch in line:
        if quote:
            out.append(ch)
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
            out.append(ch)
        elif ch == "%":
            break
        else:
            out.append(ch)
    return "".join(out).strip()


def _unquote(token: str, where: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] in "'\"" and token[-1] == token[0]:
        inner = token[1:-1]
        if token[0] in inner:
            raise IngestError(f"embedded quotes are not supported ({where})")
        return inner
    return token


def _split_csv(text: str, where: str) -> list[str]:
    """Split on commas that are not inside quotes."""
    parts = []
    current = []
    quote = None
    for ch in text:
        if quote:
            current.append(ch)
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
            current.append(ch)
        elif ch == ",":
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if quote:
        raise IngestError(f"unterminated quote ({where})")
    parts.append("".join(current))
    return [part.strip() for part in parts]


def _parse_attribute(rest: str, line_no: int) -> ArffAttribute:
    rest = rest.strip()
    if not rest:
        raise IngestError(f"line {line_no}: @attribute needs a name and a type")
    if rest[0] in "'\"":
        end = rest.find(rest[0], 1)
        if end < 0:
            raise IngestError(f"line {line_no}: unterminated attribute name")
        name = rest[1:end]
        type_part = rest[end + 1:].strip()
    else:
        pieces = rest.split(None, 1)
        if len(pieces) != 2:
            raise IngestError(f"line {line_no}: @attribute needs a name and a type")
        name, type_part = pieces[0], pieces[1].strip()
    if not name:
        raise IngestError(f"line {line_no}: empty attribute name")
    lowered = type_part.lower()
    if lowered in ("numeric", "real", "integer"):
        return ArffAttribute(name=name, type="numeric")
    if type_part.startswith("{") and type_part.endswith("}"):
        values = [_unquote(v, f"line {line_no}") for v in
                  _split_csv(type_part[1:-1], f"line {line_no}")]
        if any(not v for v in values):
            raise IngestError(f"line {line_no}: empty nominal value")
        if len(set(values)) != len(values):
            raise IngestError(f"line {line_no}: duplicate nominal values")
        return ArffAttribute(name=name, type="nominal", values=tuple(values))
    raise IngestError(f"line {line_no}: unsupported attribute type {type_part!r}")


def parse_arff(text: str) -> ArffDocument:
    relation = None
    attributes: list[ArffAttribute] = []
    rows: list[tuple] = []
    in_data = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if not in_data:
            keyword = line.split(None, 1)[0].lower()
            rest = line[len(keyword):].strip()
            if keyword == "@relation":
                if relation is not None:
                    raise IngestError(f"line {line_no}: duplicate @relation")
                relation = _unquote(rest, f"line {line_no}")
                if not relation:
                    raise IngestError(f"line {line_no}: empty relation name")
            elif keyword == "@attribute":
                attributes.append(_parse_attribute(rest, line_no))
            elif keyword == "@data":
                if relation is None or not attributes:
                    raise IngestError(f"line {line_no}: @data before @relation/@attribute")
                in_data = True
            else:
                raise IngestError(f"line {line_no}: unexpected {keyword!r} in header")
            continue
        cells = _split_csv(line, f"line {line_no}")
        if len(cells) != len(attributes):
            raise IngestError(
                f"line {line_no}: row has {len(cells)} values, expected {len(attributes)}")
        row = []
        for attribute, cell in zip(attributes, cells):
            cell = _unquote(cell, f"line {line_no}")
            if cell == "?":
                raise IngestError(f"line {line_no}: missing value '?' is not supported")
            if attribute.type == "numeric":
                try:
                    row.append(float(cell))
                except ValueError:
                    raise IngestError(
                        f"line {line_no}: {cell!r} is not numeric "
                        f"(attribute {attribute.name!r})") from None
            else:
                if cell not in attribute.values:
                    raise IngestError(
                        f"line {line_no}: {cell!r} not in declared values of "
                        f"{attribute.name!r}")
                row.append(cell)
        rows.append(tuple(row))
    if relation is None or not in_data:
        raise IngestError("malformed ARFF header: need @relation, @attribute and @data")
    names = [a.name for a in attributes]
    if len(set(names)) != len(names):
        raise IngestError("duplicate attribute names")
    return ArffDocument(relation=relation, attributes=tuple(attributes), rows=tuple(rows))


def parse_arff_file(path) -> ArffDocument:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    return parse_arff(text)


def _format_name(name: str) -> str:
    if _NAME_RE.match(name):
        return name
    if "'" in name or "\n" in name:
        raise IngestError(f"cannot write attribute name {name!r}")
    return f"'{name}'"


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def write_arff(doc: ArffDocument) -> str:
    """Canonical ARFF text: lowercase keywords, LF endings, repr numerics."""
    lines = [f"@relation {_format_name(doc.relation)}"]
    for attribute in doc.attributes:
        if attribute.type == "numeric":
            lines.append(f"@attribute {_format_name(attribute.name)} numeric")
        else:
            values = ",".join(_format_name(v) for v in attribute.values)
            lines.append(f"@attribute {_format_name(attribute.name)} {{{values}}}")
    lines.append("@data")
    for row in doc.rows:
        cells = []
        for attribute, cell in zip(doc.attributes, row):
            cells.append(_format_number(cell) if attribute.type == "numeric"
                         else _format_name(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
