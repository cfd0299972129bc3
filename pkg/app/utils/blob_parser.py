"""Parser for the declarative contribution blob format.

One declaration per line, `key: value`::

    target: sort_prog
    kind: partial
    premises: sort_base, sort_prog_IH
    signature: forall (l : list nat), {l' : list nat | sorted l' /\\ permutation l' l}
    imports: 3f1c..., 9a0b...

Blank lines and lines starting with `#` are ignored.
"""

import re

from pydantic import ValidationError

from app.schemas.common import raise_protocol_error
from app.schemas.record import Contribution, ContributionKind

KNOWN_KEYS = ("target", "kind", "premises", "signature", "imports")
LIST_KEYS = frozenset({"premises", "imports"})

STATEMENT_ID_REGEX = re.compile(r"^[A-Za-z_][A-Za-z0-9_'.\-]*$")


def is_statement_id(value: str) -> bool:
    """Check a statement id is a plain identifier."""
    return bool(STATEMENT_ID_REGEX.match(value))


def split_list(value: str) -> tuple[str, ...]:
    """Comma-separated values, stripped, empties dropped, first occurrence kept."""
    seen: dict[str, None] = {}
    for item in value.split(","):
        item = item.strip()
        if item:
            seen.setdefault(item, None)
    return tuple(seen)


def parse_contribution(blob: bytes | str) -> Contribution:
    """
    Parse a contribution blob.

    Args:
        blob: Raw blob bytes (UTF-8) or text

    Returns:
        Parsed contribution

    Raises:
        ProtocolError: PARSE_ERROR on undecodable text, a malformed line,
            an unknown or repeated key, a missing target/kind or an unknown kind
    """
    if isinstance(blob, bytes):
        try:
            text = blob.decode("utf-8")
        except UnicodeDecodeError:
            raise_protocol_error("PARSE_ERROR", "Blob is not valid UTF-8")
    else:
        text = blob

    fields: dict[str, str] = {}
    for number, raw in enumerate(text.replace("\r\n", "\n").split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        key = key.strip().lower()
        if not sep:
            raise_protocol_error(
                code="PARSE_ERROR",
                message=f"Line {number} is not a 'key: value' declaration",
                details={"line": number},
            )
        if key not in KNOWN_KEYS:
            raise_protocol_error(
                code="PARSE_ERROR",
                message=f"Unknown key {key!r} on line {number}",
                details={"line": number, "key": key},
            )
        if key in fields:
            raise_protocol_error(
                code="PARSE_ERROR",
                message=f"Key {key!r} declared twice",
                details={"line": number, "key": key},
            )
        fields[key] = value.strip()

    for required in ("target", "kind"):
        if not fields.get(required):
            raise_protocol_error(
                code="PARSE_ERROR",
                message=f"Missing required declaration {required!r}",
                details={"key": required},
            )

    kind = fields["kind"].lower()
    if kind not in {k.value for k in ContributionKind}:
        raise_protocol_error(
            code="PARSE_ERROR",
            message=f"Unknown contribution kind {fields['kind']!r}",
            details={"kind": fields["kind"]},
        )

    try:
        return Contribution(
            target=fields["target"],
            kind=ContributionKind(kind),
            premises=split_list(fields.get("premises", "")),
            signature=fields.get("signature") or None,
            imports=split_list(fields.get("imports", "")),
        )
    except ValidationError as e:
        raise_protocol_error("PARSE_ERROR", str(e))


def render_contribution(contribution: Contribution) -> str:
    """Render a contribution back to blob text (LF line endings, trailing newline)."""
    lines = [f"target: {contribution.target}", f"kind: {contribution.kind.value}"]
    if contribution.premises:
        lines.append(f"premises: {', '.join(contribution.premises)}")
    if contribution.signature:
        lines.append(f"signature: {contribution.signature}")
    if contribution.imports:
        lines.append(f"imports: {', '.join(contribution.imports)}")
    return "\n".join(lines) + "\n"
