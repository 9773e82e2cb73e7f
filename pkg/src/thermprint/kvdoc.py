"""Plain-text key/value documents used for scene specs and configs.

Grammar::

    # comment lines and blank lines are ignored
    key = value            # top-level keys, one per line
    [object]               # starts a repeated block
    key = value            # keys belonging to the current block

Keys are case-sensitive; duplicate keys within one section are an error.
"""
from __future__ import annotations

from .core import FormatError


def parse_document(text: str) -> tuple[dict, list[dict]]:
    top: dict = {}
    blocks: list[dict] = []
    current = top
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name != "object":
                raise FormatError(f"line {lineno}: unknown block [{name}]")
            current = {}
            blocks.append(current)
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise FormatError(f"line {lineno}: empty key")
        if key in current:
            raise FormatError(f"line {lineno}: duplicate key {key!r}")
        current[key] = value
    return top, blocks


def format_document(top: dict, blocks: list[dict] = ()) -> str:
    lines = [f"{k} = {v}" for k, v in top.items()]
    for block in blocks:
        lines.append("")
        lines.append("[object]")
        lines.extend(f"{k} = {v}" for k, v in block.items())
    return "\n".join(lines) + "\n"


def take(d: dict, key: str, conv, default=None, *, required: bool = False):
    if key not in d:
        if required:
            raise FormatError(f"missing required key {key!r}")
        return default
    try:
        return conv(d[key])
    except ValueError as exc:
        raise FormatError(f"bad value for {key!r}: {d[key]!r}") from exc
