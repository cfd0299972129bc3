"""Canonical forms of statement signatures for duplicate detection."""

import re
from collections.abc import Callable
from itertools import count

TOKEN_REGEX = re.compile(r"[A-Za-z_][A-Za-z0-9_']*|\d+|<->|->|=>|:=|::|/\\|\\/|\S")
IDENT_REGEX = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")

BINDER_KEYWORDS = frozenset({"forall", "exists", "fun", "∀", "∃", "λ"})
OPENERS = frozenset({"(", "{", "["})
CLOSERS = frozenset({")", "}", "]"})


def tokenize(text: str) -> list[str]:
    """Split a signature into identifier, number and symbol tokens."""
    return TOKEN_REGEX.findall(text)


def is_identifier(token: str) -> bool:
    return bool(IDENT_REGEX.match(token)) and token not in BINDER_KEYWORDS


def canonicalize(signature: str) -> str:
    """
    Canonical form of a signature.

    Whitespace is collapsed by re-joining tokens with single spaces, and
    bound variables are renamed v0, v1, ... in left-to-right binding order,
    skipping any name that occurs free in the signature. Binders are the
    names introduced by forall/exists/fun (bare or inside parenthesized
    groups before the ':') and the variable of a sigma type `{x : T | P}` /
    `{x | P}`. A quantifier's scope ends at the bracket closing the group it
    appears in, or at the end of the signature; a sigma variable's scope
    ends at its closing brace.

    Examples:
        "forall n, P n"  → "forall v0 , P v0"
        "forall m, P m"  → "forall v0 , P v0"
        "forall n, P n v0"  → "forall v1 , P v1 v0"
    """
    tokens = tokenize(signature)
    placeholders = count()
    _, free = _rename_bound(tokens, lambda: f"#{next(placeholders)}")

    numbers = count()

    def fresh() -> str:
        while (name := f"v{next(numbers)}") in free:
            pass
        return name

    out, _ = _rename_bound(tokens, fresh)
    return " ".join(out)


def _rename_bound(tokens: list[str], fresh: Callable[[], str]) -> tuple[list[str], set[str]]:
    """Rename every bound occurrence; returns the new tokens and the free identifiers."""
    mapping: dict[str, list[str]] = {}
    # (bracket depth the scope lives at, names it binds)
    scopes: list[tuple[int, list[str]]] = []
    free: set[str] = set()
    out: list[str] = []
    depth = 0

    def bind(name: str) -> str:
        new = fresh()
        mapping.setdefault(name, []).append(new)
        scopes[-1][1].append(name)
        return new

    def rename(token: str) -> str:
        if not is_identifier(token):
            return token
        if mapping.get(token):
            return mapping[token][-1]
        free.add(token)
        return token

    def open_bracket(token: str) -> None:
        nonlocal depth
        depth += 1
        out.append(token)

    def close_bracket(token: str) -> None:
        nonlocal depth
        depth -= 1
        while scopes and scopes[-1][0] > depth:
            for name in scopes.pop()[1]:
                mapping[name].pop()
        out.append(token)

    i = 0
    n = len(tokens)
    while i < n:
        token = tokens[i]
        if token in BINDER_KEYWORDS:
            out.append(token)
            scopes.append((depth, []))
            header_depth = depth
            in_type = False
            i += 1
            while i < n:
                t = tokens[i]
                if depth == header_depth and (t in (",", "=>") or t in CLOSERS):
                    break
                if t in OPENERS:
                    in_type = False
                    open_bracket(t)
                elif t in CLOSERS:
                    in_type = False
                    close_bracket(t)
                elif t == ":":
                    in_type = True
                    out.append(t)
                elif is_identifier(t) and not in_type:
                    out.append(bind(t))
                else:
                    out.append(rename(t))
                i += 1
            continue

        if (
            token == "{"
            and i + 2 < n
            and is_identifier(tokens[i + 1])
            and tokens[i + 2] in (":", "|")
        ):
            open_bracket(token)
            scopes.append((depth, []))
            out.append(bind(tokens[i + 1]))
            i += 2
            continue

        if token in OPENERS:
            open_bracket(token)
        elif token in CLOSERS:
            close_bracket(token)
        else:
            out.append(rename(token))
        i += 1

    return out, free
