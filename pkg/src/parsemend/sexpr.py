"""Minimal s-expression reader for the knowledge-base files.

Forms are nested lists of symbols (``Sym``), quoted strings (``str``)
and integers.  ``;`` comments run to end of line.  Errors report the
1-based line and column of the offending character.
"""

from __future__ import annotations

import re

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9-]*$")

_PUNCT = "punct"
_ATOM = "atom"


class Sym(str):
    """An unquoted identifier or keyword atom."""

    __slots__ = ()

    def __repr__(self):
        return f"Sym({str.__repr__(self)})"


class SexprError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


def _tokenize(text: str):
    """Yield (kind, value, line, column); kind is 'punct' or 'atom'."""
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield _PUNCT, ch, line, col
            i += 1
            col += 1
        elif ch == '"':
            start_line, start_col = line, col
            j = i + 1
            while j < n and text[j] not in '"\n':
                j += 1
            if j >= n or text[j] == "\n":
                raise SexprError("unterminated string", start_line, start_col)
            yield _ATOM, text[i + 1 : j], start_line, start_col
            col += j + 1 - i
            i = j + 1
        else:
            start_line, start_col = line, col
            j = i
            while j < n and text[j] not in ' \t\r\n();"':
                j += 1
            atom = text[i:j]
            if atom.lstrip("-").isdigit():
                yield _ATOM, int(atom), start_line, start_col
            else:
                yield _ATOM, Sym(atom), start_line, start_col
            col += j - i
            i = j


def parse_sexprs(text: str) -> list[list]:
    """Parse ``text`` into a list of top-level forms."""
    stack: list[list] = []
    top: list[list] = []
    last_line, last_col = 1, 1
    for kind, tok, line, col in _tokenize(text):
        last_line, last_col = line, col
        if kind == _PUNCT and tok == "(":
            new: list = []
            if stack:
                stack[-1].append(new)
            else:
                top.append(new)
            stack.append(new)
        elif kind == _PUNCT:
            if not stack:
                raise SexprError("unbalanced ')'", line, col)
            stack.pop()
        else:
            if not stack:
                raise SexprError("atom outside any form", line, col)
            stack[-1].append(tok)
    if stack:
        raise SexprError("unclosed '('", last_line, last_col)
    return top


def is_identifier(value) -> bool:
    return isinstance(value, Sym) and bool(IDENT_RE.match(value))
