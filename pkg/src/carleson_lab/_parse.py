"""Tiny recursive-descent helpers shared by the spec-string grammars."""

from __future__ import annotations

import re

_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class SpecError(ValueError):
    """A spec string failed to parse; ``pos`` is the 0-based offending offset."""

    def __init__(self, text: str, pos: int, msg: str):
        self.text, self.pos, self.msg = text, pos, msg
        super().__init__(msg)

    def __str__(self):
        caret = " " * (self.pos + 1) + "^"
        return f"{self.msg} at position {self.pos}\n  {self.text!r}\n  {caret}"


class Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str, pos: int | None = None) -> SpecError:
        return SpecError(self.text, self.pos if pos is None else pos, msg)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def accept(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.accept(ch):
            got = self.peek() or "end of input"
            raise self.error(f"expected {ch!r}, got {got!r}")

    def ident(self) -> str:
        self.skip_ws()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            raise self.error("expected a name")
        self.pos = m.end()
        return m.group(0)

    def number(self) -> float:
        self.skip_ws()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            raise self.error("expected a number")
        self.pos = m.end()
        return float(m.group(0))

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def finish(self):
        if not self.at_end():
            raise self.error("unexpected trailing input")
