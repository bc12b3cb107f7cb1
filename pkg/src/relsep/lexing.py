"""Shared tokenizer for the object language and the logic/script grammars."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

PUNCT = [
    ":=", "|->", "<=", ">=", "!=", "&&", "||", "->", "=>", "..",
    "(", ")", "{", "}", "[", "]", "<", ">", "=", "+", "-", "*",
    ",", ";", ":", "!", "@", "|", ".",
]


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{msg} (line {line}, column {col})" if line else msg)


@dataclass(frozen=True)
class Token:
    kind: str  # 'int' | 'ident' | 'punct' | 'string' | 'eof'
    text: str
    line: int
    col: int


def tokenize(source: str) -> List[Token]:
    toks: List[Token] = []
    i = 0
    line, col = 1, 1
    n = len(source)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                advance(1)
            continue
        if ch.isdigit():
            start, l0, c0 = i, line, col
            while i < n and source[i].isdigit():
                advance(1)
            toks.append(Token("int", source[start:i], l0, c0))
            continue
        if ch.isalpha() or ch == "_":
            start, l0, c0 = i, line, col
            while i < n and (source[i].isalnum() or source[i] == "_"):
                advance(1)
            toks.append(Token("ident", source[start:i], l0, c0))
            continue
        if ch == '"':
            l0, c0 = line, col
            advance(1)
            start = i
            while i < n and source[i] != '"':
                advance(1)
            if i >= n:
                raise ParseError("unterminated string", l0, c0)
            toks.append(Token("string", source[start:i], l0, c0))
            advance(1)
            continue
        for p in PUNCT:
            if source.startswith(p, i):
                toks.append(Token("punct", p, line, col))
                advance(len(p))
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class TokenStream:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.peek()
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.text == text and t.kind in ("punct", "ident")

    def at_kind(self, kind: str) -> bool:
        return self.peek().kind == kind

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        t = self.peek()
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def expect_kind(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {kind}, found {t.text!r}", t.line, t.col)
        return self.next()

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.line, t.col)
