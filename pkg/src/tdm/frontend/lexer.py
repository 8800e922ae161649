"""
Tokenizer for TDM source text.

Method bodies inside ``implementation`` blocks are not tokenized: the text
between the braces of ``method name { ... }`` is captured verbatim as a single
opaque-body token, with nested braces balanced.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

import structlog

from ..diagnostics import Diagnostic, LexError
from ..model import SourceSpan

logger = structlog.get_logger(__name__)


class TokenKind(str, Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    PUNCT = "punctuation"
    BODY = "opaque-body"
    EOF = "end-of-input"


KEYWORDS = frozenset(
    {
        "features",
        "types",
        "feature",
        "assoc",
        "relation",
        "global",
        "control",
        "configuration",
        "require",
        "discard",
        "product",
        "interface",
        "inherent",
        "attr",
        "method",
        "when",
        "not",
        "and",
        "or",
        "implementation",
        "realizes",
    }
)

PUNCTUATION = frozenset("{}(),.=:")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_WHITESPACE = frozenset(" \t\r\n\f\v")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan

    def is_keyword(self, *words: str) -> bool:
        return self.kind is TokenKind.KEYWORD and self.text in words

    def is_punct(self, *marks: str) -> bool:
        return self.kind is TokenKind.PUNCT and self.text in marks


class _Lexer:
    def __init__(self, source: str, file: str) -> None:
        self.source = source
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []
        self.diagnostics: list[Diagnostic] = []
        # Brace depth, and the depth inside the implementation block being lexed.
        self.depth = 0
        self.impl_pending = False
        self.impl_depth: int | None = None

    def _advance(self, count: int) -> None:
        for char in self.source[self.pos : self.pos + count]:
            if char == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += count

    def _emit(self, kind: TokenKind, text: str) -> Token:
        line, col = self.line, self.col
        self._advance(len(text))
        token = Token(kind, text, SourceSpan(self.file, line, col, self.line, self.col))
        self.tokens.append(token)
        return token

    def _opens_body(self) -> bool:
        """True when the tokens so far end in ``method IDENT`` inside an implementation."""
        if self.impl_depth is None or self.depth != self.impl_depth:
            return False
        if len(self.tokens) < 2:
            return False
        keyword, name = self.tokens[-2], self.tokens[-1]
        return keyword.is_keyword("method") and name.kind is TokenKind.IDENT

    def _capture_body(self, brace: Token) -> bool:
        nesting = 1
        end = self.pos
        while end < len(self.source):
            char = self.source[end]
            if char == "{":
                nesting += 1
            elif char == "}":
                nesting -= 1
                if nesting == 0:
                    self._emit(TokenKind.BODY, self.source[self.pos : end])
                    return True
            end += 1
        self.diagnostics.append(
            Diagnostic.of("E0001", "method body block is never closed", brace.span)
        )
        self._advance(len(self.source) - self.pos)
        return False

    def _punct(self, char: str) -> None:
        opens_body = char == "{" and self._opens_body()
        token = self._emit(TokenKind.PUNCT, char)
        if char == "{":
            self.depth += 1
            if self.impl_pending:
                self.impl_pending = False
                self.impl_depth = self.depth
            if opens_body:
                self._capture_body(token)
        elif char == "}":
            if self.impl_depth is not None and self.depth == self.impl_depth:
                self.impl_depth = None
            self.depth = max(0, self.depth - 1)

    def run(self) -> list[Token]:
        source = self.source
        while self.pos < len(source):
            char = source[self.pos]
            if char in _WHITESPACE:
                self._advance(1)
            elif source.startswith("//", self.pos):
                newline = source.find("\n", self.pos)
                stop = len(source) if newline < 0 else newline
                self._advance(stop - self.pos)
            elif match := _IDENT.match(source, self.pos):
                word = match.group()
                kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
                self._emit(kind, word)
                if word == "implementation":
                    self.impl_pending = True
            elif char in PUNCTUATION:
                self._punct(char)
            else:
                span = SourceSpan(
                    self.file, self.line, self.col, self.line, self.col + 1
                )
                self.diagnostics.append(
                    Diagnostic.of("E0002", f"illegal character {char!r}", span)
                )
                self._advance(1)
        self.tokens.append(
            Token(
                TokenKind.EOF,
                "",
                SourceSpan(self.file, self.line, self.col, self.line, self.col),
            )
        )
        return self.tokens


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """
    Split TDM source into tokens ending with an end-of-input token.

    ``//`` comments and whitespace are skipped. Raises ``LexError`` carrying
    every E0001/E0002 diagnostic found.
    """
    lexer = _Lexer(source, file)
    tokens = lexer.run()
    if lexer.diagnostics:
        logger.debug("tokenize failed", file=file, errors=len(lexer.diagnostics))
        raise LexError(lexer.diagnostics)
    logger.debug("tokenize finished", file=file, tokens=len(tokens))
    return tokens


def format_token(token: Token) -> str:
    """One trace line: ``line:col kind text``."""
    return (
        f"{token.span.line_start}:{token.span.col_start} "
        f"{token.kind.value} {token.text!r}"
    )
