"""
Textual frontend: tokenizer, parser and canonical printer for ``.tdm`` sources.
"""

from .lexer import Token, TokenKind, format_token, tokenize
from .parser import parse_model
from .printer import format_predicate, pretty_print

__all__ = [
    "Token",
    "TokenKind",
    "format_predicate",
    "format_token",
    "parse_model",
    "pretty_print",
    "tokenize",
]
