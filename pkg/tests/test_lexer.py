"""Tests for the tokenizer."""

import pytest

from tdm.diagnostics import LexError
from tdm.frontend import TokenKind, format_token, tokenize


def kinds_and_texts(source: str) -> list[tuple[TokenKind, str]]:
    return [(t.kind, t.text) for t in tokenize(source)]


class TestTokenize:
    """Test token classification and positions."""

    def test_minimal_model(self):
        """Seven tokens plus end-of-input."""
        tokens = tokenize("features F { types { } }")
        assert len(tokens) == 8
        assert [t.text for t in tokens[:-1]] == [
            "features",
            "F",
            "{",
            "types",
            "{",
            "}",
            "}",
        ]
        assert tokens[-1].kind is TokenKind.EOF

    def test_positions_are_one_based(self):
        tokens = tokenize("features F { types { } }")
        assert [(t.span.line_start, t.span.col_start) for t in tokens] == [
            (1, 1),
            (1, 10),
            (1, 12),
            (1, 14),
            (1, 20),
            (1, 22),
            (1, 24),
            (1, 25),
        ]
        assert tokens[0].span.col_end == 9

    def test_keywords_and_identifiers(self):
        assert kinds_and_texts("feature Allocation requires excludes when")[:-1] == [
            (TokenKind.KEYWORD, "feature"),
            (TokenKind.IDENT, "Allocation"),
            (TokenKind.IDENT, "requires"),
            (TokenKind.IDENT, "excludes"),
            (TokenKind.KEYWORD, "when"),
        ]

    def test_comments_and_whitespace_skipped(self):
        tokens = tokenize("// heading\n\t features  // trailing\nF")
        assert [t.text for t in tokens[:-1]] == ["features", "F"]
        assert tokens[0].span.line_start == 2
        assert tokens[0].span.col_start == 3
        assert tokens[1].span.line_start == 3

    def test_file_name_in_spans(self):
        assert tokenize("F", "corpus/set.tdm")[0].span.file == "corpus/set.tdm"

    def test_empty_source(self):
        tokens = tokenize("")
        assert len(tokens) == 1
        assert tokens[0].kind is TokenKind.EOF


class TestMethodBodies:
    """Test opaque capture of method bodies inside implementations."""

    def test_body_captured_verbatim(self):
        source = "implementation X realizes I when A.a {\n  method m { if (x) { y } }\n}"
        tokens = tokenize(source)
        bodies = [t for t in tokens if t.kind is TokenKind.BODY]
        assert len(bodies) == 1
        assert bodies[0].text == " if (x) { y } "
        assert tokens[-3].text == "}"
        assert tokens[-2].text == "}"

    def test_empty_body(self):
        tokens = tokenize("implementation X realizes I when A.a { method m {} }")
        bodies = [t for t in tokens if t.kind is TokenKind.BODY]
        assert [b.text for b in bodies] == [""]

    def test_body_may_contain_illegal_characters(self):
        tokens = tokenize("implementation X realizes I when A.a { method m {$x = 1;} }")
        assert any(t.kind is TokenKind.BODY and t.text == "$x = 1;" for t in tokens)

    def test_interface_methods_are_not_bodies(self):
        tokens = tokenize("interface I { method m() }")
        assert all(t.kind is not TokenKind.BODY for t in tokens)

    def test_unclosed_body(self):
        with pytest.raises(LexError) as excinfo:
            tokenize("implementation X realizes I when A.a {\n  method m { oops")
        diagnostic = excinfo.value.diagnostics[0]
        assert diagnostic.code == "E0001"
        assert (diagnostic.span.line_start, diagnostic.span.col_start) == (2, 12)


class TestIllegalCharacters:
    def test_every_illegal_character_reported(self):
        with pytest.raises(LexError) as excinfo:
            tokenize("features # F @")
        diagnostics = excinfo.value.diagnostics
        assert [d.code for d in diagnostics] == ["E0002", "E0002"]
        assert [d.span.col_start for d in diagnostics] == [10, 14]


class TestFormatToken:
    def test_trace_line(self):
        tokens = tokenize("features F")
        assert format_token(tokens[0]) == "1:1 keyword 'features'"
        assert format_token(tokens[1]) == "1:10 identifier 'F'"
        assert format_token(tokens[2]) == "1:11 end-of-input ''"
