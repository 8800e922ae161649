"""
Recursive-descent parser producing an unresolved ``Model``.

Errors inside a block item are recorded and parsing resumes at the next item
keyword (or the closing brace) of the enclosing block, so one run can report
several syntax errors.
"""

from __future__ import annotations

from collections.abc import Callable
from typing import NoReturn

import structlog

from ..diagnostics import Diagnostic, LexError, ParseError
from ..model import (
    ConfigurationSpec,
    ControlRule,
    FeatureDecl,
    GlobalBlock,
    ImplementationDecl,
    InterfaceDecl,
    Literal,
    MemberDecl,
    MemberKind,
    MetaFeaturesModel,
    MethodBody,
    Model,
    Param,
    PredAnd,
    Predicate,
    PredLit,
    PredNot,
    PredOr,
    ProductModel,
    RelationDecl,
    RelationKind,
)
from .lexer import Token, TokenKind, tokenize

logger = structlog.get_logger(__name__)

# Section order inside ``features NAME { ... }``.
_SECTIONS = {"types": 0, "global": 1, "control": 2, "configuration": 3}


class _Failure(Exception):
    def __init__(self, diagnostic: Diagnostic) -> None:
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


def _describe(token: Token) -> str:
    if token.kind is TokenKind.EOF:
        return "end of input"
    if token.kind is TokenKind.BODY:
        return "method body"
    return f"'{token.text}'"


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.index = 0
        self.diagnostics: list[Diagnostic] = []
        self._eof_reported = False

    # Token access

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    @property
    def previous(self) -> Token:
        return self.tokens[max(0, self.index - 1)]

    @property
    def at_end(self) -> bool:
        return self.current.kind is TokenKind.EOF

    def _advance(self) -> Token:
        token = self.current
        if not self.at_end:
            self.index += 1
        return token

    def _fail(self, code: str, expected: str) -> NoReturn:
        token = self.current
        raise _Failure(
            Diagnostic.of(code, f"expected {expected}, found {_describe(token)}", token.span)
        )

    def _expect_punct(self, mark: str, code: str) -> Token:
        if not self.current.is_punct(mark):
            self._fail(code, f"'{mark}'")
        return self._advance()

    def _expect_keyword(self, word: str, code: str) -> Token:
        if not self.current.is_keyword(word):
            self._fail(code, f"'{word}'")
        return self._advance()

    def _expect_ident(self, code: str, what: str = "identifier") -> Token:
        if self.current.kind is not TokenKind.IDENT:
            self._fail(code, what)
        return self._advance()

    def _accept_punct(self, mark: str) -> bool:
        if self.current.is_punct(mark):
            self._advance()
            return True
        return False

    # Recovery

    def _report(self, failure: _Failure) -> None:
        if self.at_end:
            if self._eof_reported:
                return
            self._eof_reported = True
        self.diagnostics.append(failure.diagnostic)

    def _open_braces(self, start: int) -> int:
        """Braces opened and not yet closed by the tokens consumed since ``start``."""
        depth = 0
        for token in self.tokens[start : self.index]:
            if token.is_punct("{"):
                depth += 1
            elif token.is_punct("}"):
                depth -= 1
        return max(depth, 0)

    def _synchronize(self, starters: frozenset[str], depth: int = 0) -> None:
        while not self.at_end:
            token = self.current
            if depth == 0 and (token.is_keyword(*starters) or token.is_punct("}")):
                return
            if token.is_punct("{"):
                depth += 1
            elif token.is_punct("}"):
                depth -= 1
            self._advance()

    def _block(
        self,
        code: str,
        starters: frozenset[str],
        item: Callable[[], None],
    ) -> Token:
        """Parse ``{ item* }`` with per-item recovery; returns the closing brace."""
        self._expect_punct("{", code)
        while not self.current.is_punct("}"):
            if self.at_end:
                self._fail(code, "'}'")
            start = self.index
            try:
                item()
            except _Failure as failure:
                self._report(failure)
                self._synchronize(starters, self._open_braces(start))
                if self.index == start:
                    # The failing item began with a starter; skip it whole.
                    self._advance()
                    self._synchronize(starters)
        return self._advance()

    # Model

    def parse(self) -> Model | None:
        try:
            meta = self._meta_model()
        except _Failure as failure:
            self._report(failure)
            return None
        product = None
        if self.current.is_keyword("product"):
            try:
                product = self._product_model()
            except _Failure as failure:
                self._report(failure)
                return None
        if not self.at_end:
            self.diagnostics.append(
                Diagnostic.of(
                    "E0112",
                    f"unexpected {_describe(self.current)} after the model",
                    self.current.span,
                )
            )
        return Model(meta=meta, product=product)

    def _meta_model(self) -> MetaFeaturesModel:
        start = self._expect_keyword("features", "E0101")
        name = self._expect_ident("E0101", "feature model name").text
        features: list[FeatureDecl] = []
        relations: list[RelationDecl] = []
        global_features: list[FeatureDecl] = []
        global_rules: list[ControlRule] = []
        control: list[ControlRule] = []
        configurations: list[ConfigurationSpec] = []
        stage = -1

        def section() -> None:
            nonlocal stage
            token = self.current
            order = _SECTIONS.get(token.text) if token.kind is TokenKind.KEYWORD else None
            if order is None:
                self._fail("E0101", "'types', 'global', 'control' or 'configuration'")
            if stage < 0 and order != 0:
                self._fail("E0101", "'types'")
            if order < stage or (order == stage and order != 3):
                self._fail("E0101", "sections in order types, global, control, configuration")
            stage = order
            if order == 0:
                self._types_block(features, relations)
            elif order == 1:
                self._global_block(global_features, global_rules)
            elif order == 2:
                self._control_block(control)
            else:
                configurations.append(self._configuration())

        end = self._block("E0101", frozenset(_SECTIONS), section)
        if stage < 0:
            self.diagnostics.append(
                Diagnostic.of("E0101", "expected 'types' block", end.span)
            )
        return MetaFeaturesModel(
            name=name,
            features=tuple(features),
            relations=tuple(relations),
            global_block=GlobalBlock(tuple(global_features), tuple(global_rules)),
            control=tuple(control),
            configurations=tuple(configurations),
            span=start.span.to(end.span),
        )

    def _types_block(
        self, features: list[FeatureDecl], relations: list[RelationDecl]
    ) -> None:
        self._advance()

        def item() -> None:
            if self.current.is_keyword("feature"):
                features.append(self._feature())
            elif self.current.is_keyword("relation"):
                relations.append(self._relation())
            else:
                self._fail("E0101", "'feature' or 'relation'")

        self._block("E0101", frozenset({"feature", "relation"}), item)

    def _global_block(
        self, features: list[FeatureDecl], rules: list[ControlRule]
    ) -> None:
        self._advance()

        def item() -> None:
            if self.current.is_keyword("feature"):
                features.append(self._feature())
            elif self.current.kind is TokenKind.IDENT:
                rules.append(self._rule())
            else:
                self._fail("E0101", "'feature' or a rule")

        self._block("E0101", frozenset({"feature"}), item)

    def _control_block(self, rules: list[ControlRule]) -> None:
        self._advance()
        self._block("E0105", frozenset(), lambda: rules.append(self._rule()))

    def _feature(self) -> FeatureDecl:
        start = self._expect_keyword("feature", "E0102")
        name = self._expect_ident("E0102", "feature name")
        self._expect_punct("=", "E0102")
        open_brace = self._expect_punct("{", "E0102")
        if self.current.is_punct("}"):
            close = self._advance()
            raise _Failure(
                Diagnostic.of(
                    "E0103",
                    f"feature '{name.text}' declares an empty value set",
                    open_brace.span.to(close.span),
                )
            )
        value_tokens = [self._expect_ident("E0102", "feature value")]
        while self._accept_punct(","):
            value_tokens.append(self._expect_ident("E0102", "feature value"))
        self._expect_punct("}", "E0102")
        associations: list[str] = []
        if self.current.is_keyword("assoc"):
            self._advance()
            self._expect_punct("(", "E0102")
            associations.append(self._expect_ident("E0102", "feature name").text)
            while self._accept_punct(","):
                associations.append(self._expect_ident("E0102", "feature name").text)
            self._expect_punct(")", "E0102")

        values: list[str] = []
        for token in value_tokens:
            if token.text in values:
                self.diagnostics.append(
                    Diagnostic.of(
                        "E0110",
                        f"value '{token.text}' repeated in feature '{name.text}'",
                        token.span,
                    )
                )
                continue
            if token.text == name.text:
                self.diagnostics.append(
                    Diagnostic.of(
                        "E0111",
                        f"feature '{name.text}' lists its own name as a value",
                        token.span,
                    )
                )
            values.append(token.text)
        return FeatureDecl(
            name=name.text,
            values=tuple(values),
            associations=tuple(associations),
            span=start.span.to(self.previous.span),
        )

    def _relation(self) -> RelationDecl:
        start = self._expect_keyword("relation", "E0104")
        name = self._expect_ident("E0104", "relation name").text
        if self._accept_punct("="):
            target = self.current
            if target.kind is not TokenKind.IDENT or target.text not in (
                RelationKind.REQUIRES.value,
                RelationKind.EXCLUDES.value,
            ):
                self._fail("E0104", "'requires' or 'excludes'")
            self._advance()
            semantics: RelationKind | None = RelationKind(target.text)
        else:
            builtin = {kind.value for kind in RelationKind}
            semantics = RelationKind(name) if name in builtin else None
        return RelationDecl(name, semantics, start.span.to(self.previous.span))

    def _literal(self, code: str) -> Literal:
        feature = self._expect_ident(code, "feature name")
        self._expect_punct(".", code)
        value = self._expect_ident(code, "feature value")
        return Literal(feature.text, value.text, feature.span.to(value.span))

    def _rule(self) -> ControlRule:
        lhs = self._literal("E0105")
        relation = self._expect_ident("E0105", "relation name").text
        rhs = self._literal("E0105")
        return ControlRule(lhs, relation, rhs, lhs.span.to(rhs.span))

    def _configuration(self) -> ConfigurationSpec:
        start = self._expect_keyword("configuration", "E0106")
        name = self._expect_ident("E0106", "configuration name").text
        self._expect_punct("{", "E0106")

        def literals() -> tuple[Literal, ...]:
            self._advance()
            items = [self._literal("E0106")]
            while self._accept_punct(","):
                items.append(self._literal("E0106"))
            return tuple(items)

        required = literals() if self.current.is_keyword("require") else ()
        discarded = literals() if self.current.is_keyword("discard") else ()
        end = self._expect_punct("}", "E0106")
        return ConfigurationSpec(name, required, discarded, start.span.to(end.span))

    # Predicates: not > and > or, left-associative

    def _predicate(self) -> Predicate:
        left = self._conjunction()
        while self.current.is_keyword("or"):
            self._advance()
            left = PredOr(left, self._conjunction())
        return left

    def _conjunction(self) -> Predicate:
        left = self._unary()
        while self.current.is_keyword("and"):
            self._advance()
            left = PredAnd(left, self._unary())
        return left

    def _unary(self) -> Predicate:
        if self.current.is_keyword("not"):
            self._advance()
            return PredNot(self._unary())
        if self._accept_punct("("):
            inner = self._predicate()
            self._expect_punct(")", "E0108")
            return inner
        if self.current.kind is not TokenKind.IDENT:
            self._fail("E0108", "literal, 'not' or '('")
        return PredLit(self._literal("E0108"))

    # Product model

    def _product_model(self) -> ProductModel:
        start = self._expect_keyword("product", "E0101")
        name = self._expect_ident("E0101", "product model name").text
        interfaces: list[InterfaceDecl] = []
        implementations: list[ImplementationDecl] = []

        def item() -> None:
            if self.current.is_keyword("interface"):
                interfaces.append(self._interface())
            elif self.current.is_keyword("implementation"):
                implementations.append(self._implementation())
            else:
                self._fail("E0101", "'interface' or 'implementation'")

        end = self._block("E0101", frozenset({"interface", "implementation"}), item)
        return ProductModel(
            name, tuple(interfaces), tuple(implementations), start.span.to(end.span)
        )

    def _interface(self) -> InterfaceDecl:
        start = self._expect_keyword("interface", "E0107")
        name = self._expect_ident("E0107", "interface name").text
        used: list[str] = []
        if self.current.is_keyword("features"):
            self._advance()
            self._expect_punct("(", "E0107")
            used.append(self._expect_ident("E0107", "feature name").text)
            while self._accept_punct(","):
                used.append(self._expect_ident("E0107", "feature name").text)
            self._expect_punct(")", "E0107")
        inherent: list[FeatureDecl] = []
        if self.current.is_keyword("inherent"):
            self._advance()
            self._block(
                "E0107",
                frozenset({"feature"}),
                lambda: inherent.append(self._feature()),
            )
        members: list[MemberDecl] = []
        end = self._block(
            "E0107",
            frozenset({"attr", "method"}),
            lambda: members.append(self._member()),
        )
        return InterfaceDecl(
            name, tuple(used), tuple(inherent), tuple(members), start.span.to(end.span)
        )

    def _member(self) -> MemberDecl:
        start = self.current
        params: list[Param] = []
        if start.is_keyword("attr"):
            self._advance()
            kind = MemberKind.ATTRIBUTE
            name = self._expect_ident("E0107", "attribute name").text
            self._expect_punct(":", "E0107")
            type_text: str | None = self._expect_ident("E0107", "type").text
        elif start.is_keyword("method"):
            self._advance()
            kind = MemberKind.METHOD
            name = self._expect_ident("E0107", "method name").text
            self._expect_punct("(", "E0107")
            if not self.current.is_punct(")"):
                params.append(self._param())
                while self._accept_punct(","):
                    params.append(self._param())
            self._expect_punct(")", "E0107")
            type_text = None
            if self._accept_punct(":"):
                type_text = self._expect_ident("E0107", "return type").text
        else:
            self._fail("E0107", "'attr' or 'method'")
        guard = None
        if self.current.is_keyword("when"):
            self._advance()
            guard = self._predicate()
        return MemberDecl(
            kind, name, type_text, tuple(params), guard, start.span.to(self.previous.span)
        )

    def _param(self) -> Param:
        name = self._expect_ident("E0107", "parameter name").text
        self._expect_punct(":", "E0107")
        return Param(name, self._expect_ident("E0107", "parameter type").text)

    def _implementation(self) -> ImplementationDecl:
        start = self._expect_keyword("implementation", "E0109")
        name = self._expect_ident("E0109", "implementation name").text
        self._expect_keyword("realizes", "E0109")
        realizes = self._expect_ident("E0109", "interface name").text
        self._expect_keyword("when", "E0109")
        when = self._predicate()
        bodies: list[MethodBody] = []

        def body() -> None:
            keyword = self._expect_keyword("method", "E0109")
            method = self._expect_ident("E0109", "method name").text
            self._expect_punct("{", "E0109")
            if self.current.kind is not TokenKind.BODY:
                self._fail("E0109", "method body")
            text = self._advance().text
            end = self._expect_punct("}", "E0109")
            bodies.append(MethodBody(method, text, keyword.span.to(end.span)))

        end = self._block("E0109", frozenset({"method"}), body)
        return ImplementationDecl(
            name, realizes, when, tuple(bodies), start.span.to(end.span)
        )


def parse_model(source: str, file: str = "<input>") -> Model:
    """
    Parse TDM source text into an unresolved ``Model`` mirroring source order.

    Raises ``ParseError`` with every lexical and syntax diagnostic found.
    """
    try:
        tokens = tokenize(source, file)
    except LexError as exc:
        raise ParseError(exc.diagnostics) from exc
    parser = _Parser(tokens)
    model = parser.parse()
    if model is None or parser.diagnostics:
        logger.debug("parse failed", file=file, errors=len(parser.diagnostics))
        raise ParseError(parser.diagnostics)
    logger.debug(
        "parse finished",
        file=file,
        features=len(model.meta.features),
        interfaces=len(model.interfaces),
    )
    return model
