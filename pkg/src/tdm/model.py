"""
Immutable value model of a parsed TDM source.

Every type here is a frozen dataclass holding tuples, so a model is safe to
share between threads and can be compared structurally. Source spans are
carried for diagnostics but excluded from equality, which lets a model parsed
from pretty-printed text compare equal to the model it was printed from.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum

# Feature name -> chosen value. A complete, valid assignment is a configuration.
Assignment = Mapping[str, str]


@dataclass(frozen=True, order=True)
class SourceSpan:
    """A 1-based region of a source file; ``col_end`` is exclusive."""

    file: str
    line_start: int
    col_start: int
    line_end: int
    col_end: int

    def __post_init__(self) -> None:
        if min(self.line_start, self.col_start, self.line_end, self.col_end) < 1:
            raise ValueError(f"span positions are 1-based: {self}")
        if (self.line_start, self.col_start) > (self.line_end, self.col_end):
            raise ValueError(f"span starts after it ends: {self}")

    @classmethod
    def unknown(cls, file: str = "<model>") -> SourceSpan:
        """Span for values built in memory rather than parsed."""
        return cls(file, 1, 1, 1, 1)

    def to(self, other: SourceSpan) -> SourceSpan:
        """Span covering ``self`` through ``other``."""
        return SourceSpan(
            self.file, self.line_start, self.col_start, other.line_end, other.col_end
        )


def _span() -> SourceSpan:
    return field(default_factory=SourceSpan.unknown, compare=False, repr=False)


class RelationKind(str, Enum):
    """The two relation behaviours a declared relation can be bound to."""

    REQUIRES = "requires"
    EXCLUDES = "excludes"


class MemberKind(str, Enum):
    ATTRIBUTE = "attribute"
    METHOD = "method"


@dataclass(frozen=True)
class FeatureDecl:
    """A typed feature: its name, value domain and associated features."""

    name: str
    values: tuple[str, ...]
    associations: tuple[str, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class RelationDecl:
    """A declared relation name; ``semantics`` is None when it has no builtin meaning."""

    name: str
    semantics: RelationKind | None
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Literal:
    feature: str
    value: str
    span: SourceSpan = _span()

    def __str__(self) -> str:
        return f"{self.feature}.{self.value}"

    @property
    def value_span(self) -> SourceSpan:
        """Span of the value identifier, which always ends the literal."""
        start = self.span.col_end - len(self.value)
        if start < 1:
            return self.span
        span = self.span
        return SourceSpan(span.file, span.line_end, start, span.line_end, span.col_end)


@dataclass(frozen=True)
class ControlRule:
    """``lhs <relation> rhs``; ``relation`` is resolved by the checker."""

    lhs: Literal
    relation: str
    rhs: Literal
    span: SourceSpan = _span()

    def __str__(self) -> str:
        return f"{self.lhs} {self.relation} {self.rhs}"


@dataclass(frozen=True)
class GlobalBlock:
    features: tuple[FeatureDecl, ...] = ()
    rules: tuple[ControlRule, ...] = ()


@dataclass(frozen=True)
class ConfigurationSpec:
    """A partial configuration: literals that must hold and literals to avoid."""

    name: str
    required: tuple[Literal, ...] = ()
    discarded: tuple[Literal, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class MetaFeaturesModel:
    """The feature side of a model: types, global, control and configurations."""

    name: str
    features: tuple[FeatureDecl, ...] = ()
    relations: tuple[RelationDecl, ...] = ()
    global_block: GlobalBlock = GlobalBlock()
    control: tuple[ControlRule, ...] = ()
    configurations: tuple[ConfigurationSpec, ...] = ()
    span: SourceSpan = _span()

    @property
    def rules(self) -> tuple[ControlRule, ...]:
        """Control rules followed by global rules."""
        return self.control + self.global_block.rules


# Predicates


@dataclass(frozen=True)
class PredLit:
    literal: Literal


@dataclass(frozen=True)
class PredAnd:
    left: Predicate
    right: Predicate


@dataclass(frozen=True)
class PredOr:
    left: Predicate
    right: Predicate


@dataclass(frozen=True)
class PredNot:
    child: Predicate


Predicate = PredLit | PredAnd | PredOr | PredNot


def predicate_literals(predicate: Predicate) -> Iterator[Literal]:
    """Yield the literals of a predicate, left to right."""
    match predicate:
        case PredLit(literal):
            yield literal
        case PredAnd(left, right) | PredOr(left, right):
            yield from predicate_literals(left)
            yield from predicate_literals(right)
        case PredNot(child):
            yield from predicate_literals(child)


# Product side


@dataclass(frozen=True)
class Param:
    name: str
    type_text: str


@dataclass(frozen=True)
class MemberDecl:
    """An attribute or method of a class interface, optionally feature-guarded."""

    kind: MemberKind
    name: str
    type_text: str | None = None
    params: tuple[Param, ...] = ()
    guard: Predicate | None = None
    span: SourceSpan = _span()

    @property
    def signature(self) -> str:
        if self.kind is MemberKind.ATTRIBUTE:
            return f"{self.name}: {self.type_text}"
        params = ", ".join(f"{p.name}: {p.type_text}" for p in self.params)
        result = f": {self.type_text}" if self.type_text else ""
        return f"{self.name}({params}){result}"


@dataclass(frozen=True)
class InterfaceDecl:
    name: str
    used_features: tuple[str, ...] = ()
    inherent_features: tuple[FeatureDecl, ...] = ()
    members: tuple[MemberDecl, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class MethodBody:
    """Verbatim body text of one method; never interpreted."""

    method: str
    text: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ImplementationDecl:
    name: str
    realizes: str
    when: Predicate
    bodies: tuple[MethodBody, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ProductModel:
    name: str
    interfaces: tuple[InterfaceDecl, ...] = ()
    implementations: tuple[ImplementationDecl, ...] = ()
    span: SourceSpan = _span()

    def implementations_of(self, interface: str) -> tuple[ImplementationDecl, ...]:
        return tuple(i for i in self.implementations if i.realizes == interface)


@dataclass(frozen=True)
class Model:
    meta: MetaFeaturesModel
    product: ProductModel | None = None

    @property
    def interfaces(self) -> tuple[InterfaceDecl, ...]:
        return self.product.interfaces if self.product else ()

    @property
    def implementations(self) -> tuple[ImplementationDecl, ...]:
        return self.product.implementations if self.product else ()


def feature_lookup(model: Model, name: str) -> FeatureDecl | None:
    """
    Find a feature by name.

    Domain features are searched first, then global features, then each
    interface's inherent features in declaration order. Works on resolved and
    unresolved models alike.
    """
    for decl in model.meta.features:
        if decl.name == name:
            return decl
    for decl in model.meta.global_block.features:
        if decl.name == name:
            return decl
    for iface in model.interfaces:
        for decl in iface.inherent_features:
            if decl.name == name:
                return decl
    return None


def visible_features(model: Model, iface: InterfaceDecl) -> list[FeatureDecl]:
    """Features an interface may mention: used, then global, then inherent."""
    domain = {decl.name: decl for decl in model.meta.features}
    visible: list[FeatureDecl] = []
    seen: set[str] = set()
    candidates = [domain[name] for name in iface.used_features if name in domain]
    candidates += model.meta.global_block.features
    candidates += iface.inherent_features
    for decl in candidates:
        if decl.name not in seen:
            seen.add(decl.name)
            visible.append(decl)
    return visible
