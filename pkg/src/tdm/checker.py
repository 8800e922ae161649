"""
Semantic checker: name resolution and the feature meta-model rules.

``check`` never raises for problems in the model; every finding becomes a
diagnostic, and the returned ``ResolvedModel`` is certified only when none of
them is an error. The engine and the release generator refuse uncertified
models.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from types import MappingProxyType

import structlog

from .diagnostics import (
    Diagnostic,
    Severity,
    UncertifiedModelError,
    has_errors,
    sort_diagnostics,
)
from .model import (
    ConfigurationSpec,
    ControlRule,
    FeatureDecl,
    ImplementationDecl,
    InterfaceDecl,
    Literal,
    MemberKind,
    Model,
    RelationKind,
    SourceSpan,
    predicate_literals,
    visible_features,
)

logger = structlog.get_logger(__name__)

DOMAIN = "domain"
GLOBAL = "global"


@dataclass(frozen=True)
class SymbolTable:
    """Name -> declaration maps for every scope of a model."""

    # Keyed by assignment key: the plain name, or ``Interface.name`` for an
    # inherent feature whose name is not unique in the model.
    features: Mapping[str, FeatureDecl]
    # Assignment key -> "domain", "global" or the owning interface name.
    scopes: Mapping[str, str]
    relations: Mapping[str, RelationKind]
    interfaces: Mapping[str, InterfaceDecl]
    implementations: Mapping[str, ImplementationDecl]
    configurations: Mapping[str, ConfigurationSpec]
    # (interface, inherent feature name) -> assignment key.
    inherent_keys: Mapping[tuple[str, str], str] = MappingProxyType({})


@dataclass(frozen=True, eq=False)
class ResolvedModel:
    model: Model
    symbols: SymbolTable
    diagnostics: tuple[Diagnostic, ...]
    certified: bool

    @property
    def errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.ERROR)

    @property
    def warnings(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.WARNING)

    def relation_kind(self, rule: ControlRule) -> RelationKind:
        return self.symbols.relations[rule.relation]

    def feature_key(self, iface: str, name: str) -> str:
        """Assignment key of the feature ``name`` as seen from interface ``iface``."""
        return self.symbols.inherent_keys.get((iface, name), name)

    def interface_view(
        self, iface: InterfaceDecl, assignment: Mapping[str, str]
    ) -> dict[str, str]:
        """
        The assignment as one interface's predicates read it.

        Qualified inherent keys of ``iface`` are exposed under their bare
        feature names, shadowing any unused domain feature of the same name.
        """
        view = dict(assignment)
        for (owner, name), key in self.symbols.inherent_keys.items():
            if owner == iface.name and key in assignment:
                view[name] = assignment[key]
        return view

    def require_certified(self) -> None:
        """Raise ``UncertifiedModelError`` unless the model passed ``check``."""
        if not self.certified:
            raise UncertifiedModelError.single(
                "E0400",
                f"model '{self.model.meta.name}' has {len(self.errors)} error(s) "
                "and cannot be configured",
                self.model.meta.span,
            )


def _same_feature_note(rule: ControlRule, kind: RelationKind) -> str:
    same_value = rule.lhs.value == rule.rhs.value
    if kind is RelationKind.REQUIRES:
        effect = "always holds" if same_value else f"makes {rule.lhs} unselectable"
    else:
        effect = f"makes {rule.lhs} unselectable" if same_value else "always holds"
    return f"rule '{rule}' relates feature '{rule.lhs.feature}' to itself and {effect}"


class _Checker:
    def __init__(self, model: Model) -> None:
        self.model = model
        self.diagnostics: list[Diagnostic] = []
        self.features: dict[str, FeatureDecl] = {}
        self.scopes: dict[str, str] = {}
        # Domain and global features by name.
        self.named: dict[str, FeatureDecl] = {}
        self.inherent: dict[str, dict[str, FeatureDecl]] = {}
        self.inherent_keys: dict[tuple[str, str], str] = {}
        # Inherent feature name -> interfaces declaring it.
        self.owners: dict[str, list[str]] = {}
        self.relations: dict[str, RelationKind] = {
            kind.value: kind for kind in RelationKind
        }
        self.interfaces: dict[str, InterfaceDecl] = {}
        self.implementations: dict[str, ImplementationDecl] = {}
        self.configurations: dict[str, ConfigurationSpec] = {}
        self.used_values: set[tuple[str, str]] = set()

    def _emit(self, code: str, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(Diagnostic.of(code, message, span))

    def run(self) -> ResolvedModel:
        meta = self.model.meta
        self._declare_features(meta.features, DOMAIN)
        self._declare_features(meta.global_block.features, GLOBAL)
        self._declare_inherent()
        self._declare_relations()
        self._check_associations()
        for rule in meta.rules:
            self._check_rule(rule)
        for spec in meta.configurations:
            self._check_configuration(spec)
        for iface in self.model.interfaces:
            self._check_interface(iface)
        for impl in self.model.implementations:
            self._check_implementation(impl)
        self._check_unused_values()
        self._check_association_rules()

        diagnostics = sort_diagnostics(self.diagnostics)
        symbols = SymbolTable(
            features=MappingProxyType(self.features),
            scopes=MappingProxyType(self.scopes),
            relations=MappingProxyType(self.relations),
            interfaces=MappingProxyType(self.interfaces),
            implementations=MappingProxyType(self.implementations),
            configurations=MappingProxyType(self.configurations),
            inherent_keys=MappingProxyType(self.inherent_keys),
        )
        return ResolvedModel(
            self.model, symbols, diagnostics, certified=not has_errors(diagnostics)
        )

    # Declarations

    def _declare_features(self, decls: Iterable[FeatureDecl], scope: str) -> None:
        for decl in decls:
            if decl.name in self.named:
                owner = self.scopes[decl.name]
                self._emit(
                    "E0203",
                    f"feature '{decl.name}' is already declared ({owner})",
                    decl.span,
                )
                continue
            self.named[decl.name] = decl
            self.features[decl.name] = decl
            self.scopes[decl.name] = scope

    def _declare_inherent(self) -> None:
        for iface in self.model.interfaces:
            if iface.name in self.inherent:
                # Duplicate interface; reported as E0210 later.
                continue
            own: dict[str, FeatureDecl] = {}
            for decl in iface.inherent_features:
                scope = self.scopes.get(decl.name)
                if decl.name in own:
                    clash: str | None = iface.name
                elif scope == GLOBAL:
                    clash = GLOBAL
                elif scope == DOMAIN and decl.name in iface.used_features:
                    clash = DOMAIN
                else:
                    clash = None
                if clash is not None:
                    self._emit(
                        "E0203",
                        f"feature '{decl.name}' is already declared ({clash})",
                        decl.span,
                    )
                    continue
                own[decl.name] = decl
                self.owners.setdefault(decl.name, []).append(iface.name)
            self.inherent[iface.name] = own

        for owner, own in self.inherent.items():
            for name, decl in own.items():
                unique = len(self.owners[name]) == 1 and name not in self.named
                key = name if unique else f"{owner}.{name}"
                self.inherent_keys[(owner, name)] = key
                self.features[key] = decl
                self.scopes[key] = owner

    def _declare_relations(self) -> None:
        declared: set[str] = set()
        for decl in self.model.meta.relations:
            if decl.name in declared:
                self._emit(
                    "E0210", f"relation '{decl.name}' is declared twice", decl.span
                )
                continue
            declared.add(decl.name)
            if decl.semantics is None:
                self.relations.pop(decl.name, None)
            else:
                self.relations[decl.name] = decl.semantics

    def _association_known(self, key: str, name: str) -> bool:
        if name in self.named:
            return True
        return name in self.inherent.get(self.scopes[key], {})

    def _check_associations(self) -> None:
        for key, decl in self.features.items():
            for name in decl.associations:
                if not self._association_known(key, name):
                    self._emit(
                        "E0201",
                        f"feature '{decl.name}' is associated with unknown "
                        f"feature '{name}'",
                        decl.span,
                    )

    # Literals

    def _scope(self, iface: InterfaceDecl) -> dict[str, str]:
        """Visible feature name -> assignment key, for one interface."""
        return {
            decl.name: self.inherent_keys.get((iface.name, decl.name), decl.name)
            for decl in visible_features(self.model, iface)
        }

    def _model_key(self, literal: Literal) -> str | None:
        name = literal.feature
        if name in self.named:
            return name
        owners = self.owners.get(name, [])
        if len(owners) == 1:
            return self.inherent_keys[(owners[0], name)]
        if owners:
            self._emit(
                "E0211",
                f"feature '{name}' is ambiguous: it is inherent to "
                f"{', '.join(owners)}",
                literal.span,
            )
        else:
            self._emit("E0201", f"unknown feature '{name}'", literal.span)
        return None

    def _resolve(self, literal: Literal, scope: Mapping[str, str] | None = None) -> bool:
        """
        Resolve a literal and record its value as used.

        Without ``scope`` the literal sits at model level (rules and
        configurations); with it, inside one interface's guards or predicates.
        """
        if scope is None:
            key = self._model_key(literal)
            if key is None:
                return False
        elif literal.feature in scope:
            key = scope[literal.feature]
        else:
            if literal.feature in self.named or literal.feature in self.owners:
                self._emit(
                    "E0207",
                    f"feature '{literal.feature}' is not visible here",
                    literal.span,
                )
            else:
                self._emit(
                    "E0201", f"unknown feature '{literal.feature}'", literal.span
                )
            return False
        decl = self.features[key]
        if literal.value not in decl.values:
            domain = ", ".join(decl.values)
            self._emit(
                "E0202",
                f"value '{literal.value}' is not in the domain of "
                f"'{decl.name}' {{{domain}}}",
                literal.value_span,
            )
            return False
        self.used_values.add((key, literal.value))
        return True

    # Rules and configurations

    def _check_rule(self, rule: ControlRule) -> None:
        resolved = self._resolve(rule.lhs) & self._resolve(rule.rhs)
        kind = self.relations.get(rule.relation)
        if kind is None:
            self._emit(
                "E0205",
                f"relation '{rule.relation}' is neither 'requires' nor 'excludes' "
                "nor an alias of one",
                rule.span,
            )
            return
        if resolved and rule.lhs.feature == rule.rhs.feature:
            self._emit("W0301", _same_feature_note(rule, kind), rule.span)

    def _check_configuration(self, spec: ConfigurationSpec) -> None:
        if spec.name in self.configurations:
            self._emit(
                "E0210", f"configuration '{spec.name}' is declared twice", spec.span
            )
        else:
            self.configurations[spec.name] = spec
        pinned: dict[str, Literal] = {}
        for literal in spec.required:
            self._resolve(literal)
            first = pinned.setdefault(literal.feature, literal)
            if first.value != literal.value:
                self._emit(
                    "E0204",
                    f"configuration '{spec.name}' requires both {first} and {literal}",
                    literal.span,
                )
        required = {(lit.feature, lit.value) for lit in spec.required}
        for literal in spec.discarded:
            self._resolve(literal)
            if (literal.feature, literal.value) in required:
                self._emit(
                    "E0209",
                    f"configuration '{spec.name}' both requires and discards {literal}",
                    literal.span,
                )

    # Product side

    def _check_interface(self, iface: InterfaceDecl) -> None:
        if iface.name in self.interfaces:
            self._emit(
                "E0210", f"interface '{iface.name}' is declared twice", iface.span
            )
            return
        self.interfaces[iface.name] = iface
        listed: set[str] = set()
        for name in iface.used_features:
            if self.scopes.get(name) != DOMAIN:
                self._emit(
                    "E0201",
                    f"interface '{iface.name}' uses '{name}', which is not a "
                    "declared domain feature",
                    iface.span,
                )
            elif name in listed:
                self._emit(
                    "E0203",
                    f"interface '{iface.name}' lists feature '{name}' twice",
                    iface.span,
                )
            listed.add(name)
        scope = self._scope(iface)
        seen_members: set[tuple] = set()
        for member in iface.members:
            key = (member.kind, member.name, member.guard)
            if key in seen_members:
                self._emit(
                    "E0210",
                    f"member '{member.name}' of '{iface.name}' is declared twice "
                    "with the same guard",
                    member.span,
                )
            seen_members.add(key)
            if member.guard is not None:
                for literal in predicate_literals(member.guard):
                    self._resolve(literal, scope)

    def _check_implementation(self, impl: ImplementationDecl) -> None:
        if impl.name in self.implementations:
            self._emit(
                "E0210",
                f"implementation '{impl.name}' is declared twice",
                impl.span,
            )
            return
        self.implementations[impl.name] = impl
        iface = self.interfaces.get(impl.realizes)
        if iface is None:
            self._emit(
                "E0206",
                f"implementation '{impl.name}' realizes unknown interface "
                f"'{impl.realizes}'",
                impl.span,
            )
            for literal in predicate_literals(impl.when):
                self._resolve(literal)
            return
        scope = self._scope(iface)
        for literal in predicate_literals(impl.when):
            self._resolve(literal, scope)
        methods = {m.name for m in iface.members if m.kind is MemberKind.METHOD}
        bodied: set[str] = set()
        for body in impl.bodies:
            if body.method not in methods:
                self._emit(
                    "E0208",
                    f"interface '{iface.name}' has no method '{body.method}'",
                    body.span,
                )
            elif body.method in bodied:
                self._emit(
                    "E0210",
                    f"implementation '{impl.name}' defines '{body.method}' twice",
                    body.span,
                )
            bodied.add(body.method)

    # Warnings

    def _check_unused_values(self) -> None:
        for key, decl in self.features.items():
            for value in decl.values:
                if (key, value) not in self.used_values:
                    self._emit(
                        "W0302",
                        f"value '{value}' of feature '{decl.name}' is not used by "
                        "any rule, guard or configuration",
                        decl.span,
                    )

    def _check_association_rules(self) -> None:
        connected = {
            frozenset((rule.lhs.feature, rule.rhs.feature))
            for rule in self.model.meta.rules
        }
        for key, decl in self.features.items():
            for name in decl.associations:
                linked = frozenset((decl.name, name)) in connected
                if self._association_known(key, name) and not linked:
                    self._emit(
                        "W0303",
                        f"feature '{decl.name}' is associated with '{name}' but no "
                        "rule connects them",
                        decl.span,
                    )


def check(model: Model) -> ResolvedModel:
    """
    Resolve names and validate a parsed model.

    Returns a ``ResolvedModel`` whose ``diagnostics`` are sorted by
    (file, line, col, code); ``certified`` is true iff none is an error.
    """
    resolved = _Checker(model).run()
    logger.info(
        "check finished",
        model=model.meta.name,
        certified=resolved.certified,
        errors=len(resolved.errors),
        warnings=len(resolved.warnings),
    )
    return resolved


def conformance_report(resolved: ResolvedModel) -> str:
    """
    Per-feature table of value count, incident rules and associations.

    Rows follow declaration order: domain, global, then inherent features.
    """
    rules = resolved.model.meta.rules
    header = ("feature", "scope", "values", "rules", "associations")
    rows: list[tuple[str, ...]] = [header]
    for name, decl in resolved.symbols.features.items():
        incident = sum(1 for r in rules if name in (r.lhs.feature, r.rhs.feature))
        rows.append(
            (
                name,
                resolved.symbols.scopes[name],
                str(len(decl.values)),
                str(incident),
                ", ".join(decl.associations) or "-",
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = [
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths, strict=True)).rstrip()
        for row in rows
    ]
    return "\n".join(lines) + "\n"
