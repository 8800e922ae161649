"""
Configuration engine: validity, enumeration, counting, completion and dead values.

The search is an exhaustive depth-first walk over feature domains in
declaration order, values in declaration order, so results always come out in
the same lexicographic order. A rule is tested as soon as both of its features
are assigned; this prunes the walk without changing what it yields.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from types import MappingProxyType

import structlog

from .checker import ResolvedModel
from .diagnostics import (
    AssignmentError,
    Diagnostic,
    MissingFeatureError,
    StateSpaceError,
    UnknownConfigurationError,
)
from .model import (
    Assignment,
    ConfigurationSpec,
    ControlRule,
    FeatureDecl,
    Literal,
    RelationKind,
    predicate_literals,
)

logger = structlog.get_logger(__name__)

DEFAULT_STATE_CAP = 1_000_000

Domains = list[tuple[str, tuple[str, ...]]]


@dataclass(frozen=True)
class Violation:
    """A rule (or spec) falsified by an assignment, with the offending values."""

    rule: ControlRule | ConfigurationSpec
    excerpt: tuple[tuple[str, str], ...]
    explanation: str


@dataclass(frozen=True)
class Validation:
    valid: bool
    violations: tuple[Violation, ...] = ()

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class Enumeration:
    assignments: tuple[Mapping[str, str], ...]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.assignments)

    def __iter__(self) -> Iterator[Mapping[str, str]]:
        return iter(self.assignments)


def evaluate_rule(
    rule: ControlRule, assignment: Assignment, kind: RelationKind | None = None
) -> bool:
    """
    Decide one rule under an assignment.

    ``kind`` is the rule's resolved relation; when omitted the relation name
    must be a builtin (``requires`` or ``excludes``). A false antecedent makes
    the rule hold.
    """
    if kind is None:
        try:
            kind = RelationKind(rule.relation)
        except ValueError:
            raise ValueError(
                f"relation '{rule.relation}' needs resolving before evaluation"
            ) from None
    for literal in (rule.lhs, rule.rhs):
        if literal.feature not in assignment:
            raise MissingFeatureError(literal.feature, literal.span)
    lhs = assignment[rule.lhs.feature] == rule.lhs.value
    rhs = assignment[rule.rhs.feature] == rule.rhs.value
    if kind is RelationKind.REQUIRES:
        return not lhs or rhs
    return not (lhs and rhs)


def assignment_space(resolved: ResolvedModel) -> list[tuple[str, FeatureDecl]]:
    """
    Features a configuration assigns, as (assignment key, declaration) pairs
    in search order.

    Domain and global features always take part. An inherent feature joins
    only when a rule, configuration, guard or implementation predicate
    mentions it; its key is its name unless that name is not unique in the
    model, in which case it is ``Interface.name``.
    """
    model = resolved.model
    meta = model.meta
    mentioned: set[str] = set()
    for rule in meta.rules:
        mentioned.update((rule.lhs.feature, rule.rhs.feature))
    for spec in meta.configurations:
        mentioned.update(lit.feature for lit in spec.required + spec.discarded)
    for iface in model.interfaces:
        literals: list[Literal] = []
        for member in iface.members:
            if member.guard is not None:
                literals += predicate_literals(member.guard)
        for impl in model.implementations:
            if impl.realizes == iface.name:
                literals += predicate_literals(impl.when)
        mentioned.update(resolved.feature_key(iface.name, lit.feature) for lit in literals)

    space = [(decl.name, decl) for decl in meta.features]
    space += [(decl.name, decl) for decl in meta.global_block.features]
    for key in resolved.symbols.inherent_keys.values():
        if key in mentioned:
            space.append((key, resolved.symbols.features[key]))
    return space


def _rules(resolved: ResolvedModel) -> list[tuple[ControlRule, RelationKind]]:
    return [(rule, resolved.relation_kind(rule)) for rule in resolved.model.meta.rules]


def _guard_space(
    resolved: ResolvedModel, domains: Domains, cap: int | None, force: bool
) -> None:
    limit = DEFAULT_STATE_CAP if cap is None else cap
    size = math.prod(len(values) for _, values in domains)
    if size > limit and not force:
        logger.warning("state space over cap", size=size, cap=limit)
        raise StateSpaceError.single(
            "E0401",
            f"state space of {size} assignments exceeds the cap of {limit}; "
            "pass force to search anyway",
            resolved.model.meta.span,
        )


def _search(
    domains: Domains, rules: list[tuple[ControlRule, RelationKind]]
) -> Iterator[dict[str, str]]:
    position = {name: depth for depth, (name, _) in enumerate(domains)}
    schedule: list[list[tuple[ControlRule, RelationKind]]] = [[] for _ in domains]
    for rule, kind in rules:
        depth = max(position[rule.lhs.feature], position[rule.rhs.feature])
        schedule[depth].append((rule, kind))

    current: dict[str, str] = {}

    def descend(depth: int) -> Iterator[dict[str, str]]:
        if depth == len(domains):
            yield dict(current)
            return
        name, values = domains[depth]
        for value in values:
            current[name] = value
            if all(evaluate_rule(r, current, k) for r, k in schedule[depth]):
                yield from descend(depth + 1)
        current.pop(name, None)

    yield from descend(0)


def _walk(
    resolved: ResolvedModel,
    domains: Domains,
    cap: int | None,
    force: bool,
) -> Iterator[dict[str, str]]:
    resolved.require_certified()
    _guard_space(resolved, domains, cap, force)
    return _search(domains, _rules(resolved))


def _full_domains(resolved: ResolvedModel) -> Domains:
    return [(key, decl.values) for key, decl in assignment_space(resolved)]


def _take(found: Iterator[dict[str, str]], limit: int | None) -> Enumeration:
    if limit is not None and limit < 1:
        raise ValueError(f"limit must be at least 1, got {limit}")
    assignments: list[Mapping[str, str]] = []
    for assignment in found:
        if limit is not None and len(assignments) == limit:
            return Enumeration(tuple(assignments), truncated=True)
        assignments.append(MappingProxyType(assignment))
    return Enumeration(tuple(assignments), truncated=False)


def is_valid_configuration(
    resolved: ResolvedModel, assignment: Assignment
) -> Validation:
    """
    Check a complete assignment against every control and global rule.

    Raises ``AssignmentError`` (E0402) naming the missing features when the
    assignment is incomplete, and (E0403) for unknown features or values.
    """
    resolved.require_certified()
    span = resolved.model.meta.span
    missing = [key for key, _ in assignment_space(resolved) if key not in assignment]
    if missing:
        raise AssignmentError.single(
            "E0402", f"assignment misses feature(s): {', '.join(missing)}", span
        )
    problems: list[Diagnostic] = []
    for feature, value in assignment.items():
        decl = resolved.symbols.features.get(feature)
        if decl is None:
            problems.append(
                Diagnostic.of("E0403", f"unknown feature '{feature}'", span)
            )
        elif value not in decl.values:
            problems.append(
                Diagnostic.of(
                    "E0403", f"'{value}' is not a value of feature '{feature}'", span
                )
            )
    if problems:
        raise AssignmentError(problems)

    violations = []
    for rule, kind in _rules(resolved):
        if evaluate_rule(rule, assignment, kind):
            continue
        lhs, rhs = rule.lhs, rule.rhs
        if kind is RelationKind.REQUIRES:
            why = f"{lhs} {rule.relation} {rhs}, but {rhs.feature} is {assignment[rhs.feature]}"
        else:
            why = f"{lhs} {rule.relation} {rhs}, but both are selected"
        excerpt = (
            (lhs.feature, assignment[lhs.feature]),
            (rhs.feature, assignment[rhs.feature]),
        )
        violations.append(Violation(rule, excerpt, why))
    return Validation(not violations, tuple(violations))


def enumerate_configurations(
    resolved: ResolvedModel,
    limit: int | None = None,
    *,
    force: bool = False,
    cap: int | None = None,
) -> Enumeration:
    """
    List every valid complete assignment in canonical order.

    With ``limit`` the result stops after that many assignments and
    ``truncated`` tells whether more exist. Raises ``StateSpaceError`` (E0401)
    when the Cartesian product of the domains exceeds ``cap`` unless ``force``.
    """
    found = _walk(resolved, _full_domains(resolved), cap, force)
    result = _take(found, limit)
    logger.debug(
        "enumeration finished", count=len(result), truncated=result.truncated
    )
    return result


def count_configurations(
    resolved: ResolvedModel, *, force: bool = False, cap: int | None = None
) -> int:
    return sum(1 for _ in _walk(resolved, _full_domains(resolved), cap, force))


def find_configuration(resolved: ResolvedModel, name: str) -> ConfigurationSpec:
    """Look up a configuration spec by name (E0505 when absent)."""
    spec = resolved.symbols.configurations.get(name)
    if spec is None:
        available = ", ".join(resolved.symbols.configurations) or "none"
        raise UnknownConfigurationError.single(
            "E0505",
            f"unknown configuration '{name}' (available: {available})",
            resolved.model.meta.span,
        )
    return spec


def complete_configuration(
    resolved: ResolvedModel,
    spec: ConfigurationSpec | str,
    limit: int | None = None,
    *,
    force: bool = False,
    cap: int | None = None,
) -> list[Mapping[str, str]]:
    """
    All valid complete assignments honouring a configuration spec.

    Required literals pin their feature, discarded literals remove their
    value; ordering matches ``enumerate_configurations``. An unsatisfiable
    spec yields an empty list.
    """
    if isinstance(spec, str):
        spec = find_configuration(resolved, spec)
    elif resolved.symbols.configurations.get(spec.name) != spec:
        raise ValueError(f"configuration '{spec.name}' does not belong to this model")
    pinned: Mapping[str, str] = {lit.feature: lit.value for lit in spec.required}
    banned = {(lit.feature, lit.value) for lit in spec.discarded}
    domains: Domains = []
    for name, values in _full_domains(resolved):
        if name in pinned:
            values = tuple(v for v in values if v == pinned[name])
        domains.append((name, tuple(v for v in values if (name, v) not in banned)))
    found = _walk(resolved, domains, cap, force)
    completions = list(_take(found, limit))
    logger.debug("completion finished", spec=spec.name, count=len(completions))
    return completions


def detect_dead_values(
    resolved: ResolvedModel, *, force: bool = False, cap: int | None = None
) -> list[tuple[str, str]]:
    """Feature values that no valid configuration selects, in declaration order."""
    domains = _full_domains(resolved)
    seen: set[tuple[str, str]] = set()
    for assignment in _walk(resolved, domains, cap, force):
        seen.update(assignment.items())
    return [
        (name, value)
        for name, values in domains
        for value in values
        if (name, value) not in seen
    ]
