"""
Release generation: bind a configuration to one implementation per interface.

A release is the instantiation of a configuration spec: its unique valid
completion, the implementation selected for every interface, and the members
each interface keeps under that assignment. ``emit_manifest`` serializes it
as deterministic JSON.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass
from types import MappingProxyType

import structlog
from pydantic import BaseModel, ConfigDict

from .checker import ResolvedModel
from .diagnostics import Diagnostic, MissingFeatureError, ReleaseError
from .engine import complete_configuration, find_configuration
from .model import (
    Assignment,
    InterfaceDecl,
    MemberDecl,
    PredAnd,
    Predicate,
    PredLit,
    PredNot,
    PredOr,
    predicate_literals,
)

logger = structlog.get_logger(__name__)

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Release:
    name: str
    model: str
    assignment: Mapping[str, str]
    bindings: Mapping[str, str]
    active_members: Mapping[str, tuple[MemberDecl, ...]]


class ManifestMember(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str
    name: str
    signature: str


class ReleaseManifest(BaseModel):
    """Schema of the JSON manifest; field order is the serialized key order."""

    model_config = ConfigDict(frozen=True, protected_namespaces=())

    model: str
    release: str
    assignment: dict[str, str]
    bindings: dict[str, str]
    members: dict[str, list[ManifestMember]]
    fingerprint: str | None = None

    def body(self) -> str:
        """Canonical JSON of everything but the fingerprint."""
        return _render(self.model_dump(exclude={"fingerprint"}))


def fnv1a_64(data: bytes) -> int:
    digest = FNV64_OFFSET
    for byte in data:
        digest = ((digest ^ byte) * FNV64_PRIME) & _MASK64
    return digest


def _render(document: dict) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def eval_predicate(predicate: Predicate, assignment: Assignment) -> bool:
    """
    Evaluate a feature predicate; a literal holds when its feature has its value.

    Raises ``MissingFeatureError`` naming the first mentioned feature the
    assignment lacks.
    """
    for literal in predicate_literals(predicate):
        if literal.feature not in assignment:
            raise MissingFeatureError(literal.feature, literal.span)
    return _holds(predicate, assignment)


def _holds(predicate: Predicate, assignment: Assignment) -> bool:
    match predicate:
        case PredLit(literal):
            return assignment[literal.feature] == literal.value
        case PredAnd(left, right):
            return _holds(left, assignment) and _holds(right, assignment)
        case PredOr(left, right):
            return _holds(left, assignment) or _holds(right, assignment)
        case PredNot(child):
            return not _holds(child, assignment)
    raise TypeError(f"not a predicate: {predicate!r}")


def select_implementations(
    resolved: ResolvedModel, assignment: Assignment
) -> dict[str, str]:
    """
    Pick, per interface, the single implementation whose predicate holds.

    Interfaces without implementations are left unbound. Raises
    ``ReleaseError`` with E0501 (no match) or E0502 (several matches) for
    every interface that fails.
    """
    resolved.require_certified()
    model = resolved.model
    bindings: dict[str, str] = {}
    problems: list[Diagnostic] = []
    for iface in model.interfaces:
        candidates = [
            impl.name
            for impl in model.implementations
            if impl.realizes == iface.name
        ]
        if not candidates:
            continue
        view = resolved.interface_view(iface, assignment)
        matching = [
            impl.name
            for impl in model.implementations
            if impl.realizes == iface.name and eval_predicate(impl.when, view)
        ]
        if len(matching) == 1:
            bindings[iface.name] = matching[0]
        elif not matching:
            problems.append(
                Diagnostic.of(
                    "E0501",
                    f"no implementation of '{iface.name}' matches "
                    f"(candidates: {', '.join(candidates)})",
                    iface.span,
                )
            )
        else:
            problems.append(
                Diagnostic.of(
                    "E0502",
                    f"interface '{iface.name}' has several matching "
                    f"implementations: {', '.join(matching)}",
                    iface.span,
                )
            )
    if problems:
        raise ReleaseError(problems)
    return bindings


def project_members(iface: InterfaceDecl, assignment: Assignment) -> list[MemberDecl]:
    """Members kept under an assignment: unguarded ones and those whose guard holds."""
    return [
        member
        for member in iface.members
        if member.guard is None or eval_predicate(member.guard, assignment)
    ]


def generate_release(
    resolved: ResolvedModel,
    spec_name: str,
    *,
    force: bool = False,
    cap: int | None = None,
) -> Release:
    """
    Derive the release named by a configuration spec.

    The spec must have exactly one valid completion (E0503 when it has none,
    E0504 when it has several); implementation selection errors propagate.
    """
    resolved.require_certified()
    spec = find_configuration(resolved, spec_name)
    completions = complete_configuration(resolved, spec, limit=2, force=force, cap=cap)
    if not completions:
        raise ReleaseError.single(
            "E0503",
            f"configuration '{spec_name}' has no valid completion",
            spec.span,
        )
    if len(completions) > 1:
        raise ReleaseError.single(
            "E0504",
            f"configuration '{spec_name}' has more than one valid completion; "
            "tighten its require/discard lists",
            spec.span,
        )
    assignment = completions[0]
    bindings = select_implementations(resolved, assignment)
    members = {
        iface.name: tuple(
            project_members(iface, resolved.interface_view(iface, assignment))
        )
        for iface in resolved.model.interfaces
    }
    logger.info("release generated", release=spec_name, bindings=bindings)
    return Release(
        name=spec_name,
        model=resolved.model.meta.name,
        assignment=MappingProxyType(dict(assignment)),
        bindings=MappingProxyType(bindings),
        active_members=MappingProxyType(members),
    )


def build_manifest(release: Release) -> ReleaseManifest:
    """Manifest with sorted keys and its fingerprint filled in."""
    manifest = ReleaseManifest(
        model=release.model,
        release=release.name,
        assignment=dict(sorted(release.assignment.items())),
        bindings=dict(sorted(release.bindings.items())),
        members={
            name: [
                ManifestMember(kind=m.kind.value, name=m.name, signature=m.signature)
                for m in members
            ]
            for name, members in sorted(release.active_members.items())
        },
    )
    fingerprint = f"{fnv1a_64(manifest.body().encode('utf-8')):016x}"
    return manifest.model_copy(update={"fingerprint": fingerprint})


def emit_manifest(release: Release) -> str:
    """
    Serialize a release as JSON.

    Keys come in the order model, release, assignment, bindings, members,
    fingerprint; 2-space indent; LF line endings.
    """
    return _render(build_manifest(release).model_dump())
