"""
Canonical formatter: 2-space indent, one declaration per line, LF endings.
"""

from __future__ import annotations

from ..model import (
    ConfigurationSpec,
    ControlRule,
    FeatureDecl,
    ImplementationDecl,
    InterfaceDecl,
    MemberDecl,
    MemberKind,
    Model,
    PredAnd,
    Predicate,
    PredLit,
    PredNot,
    PredOr,
    RelationDecl,
)

INDENT = "  "

# Binding strength; a child weaker than its slot is parenthesized.
_OR, _AND, _NOT, _ATOM = 1, 2, 3, 4


def _strength(predicate: Predicate) -> int:
    match predicate:
        case PredOr():
            return _OR
        case PredAnd():
            return _AND
        case PredNot():
            return _NOT
    return _ATOM


def format_predicate(predicate: Predicate) -> str:
    """Render a predicate with the fewest parentheses that preserve its tree."""

    def wrapped(child: Predicate, minimum: int) -> str:
        text = format_predicate(child)
        return f"({text})" if _strength(child) < minimum else text

    match predicate:
        case PredLit(literal):
            return str(literal)
        case PredNot(child):
            return f"not {wrapped(child, _NOT)}"
        case PredAnd(left, right):
            return f"{wrapped(left, _AND)} and {wrapped(right, _AND + 1)}"
        case PredOr(left, right):
            return f"{wrapped(left, _OR)} or {wrapped(right, _OR + 1)}"
    raise TypeError(f"not a predicate: {predicate!r}")


def _feature(decl: FeatureDecl) -> str:
    line = f"feature {decl.name} = {{ {', '.join(decl.values)} }}"
    if decl.associations:
        line += f" assoc ({', '.join(decl.associations)})"
    return line


def _relation(decl: RelationDecl) -> str:
    if decl.semantics is None or decl.semantics.value == decl.name:
        return f"relation {decl.name}"
    return f"relation {decl.name} = {decl.semantics.value}"


def _rule(rule: ControlRule) -> str:
    return str(rule)


def _configuration(spec: ConfigurationSpec, out: list[str], depth: int) -> None:
    pad = INDENT * depth
    out.append(f"{pad}configuration {spec.name} {{")
    if spec.required:
        out.append(f"{pad}{INDENT}require {', '.join(map(str, spec.required))}")
    if spec.discarded:
        out.append(f"{pad}{INDENT}discard {', '.join(map(str, spec.discarded))}")
    out.append(f"{pad}}}")


def _member(member: MemberDecl) -> str:
    if member.kind is MemberKind.ATTRIBUTE:
        line = f"attr {member.name} : {member.type_text}"
    else:
        params = ", ".join(f"{p.name} : {p.type_text}" for p in member.params)
        line = f"method {member.name}({params})"
        if member.type_text:
            line += f" : {member.type_text}"
    if member.guard is not None:
        line += f" when {format_predicate(member.guard)}"
    return line


def _interface(iface: InterfaceDecl, out: list[str], depth: int) -> None:
    pad = INDENT * depth
    header = f"{pad}interface {iface.name}"
    if iface.used_features:
        header += f" features ({', '.join(iface.used_features)})"
    if iface.inherent_features:
        out.append(f"{header} inherent {{")
        out.extend(f"{pad}{INDENT}{_feature(d)}" for d in iface.inherent_features)
        header = f"{pad}}}"
    out.append(f"{header} {{")
    out.extend(f"{pad}{INDENT}{_member(m)}" for m in iface.members)
    out.append(f"{pad}}}")


def _implementation(impl: ImplementationDecl, out: list[str], depth: int) -> None:
    pad = INDENT * depth
    out.append(
        f"{pad}implementation {impl.name} realizes {impl.realizes} "
        f"when {format_predicate(impl.when)} {{"
    )
    for body in impl.bodies:
        out.append(f"{pad}{INDENT}method {body.method} {{{body.text}}}")
    out.append(f"{pad}}}")


def pretty_print(model: Model) -> str:
    """
    Render a model in canonical form.

    Blocks appear in the fixed order types, global, control, configurations,
    product. Empty global and control blocks are omitted. Method body text is
    reproduced verbatim. Output is deterministic and LF-terminated.
    """
    meta = model.meta
    out: list[str] = [f"features {meta.name} {{", f"{INDENT}types {{"]
    out.extend(f"{INDENT * 2}{_feature(d)}" for d in meta.features)
    out.extend(f"{INDENT * 2}{_relation(r)}" for r in meta.relations)
    out.append(f"{INDENT}}}")

    block = meta.global_block
    if block.features or block.rules:
        out.append(f"{INDENT}global {{")
        out.extend(f"{INDENT * 2}{_feature(d)}" for d in block.features)
        out.extend(f"{INDENT * 2}{_rule(r)}" for r in block.rules)
        out.append(f"{INDENT}}}")

    if meta.control:
        out.append(f"{INDENT}control {{")
        out.extend(f"{INDENT * 2}{_rule(r)}" for r in meta.control)
        out.append(f"{INDENT}}}")

    for spec in meta.configurations:
        _configuration(spec, out, 1)
    out.append("}")

    if model.product is not None:
        product = model.product
        out.append("")
        out.append(f"product {product.name} {{")
        for iface in product.interfaces:
            _interface(iface, out, 1)
        for impl in product.implementations:
            _implementation(impl, out, 1)
        out.append("}")
    return "\n".join(out) + "\n"
