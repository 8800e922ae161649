"""
Tests for implementation selection, member projection and release manifests.
"""

import json
from dataclasses import replace

import pytest

from tdm.checker import check
from tdm.diagnostics import MissingFeatureError, ReleaseError
from tdm.engine import enumerate_configurations
from tdm.frontend import parse_model
from tdm.model import InterfaceDecl, Literal, PredAnd, PredLit, PredNot, PredOr
from tdm.release import (
    ReleaseManifest,
    build_manifest,
    emit_manifest,
    eval_predicate,
    fnv1a_64,
    generate_release,
    project_members,
    select_implementations,
)
from tests.conftest import with_control, with_spec

STATIC_STACK = {"Allocation": "static", "Discipline": "stack"}
DYNAMIC_STACK = {"Allocation": "dynamic", "Discipline": "stack"}


def lit(feature: str, value: str) -> PredLit:
    return PredLit(Literal(feature, value))


class TestFingerprint:
    @pytest.mark.parametrize(
        ("data", "expected"),
        [
            (b"", 0xCBF29CE484222325),
            (b"a", 0xAF63DC4C8601EC8C),
            (b"foobar", 0x85944171F73967E8),
        ],
    )
    def test_fnv1a_vectors(self, data, expected):
        assert fnv1a_64(data) == expected


class TestEvalPredicate:
    def test_literal(self):
        assert eval_predicate(lit("Allocation", "static"), STATIC_STACK)

    def test_conjunction_fails(self):
        predicate = PredAnd(lit("Allocation", "static"), lit("Discipline", "stack"))
        assert not eval_predicate(
            predicate, {"Allocation": "static", "Discipline": "queue"}
        )

    def test_or_and_not(self):
        predicate = PredOr(PredNot(lit("Allocation", "static")), lit("Discipline", "stack"))
        assert eval_predicate(predicate, DYNAMIC_STACK)
        assert not eval_predicate(
            predicate, {"Allocation": "static", "Discipline": "queue"}
        )

    def test_missing_feature(self):
        predicate = PredOr(lit("Allocation", "static"), lit("Discipline", "stack"))
        with pytest.raises(MissingFeatureError) as excinfo:
            eval_predicate(predicate, {"Allocation": "static"})
        assert excinfo.value.feature == "Discipline"


class TestSelection:
    def test_static_stack(self, set_resolved):
        assert select_implementations(set_resolved, STATIC_STACK) == {
            "Set": "StaticStack"
        }

    def test_every_configuration_binds_exactly_one(self, set_resolved):
        """Exclusive and covering predicates never fail selection."""
        chosen = [
            select_implementations(set_resolved, a)["Set"]
            for a in enumerate_configurations(set_resolved)
        ]
        assert chosen == ["StaticStack", "StaticQueue", "DynamicStack", "DynamicQueue"]

    def test_no_match(self, set_source):
        source = set_source.replace(
            "  implementation DynamicStack realizes Set when "
            "Allocation.dynamic and Discipline.stack {\n  }\n",
            "",
        )
        resolved = check(parse_model(source))
        with pytest.raises(ReleaseError) as excinfo:
            select_implementations(resolved, DYNAMIC_STACK)
        diagnostic = excinfo.value.diagnostics[0]
        assert diagnostic.code == "E0501"
        assert "StaticStack" in diagnostic.message

    def test_ambiguous(self, set_source):
        source = set_source[: set_source.rindex("}")] + (
            "  implementation StaticStack2 realizes Set when "
            "Allocation.static and Discipline.stack {\n  }\n}\n"
        )
        resolved = check(parse_model(source))
        with pytest.raises(ReleaseError) as excinfo:
            select_implementations(resolved, STATIC_STACK)
        diagnostic = excinfo.value.diagnostics[0]
        assert diagnostic.code == "E0502"
        assert "StaticStack, StaticStack2" in diagnostic.message

    def test_interface_without_implementations_unbound(self):
        resolved = check(
            parse_model(
                "features F { types { feature A = { x } } }\n"
                "product P { interface I features (A) { attr n : int when A.x } }"
            )
        )
        assert select_implementations(resolved, {"A": "x"}) == {}

    def test_interfaces_select_by_their_own_inherent_feature(self, twin_resolved):
        assignment = {"A": "x", "I.L": "on", "J.L": "off"}
        assert select_implementations(twin_resolved, assignment) == {
            "I": "IOn",
            "J": "JOff",
        }
        i_face, j_face = twin_resolved.model.interfaces
        i_members = project_members(i_face, twin_resolved.interface_view(i_face, assignment))
        j_members = project_members(j_face, twin_resolved.interface_view(j_face, assignment))
        assert [m.name for m in i_members] == ["n"]
        assert [m.name for m in j_members] == ["m"]


class TestProjection:
    def test_static_keeps_capacity(self, set_model):
        members = project_members(set_model.interfaces[0], STATIC_STACK)
        assert [m.name for m in members] == ["capacity", "add", "remove"]

    def test_dynamic_drops_capacity(self, set_model):
        members = project_members(set_model.interfaces[0], DYNAMIC_STACK)
        assert [m.name for m in members] == ["add", "remove"]

    def test_interface_without_members(self):
        assert project_members(InterfaceDecl("Empty"), STATIC_STACK) == []

    def test_dropping_a_guard_never_drops_the_member(self, buffer_resolved):
        """Removing one member's guard only ever adds to what a release keeps."""
        iface = buffer_resolved.model.interfaces[0]
        configurations = list(enumerate_configurations(buffer_resolved))
        for index, member in enumerate(iface.members):
            if member.guard is None:
                continue
            members = list(iface.members)
            members[index] = replace(member, guard=None)
            loosened = replace(iface, members=tuple(members))
            for assignment in configurations:
                kept = {m.name for m in project_members(iface, assignment)}
                widened = {m.name for m in project_members(loosened, assignment)}
                assert kept <= widened
                assert member.name in widened


class TestGenerateRelease:
    def test_static_stack_release(self, set_resolved):
        release = generate_release(set_resolved, "StaticStack")
        assert release.name == "StaticStack"
        assert release.model == "SetFeatures"
        assert release.assignment == STATIC_STACK
        assert release.bindings == {"Set": "StaticStack"}
        assert [m.name for m in release.active_members["Set"]] == [
            "capacity",
            "add",
            "remove",
        ]

    def test_under_specified(self, set_source):
        resolved = check(parse_model(with_spec(set_source, "require Allocation.static")))
        with pytest.raises(ReleaseError) as excinfo:
            generate_release(resolved, "Extra")
        assert excinfo.value.diagnostics[0].code == "E0504"

    def test_unsatisfiable(self, set_source):
        source = with_control(set_source, "Discipline.stack excludes Allocation.static")
        resolved = check(parse_model(source))
        with pytest.raises(ReleaseError) as excinfo:
            generate_release(resolved, "StaticStack")
        assert excinfo.value.diagnostics[0].code == "E0503"

    def test_unknown_spec(self, set_resolved):
        with pytest.raises(ReleaseError) as excinfo:
            generate_release(set_resolved, "Missing")
        assert excinfo.value.diagnostics[0].code == "E0505"

    def test_inherent_feature_selects(self, buffer_resolved):
        release = generate_release(buffer_resolved, "SharedArray")
        assert release.bindings == {"Buffer": "SharedArrayBuffer"}
        assert release.assignment["Locking"] == "mutex"
        names = [m.name for m in release.active_members["Buffer"]]
        assert names == ["size", "push", "pop", "resize", "lock"]

    def test_release_is_read_only(self, set_resolved):
        release = generate_release(set_resolved, "StaticStack")
        with pytest.raises(TypeError):
            release.assignment["Allocation"] = "dynamic"  # type: ignore[index]
        with pytest.raises(TypeError):
            release.bindings["Set"] = "DynamicStack"  # type: ignore[index]
        with pytest.raises(TypeError):
            release.active_members["Set"] = ()  # type: ignore[index]


class TestManifest:
    """Test manifest layout, fingerprint and determinism."""

    def test_matches_golden(self, set_resolved, golden_dir):
        expected = (golden_dir / "static_stack.manifest.json").read_text(encoding="utf-8")
        assert emit_manifest(generate_release(set_resolved, "StaticStack")) == expected

    def test_buffer_matches_golden(self, buffer_resolved, golden_dir):
        expected = (golden_dir / "shared_array.manifest.json").read_text(encoding="utf-8")
        assert emit_manifest(generate_release(buffer_resolved, "SharedArray")) == expected

    def test_deterministic(self, set_source):
        outputs = {
            emit_manifest(generate_release(check(parse_model(set_source)), "StaticStack"))
            for _ in range(3)
        }
        assert len(outputs) == 1

    def test_key_order(self, set_resolved):
        document = json.loads(emit_manifest(generate_release(set_resolved, "StaticStack")))
        assert list(document) == [
            "model",
            "release",
            "assignment",
            "bindings",
            "members",
            "fingerprint",
        ]
        assert list(document["assignment"]) == ["Allocation", "Discipline"]

    def test_fingerprint_covers_body(self, set_resolved):
        manifest = build_manifest(generate_release(set_resolved, "StaticStack"))
        expected = fnv1a_64(manifest.body().encode("utf-8"))
        assert manifest.fingerprint == f"{expected:016x}"

    def test_manifest_validates(self, set_resolved):
        text = emit_manifest(generate_release(set_resolved, "StaticStack"))
        manifest = ReleaseManifest.model_validate_json(text)
        assert manifest.bindings == {"Set": "StaticStack"}
        assert manifest.members["Set"][0].signature == "capacity: int"

    def test_lf_line_endings(self, set_resolved):
        text = emit_manifest(generate_release(set_resolved, "StaticStack"))
        assert "\r" not in text
        assert text.endswith("}\n")
