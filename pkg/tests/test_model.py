"""
Tests for the core model types and lookups.
"""

import pytest

from tdm.model import (
    FeatureDecl,
    InterfaceDecl,
    Literal,
    MemberDecl,
    MemberKind,
    MetaFeaturesModel,
    Model,
    Param,
    PredAnd,
    PredLit,
    PredNot,
    PredOr,
    SourceSpan,
    feature_lookup,
    predicate_literals,
    visible_features,
)


def lit(feature: str, value: str) -> Literal:
    return Literal(feature, value)


class TestSourceSpan:
    """Test span validation and joining."""

    def test_spans_are_one_based(self):
        with pytest.raises(ValueError):
            SourceSpan("f.tdm", 0, 1, 1, 1)

    def test_start_must_not_follow_end(self):
        with pytest.raises(ValueError):
            SourceSpan("f.tdm", 2, 1, 1, 5)

    def test_to_covers_both(self):
        first = SourceSpan("f.tdm", 1, 3, 1, 8)
        last = SourceSpan("f.tdm", 4, 1, 4, 2)
        assert first.to(last) == SourceSpan("f.tdm", 1, 3, 4, 2)

    def test_spans_ignored_by_equality(self):
        """Structurally equal declarations compare equal wherever they came from."""
        a = FeatureDecl("Allocation", ("static",), span=SourceSpan("a", 1, 1, 1, 9))
        b = FeatureDecl("Allocation", ("static",), span=SourceSpan("b", 7, 3, 7, 40))
        assert a == b
        assert hash(a) == hash(b)


class TestLiteral:
    def test_str(self):
        assert str(lit("Allocation", "static")) == "Allocation.static"

    def test_value_span_covers_value_only(self):
        literal = Literal("Allocation", "big", SourceSpan("f", 3, 5, 3, 19))
        assert literal.value_span == SourceSpan("f", 3, 16, 3, 19)


class TestPredicates:
    def test_literals_left_to_right(self):
        predicate = PredOr(
            PredAnd(PredLit(lit("A", "x")), PredNot(PredLit(lit("B", "y")))),
            PredLit(lit("C", "z")),
        )
        assert [str(x) for x in predicate_literals(predicate)] == ["A.x", "B.y", "C.z"]


class TestMemberSignature:
    def test_attribute(self):
        member = MemberDecl(MemberKind.ATTRIBUTE, "capacity", "int")
        assert member.signature == "capacity: int"

    def test_method_with_params_and_result(self):
        member = MemberDecl(
            MemberKind.METHOD, "put", "bool", (Param("k", "key"), Param("v", "val"))
        )
        assert member.signature == "put(k: key, v: val): bool"

    def test_method_without_result(self):
        assert MemberDecl(MemberKind.METHOD, "clear").signature == "clear()"


class TestFeatureLookup:
    """Test feature_lookup and visible_features."""

    def test_lookup_domain_feature(self, set_model):
        decl = feature_lookup(set_model, "Allocation")
        assert decl is not None
        assert decl.values == ("static", "dynamic")

    def test_lookup_absent(self, set_model):
        assert feature_lookup(set_model, "Nope") is None

    def test_lookup_global_and_inherent(self, buffer_resolved):
        model = buffer_resolved.model
        assert feature_lookup(model, "Threading").values == ("single", "shared")
        assert feature_lookup(model, "Locking").values == ("none", "mutex")

    def test_visible_features_of_set(self, set_model):
        iface = set_model.interfaces[0]
        names = [d.name for d in visible_features(set_model, iface)]
        assert names == ["Allocation", "Discipline"]

    def test_visible_features_order(self, buffer_resolved):
        """Used features first, then globals, then inherent features."""
        model = buffer_resolved.model
        names = [d.name for d in visible_features(model, model.interfaces[0])]
        assert names == ["Storage", "Growth", "Threading", "Locking"]

    def test_visible_features_skips_undeclared(self):
        model = Model(MetaFeaturesModel("M", (FeatureDecl("A", ("x",)),)))
        iface = InterfaceDecl("I", used_features=("A", "Ghost"))
        assert [d.name for d in visible_features(model, iface)] == ["A"]
