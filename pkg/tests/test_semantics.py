import pytest

from parsemend.engine import EngineConfig
from parsemend.kb import OK, UNKNOWN, VIOLATION, PositionSpec
from parsemend.semantics import (DOWN, UP, primitive_role, role_assignment,
                                 selectional_check, semantic_fragments)

from conftest import TEXT1, parse_text


def test_primitive_roles(kb):
    assert primitive_role(kb, "NP") == "THING"
    assert primitive_role(kb, "V") == "EVENT"
    assert primitive_role(kb, "VP") == "EVENT"
    assert primitive_role(kb, "Det") is None
    with pytest.raises(KeyError):
        primitive_role(kb, "XP")


def test_selectional_check_examples(kb):
    assert selectional_check(kb, "SEE", "INSTRUMENT", "HORSE") == VIOLATION
    assert selectional_check(kb, "SEE", "OBJECT", "HORSE") == OK
    assert selectional_check(kb, "SEE", "LOCATION", "HORSE") == UNKNOWN


def test_selectional_check_man_not_an_instrument(kb):
    assert selectional_check(kb, "SEE", "INSTRUMENT", "MAN") == VIOLATION


def test_role_assignment_subject(kb):
    spec = PositionSpec("NP", role="ACTOR")
    role, result, direction = role_assignment(kb, spec, "SEE", "MAN")
    assert (role, result, direction) == ("ACTOR", OK, DOWN)


def test_role_assignment_with_pp_levels(kb):
    (with_entry,) = kb.lexical_access("with")
    vp_spec = PositionSpec("PP", optional=True, prep_level="vp")
    np_spec = PositionSpec("PP", optional=True, prep_level="np")
    role, result, _ = role_assignment(kb, vp_spec, "SEE", "HORSE", with_entry)
    assert (role, result) == ("INSTRUMENT", VIOLATION)
    role, result, _ = role_assignment(kb, np_spec, "WOMAN", "HORSE", with_entry)
    assert (role, result) == ("ACCOMPANIMENT", OK)


def test_role_assignment_reduced_relative_binds_into_child(kb):
    spec = PositionSpec("RRC", optional=True, into_child="OBJECT")
    role, result, direction = role_assignment(kb, spec, "OFFICER", "TEACH")
    assert (role, result, direction) == ("OBJECT", OK, UP)


def test_role_assignment_without_annotation_is_unknown(kb):
    role, result, _ = role_assignment(kb, PositionSpec("N"), "SEE", "HORSE")
    assert role is None
    assert result == UNKNOWN


def test_role_assignment_missing_meaning_pends(kb):
    spec = PositionSpec("NP", role="OBJECT")
    role, result, _ = role_assignment(kb, spec, "SEE", None)
    assert (role, result) == ("OBJECT", UNKNOWN)


def test_fragments_cover_text1(kb):
    result = parse_text(kb, TEXT1, EngineConfig(lesion=frozenset({"syntax"})))
    state = result.state
    see = next(m for m in state.meanings.values() if m.concept == "SEE")
    assert state.meanings[see.bindings["ACTOR"]].concept == "MAN"
    assert state.meanings[see.bindings["OBJECT"]].concept == "HORSE"
    assert result.status == "fragments"


def test_fragments_partition_every_content_word(kb, corpus_sentences):
    config = EngineConfig(lesion=frozenset({"syntax"}))
    for sentence in corpus_sentences:
        state = parse_text(kb, sentence, config).state
        bound = [f for m in state.meanings.values() for f in m.bindings.values()]
        assert len(bound) == len(set(bound))  # nothing is claimed twice
        roots = {rid for rid, role in state.role_nodes.items()
                 if not role.dead and role.parent is None}
        for instance in state.meanings.values():
            node = state.role_nodes[instance.role_node]
            while node.parent is not None:
                node = state.role_nodes[node.parent]
            assert node.id in roots  # every instance reaches some fragment


def test_fragments_function_words_only(kb):
    result = parse_text(kb, "the the", EngineConfig(lesion=frozenset({"syntax"})))
    assert result.state.meanings == {}
    assert result.role_roots == ()


def test_fragments_single_noun(kb):
    result = parse_text(kb, "horses", EngineConfig(lesion=frozenset({"syntax"})))
    (root,) = result.role_roots
    role = result.state.role_nodes[root]
    assert role.label == "THING"
    assert result.state.meanings[role.filler].concept == "HORSE"
