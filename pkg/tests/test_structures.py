import copy

import pytest
from hypothesis import given, settings, strategies as st

from parsemend.kb import PositionSpec
from parsemend.structures import (Alternative, CONSUMED, ParseState,
                                  StructureError, VIABLE, VIOLATING, attach,
                                  check_well_formed, detach, prune,
                                  reactivate, retain, specialize_role)

NP_POSITIONS = (PositionSpec("Det", optional=True), PositionSpec("N"))


def _np_state():
    state = ParseState()
    np = state.new_node("NP", (0, 0), template_ref=("NP", 0))
    det = state.new_node("Det", (0, 1), word="the")
    n = state.new_node("N", (1, 2), word="man")
    attach(state, det.id, np.id, 0, NP_POSITIONS)
    attach(state, n.id, np.id, 1, NP_POSITIONS)
    state.roots.append(np.id)
    return state, np, det, n


def test_attach_sets_links_and_spans():
    state, np, det, n = _np_state()
    assert np.children == [det.id, n.id]
    assert np.span == (0, 2)
    assert state.counters.attachments == 2
    check_well_formed(state)


def test_attach_category_mismatch():
    state = ParseState()
    np = state.new_node("NP", (0, 0), template_ref=("NP", 0))
    other = state.new_node("NP", (0, 1))
    with pytest.raises(StructureError, match="mismatch"):
        attach(state, other.id, np.id, 0, NP_POSITIONS)


def test_attach_cannot_skip_obligatory():
    positions = (PositionSpec("Det"), PositionSpec("N"))
    state = ParseState()
    np = state.new_node("NP", (0, 0), template_ref=("NP", 0))
    n = state.new_node("N", (0, 1), word="man")
    with pytest.raises(StructureError, match="skip obligatory"):
        attach(state, n.id, np.id, 1, positions)


def test_attach_span_discontiguity():
    state = ParseState()
    np = state.new_node("NP", (0, 0), template_ref=("NP", 0))
    det = state.new_node("Det", (0, 1), word="the")
    n = state.new_node("N", (2, 3), word="man")
    attach(state, det.id, np.id, 0, NP_POSITIONS)
    with pytest.raises(StructureError, match="discontiguity"):
        attach(state, n.id, np.id, 1, NP_POSITIONS)


def test_detach_preserves_subtree_and_counts():
    state, np, det, n = _np_state()
    before_ids = state.subtree_ids(n.id)
    constructions = state.counters.node_constructions
    detach(state, n.id)
    assert n.parent is None
    assert np.children == [det.id]
    assert state.subtree_ids(n.id) == before_ids
    assert state.counters.node_constructions == constructions
    assert state.counters.detachments == 1


def test_detach_root_is_error():
    state, np, *_ = _np_state()
    with pytest.raises(StructureError, match="root"):
        detach(state, np.id)


def test_attach_detach_reattach_round_trip():
    state, np, det, n = _np_state()
    snapshot = copy.deepcopy((np, det, n))
    detach(state, n.id)
    attach(state, n.id, np.id, 1, NP_POSITIONS)
    assert np.children == snapshot[0].children
    assert np.child_positions == snapshot[0].child_positions
    assert np.span == snapshot[0].span
    assert n.parent == np.id
    check_well_formed(state)


class _Roles:
    """Minimal specialization DAG stand-in for a KnowledgeBase."""

    edges = {"THING": ("ACTOR", "OBJECT")}

    def role_reachable(self, source, target):
        if source == target:
            return True
        return target in self.edges.get(source, ())


def test_specialize_role_legal_and_history():
    state = ParseState()
    role = state.new_role("THING")
    specialize_role(state, role.id, "ACTOR", _Roles())
    assert role.label == "ACTOR"
    assert role.history == ["THING", "ACTOR"]


def test_specialize_role_never_reverts():
    state = ParseState()
    role = state.new_role("THING")
    specialize_role(state, role.id, "OBJECT", _Roles())
    with pytest.raises(StructureError, match="illegal"):
        specialize_role(state, role.id, "ACTOR", _Roles())
    with pytest.raises(StructureError):
        specialize_role(state, role.id, "THING", _Roles())


def _alt(state, birth, status=VIABLE):
    alt = Alternative(id=state.next_alt_id, child=0, parent=1,
                      template_ref=("NP", 0), position=0, chain=(),
                      entry_index=0, status=status, birth=birth)
    state.next_alt_id += 1
    return alt


def test_reactivate_most_recent_first():
    state = ParseState()
    for birth in (3, 5):
        retain(state, _alt(state, birth))
    picked = reactivate(state)
    assert picked.birth == 5
    assert picked.status == CONSUMED
    assert reactivate(state).birth == 3


def test_reactivate_empty_store():
    assert reactivate(ParseState()) is None


def test_reactivate_viable_before_violating():
    state = ParseState()
    retain(state, _alt(state, 1, status=VIOLATING))
    retain(state, _alt(state, 2, status=VIABLE))
    retain(state, _alt(state, 3, status=VIOLATING))
    assert reactivate(state).birth == 2
    assert reactivate(state).birth == 3
    assert reactivate(state).birth == 1
    assert reactivate(state) is None


def test_capacity_evicts_oldest():
    state = ParseState()
    first = _alt(state, 1)
    second = _alt(state, 2)
    retain(state, first, capacity=1)
    retain(state, second, capacity=1)
    assert [a.id for a in state.alternatives] == [second.id]
    assert state.counters.retained_peak == 1


def test_capacity_zero_keeps_nothing():
    state = ParseState()
    retain(state, _alt(state, 1), capacity=0)
    assert state.alternatives == []
    assert state.counters.retained_peak == 0
    assert reactivate(state) is None


@settings(max_examples=50, derandomize=True)
@given(st.lists(st.booleans(), min_size=1, max_size=12),
       st.one_of(st.none(), st.integers(min_value=0, max_value=4)))
def test_retained_peak_matches_shadow_count(statuses, capacity):
    state = ParseState()
    shadow_peak = 0
    live = []
    for index, violating in enumerate(statuses):
        alt = _alt(state, index, status=VIOLATING if violating else VIABLE)
        retain(state, alt, capacity)
        live.append(alt.id)
        if capacity is not None:
            live = live[max(0, len(live) - capacity):]
        shadow_peak = max(shadow_peak, len(live))
    assert state.counters.retained_peak == shadow_peak
    assert [a.id for a in state.alternatives] == live


def test_prune_ignores_consumed():
    state = ParseState()
    first = _alt(state, 1)
    retain(state, first)
    first.status = CONSUMED
    retain(state, _alt(state, 2))
    prune(state, 1)
    assert [a.status for a in state.alternatives] == [CONSUMED, VIABLE]
