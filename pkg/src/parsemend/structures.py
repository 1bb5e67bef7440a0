"""The evolving interpretation: parse tree, role tree, meaning instances,
retained-alternative store and audit counters.

A ``ParseState`` is a plain value owned by a single parse.  Node ids are
never reused, and a detached subtree keeps all of its ids, meanings and
internal bindings, which is what makes repair-by-reattachment cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

VIABLE = "viable"
VIOLATING = "violating"
CONSUMED = "consumed"


class StructureError(ValueError):
    """Violated precondition of a tree or store operation."""


@dataclass
class ParseNode:
    id: int
    category: str
    features: tuple[str, ...] = ()
    span: tuple[int, int] = (0, 0)        # half-open token interval
    children: list[int] = field(default_factory=list)
    child_positions: list[int] = field(default_factory=list)
    parent: int | None = None
    template_ref: tuple[str, int] | None = None   # (category, template index)
    word: str | None = None
    entry_index: int | None = None        # index into the word's lexicon entries
    meaning: int | None = None
    role: int | None = None


@dataclass
class RoleNode:
    id: int
    label: str
    filler: int | None = None             # MeaningInstance id
    parent: int | None = None
    history: list[str] = field(default_factory=list)
    children: list[int] = field(default_factory=list)
    dead: bool = False

    def __post_init__(self):
        if not self.history:
            self.history = [self.label]


@dataclass
class MeaningInstance:
    id: int
    concept: str
    tag: str                               # e.g. MAN1, SEE1
    bindings: dict[str, int] = field(default_factory=dict)
    role_node: int | None = None           # current live role node


@dataclass
class Alternative:
    """An unselected candidate, deactivated but retained for recovery."""

    id: int
    child: int                             # the word's leaf node id
    parent: int | None                     # site parent (None: never built)
    template_ref: tuple[str, int] | None   # site parent's template
    position: int                          # 0-based template position
    chain: tuple[tuple[str, int, str | None], ...]  # (category, template idx, feature) bottom-up
    entry_index: int
    preference: tuple | None = None        # vector at rejection time
    status: str = VIABLE
    birth: int = 0                         # token index
    chosen_node: int | None = None         # subtree root chosen over this alternative


@dataclass
class Counters:
    node_constructions: int = 0
    attachments: int = 0
    detachments: int = 0
    recoveries: int = 0
    retained_peak: int = 0


@dataclass
class ParseState:
    nodes: dict[int, ParseNode] = field(default_factory=dict)
    roots: list[int] = field(default_factory=list)   # fragment roots, left to right
    meanings: dict[int, MeaningInstance] = field(default_factory=dict)
    role_nodes: dict[int, RoleNode] = field(default_factory=dict)
    # (parent id, child id) -> (target meaning, role, filler meaning, role node)
    bindings: dict[tuple[int, int], tuple[int, str, int, int]] = field(default_factory=dict)
    failed_binds: set[tuple[int, int]] = field(default_factory=set)
    alternatives: list[Alternative] = field(default_factory=list)
    counters: Counters = field(default_factory=Counters)
    trace: list[str] = field(default_factory=list)
    recovery_deltas: list[int] = field(default_factory=list)
    next_node_id: int = 1
    next_role_id: int = 1
    next_meaning_id: int = 1
    next_alt_id: int = 1
    concept_counts: dict[str, int] = field(default_factory=dict)

    # -- construction ---------------------------------------------------

    def new_node(self, category: str, span: tuple[int, int], *,
                 features: tuple[str, ...] = (),
                 template_ref: tuple[str, int] | None = None,
                 word: str | None = None) -> ParseNode:
        node = ParseNode(self.next_node_id, category, features, span,
                         template_ref=template_ref, word=word)
        self.next_node_id += 1
        self.nodes[node.id] = node
        self.counters.node_constructions += 1
        return node

    def new_meaning(self, concept: str) -> MeaningInstance:
        ordinal = self.concept_counts.get(concept, 0) + 1
        self.concept_counts[concept] = ordinal
        instance = MeaningInstance(self.next_meaning_id, concept, f"{concept}{ordinal}")
        self.next_meaning_id += 1
        self.meanings[instance.id] = instance
        return instance

    def new_role(self, label: str, filler: int | None = None) -> RoleNode:
        role = RoleNode(self.next_role_id, label, filler)
        self.next_role_id += 1
        self.role_nodes[role.id] = role
        return role

    # -- tree shape -------------------------------------------------------

    def depth(self, node_id: int) -> int:
        depth = 0
        node = self.nodes[node_id]
        while node.parent is not None:
            node = self.nodes[node.parent]
            depth += 1
        return depth

    def root_of(self, node_id: int) -> int:
        node = self.nodes[node_id]
        while node.parent is not None:
            node = self.nodes[node.parent]
        return node.id

    def subtree_ids(self, node_id: int) -> list[int]:
        out = [node_id]
        for child in self.nodes[node_id].children:
            out.extend(self.subtree_ids(child))
        return out

    def _refresh_spans_upward(self, node_id: int) -> None:
        node = self.nodes[node_id]
        while node is not None:
            if node.children:
                first = self.nodes[node.children[0]]
                last = self.nodes[node.children[-1]]
                node.span = (first.span[0], last.span[1])
            node = self.nodes[node.parent] if node.parent is not None else None

    def last_filled_position(self, node: ParseNode) -> int:
        return node.child_positions[-1] if node.child_positions else -1


def attach(state: ParseState, child_id: int, parent_id: int, position: int,
           positions=None) -> None:
    """Link ``child`` under ``parent`` at the given template position.

    ``positions`` is the parent template's position tuple; when given, the
    category/feature constraint and the optional-skip rule are enforced
    (the spec's double-entry check with candidate generation).
    """
    child = state.nodes[child_id]
    parent = state.nodes[parent_id]
    if child.parent is not None:
        raise StructureError(f"node {child_id} already attached")
    last = state.last_filled_position(parent)
    if position <= last:
        raise StructureError(f"position {position} not after last filled {last}")
    if positions is not None:
        spec = positions[position]
        feature = child.features[0] if child.features else None
        if not spec.accepts(child.category, feature):
            raise StructureError(
                f"category/feature mismatch: {child.category}/{feature} "
                f"does not fit {spec.category} position")
        for skipped in range(last + 1, position):
            if not positions[skipped].optional:
                raise StructureError(f"cannot skip obligatory position {skipped}")
    if parent.children:
        if state.nodes[parent.children[-1]].span[1] != child.span[0]:
            raise StructureError(
                f"span discontiguity attaching {child_id} under {parent_id}")
    child.parent = parent_id
    parent.children.append(child_id)
    parent.child_positions.append(position)
    state.counters.attachments += 1
    if child_id in state.roots:
        state.roots.remove(child_id)
    state._refresh_spans_upward(parent_id)


def detach(state: ParseState, node_id: int) -> int:
    """Remove the link to ``node``'s parent; the subtree keeps all ids,
    meanings and internal bindings.  Returns the old parent id."""
    node = state.nodes[node_id]
    if node.parent is None:
        raise StructureError(f"node {node_id} is a root")
    parent = state.nodes[node.parent]
    slot = parent.children.index(node_id)
    parent.children.pop(slot)
    parent.child_positions.pop(slot)
    old_parent = node.parent
    node.parent = None
    state.counters.detachments += 1
    if parent.children:
        state._refresh_spans_upward(parent.id)
    return old_parent


def specialize_role(state: ParseState, role_id: int, target: str, kb) -> None:
    """Evolve a role label along the specialization DAG; never reverts."""
    role = state.role_nodes[role_id]
    if role.label == target:
        return
    if not kb.role_reachable(role.label, target):
        raise StructureError(f"illegal role specialization {role.label} -> {target}")
    role.label = target
    role.history.append(target)


def retain(state: ParseState, alt: Alternative, capacity: int | None = None) -> None:
    """Push an unselected alternative; FIFO-evict beyond ``capacity``."""
    state.alternatives.append(alt)
    prune(state, capacity)
    live = sum(1 for a in state.alternatives if a.status != CONSUMED)
    state.counters.retained_peak = max(state.counters.retained_peak, live)


def prune(state: ParseState, capacity: int | None) -> None:
    if capacity is None:
        return
    live = [a for a in state.alternatives if a.status != CONSUMED]
    excess = len(live) - capacity
    if excess > 0:
        drop = {a.id for a in live[:excess]}
        state.alternatives = [a for a in state.alternatives if a.id not in drop]


def reactivation_order(state: ParseState, predicate=None) -> list[Alternative]:
    """Most recent first, viable before violating, consumed excluded."""
    alive = [a for a in state.alternatives if a.status != CONSUMED]
    if predicate is not None:
        alive = [a for a in alive if predicate(a)]
    viable = [a for a in reversed(alive) if a.status == VIABLE]
    violating = [a for a in reversed(alive) if a.status == VIOLATING]
    return viable + violating


def reactivate(state: ParseState, predicate=None) -> Alternative | None:
    """Pop the best retained alternative (marking it consumed), or None."""
    order = reactivation_order(state, predicate)
    if not order:
        return None
    alt = order[0]
    alt.status = CONSUMED
    return alt


def check_well_formed(state: ParseState) -> None:
    """Assert the tree invariants; used by tests after every operation."""
    for root in state.roots:
        if state.nodes[root].parent is not None:
            raise AssertionError(f"root {root} has a parent")
    for node in state.nodes.values():
        seen = set()
        cursor = node
        while cursor.parent is not None:
            if cursor.id in seen:
                raise AssertionError(f"parent cycle through {cursor.id}")
            seen.add(cursor.id)
            cursor = state.nodes[cursor.parent]
        if node.children:
            spans = [state.nodes[c].span for c in node.children]
            for left, right in zip(spans, spans[1:]):
                if left[1] != right[0]:
                    raise AssertionError(f"non-contiguous children under {node.id}")
            if node.span != (spans[0][0], spans[-1][1]):
                raise AssertionError(f"span of {node.id} does not cover children")
            if node.child_positions != sorted(node.child_positions):
                raise AssertionError(f"unordered template positions under {node.id}")
