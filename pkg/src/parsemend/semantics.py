"""Semantic knowledge-source adapter: primitive roles, selectional
checking, position-to-role assignment and syntax-free role fragments."""

from __future__ import annotations

from .kb import KnowledgeBase, LexicalEntry, PositionSpec, OK, UNKNOWN, VIOLATION

DOWN = "down"   # child meaning fills a slot of the governing meaning
UP = "up"       # governing meaning fills a slot of the child's meaning


def primitive_role(kb: KnowledgeBase, category: str) -> str | None:
    """The thematic role a category introduces (NP: THING, V: EVENT, ...)."""
    node = kb.categories.get(category)
    if node is None:
        raise KeyError(f"undefined category {category}")
    return node.primitive_role


def selectional_check(kb: KnowledgeBase, event_concept: str, slot: str,
                      filler_concept: str) -> str:
    """OK if the slot exists and the filler satisfies its restriction,
    VIOLATION if it exists and fails, UNKNOWN if there is no such slot."""
    restriction = kb.find_slot(event_concept, slot)
    if restriction is None:
        return UNKNOWN
    return OK if kb.isa_subsumes(filler_concept, restriction) else VIOLATION


def role_assignment(kb: KnowledgeBase, spec: PositionSpec,
                    parent_concept: str | None, child_concept: str | None,
                    prep_entry: LexicalEntry | None = None,
                    ) -> tuple[str | None, str, str]:
    """Map a template position to (role label, check result, direction).

    Subject/object positions carry an explicit role; PP positions take
    their role from the preposition at the position's attachment level;
    reduced-relative positions bind the governing meaning into the
    child's slot.  Head and function-word positions assign no role.
    """
    if spec.role is not None:
        role, direction = spec.role, DOWN
    elif spec.into_child is not None:
        role, direction = spec.into_child, UP
    elif spec.prep_level is not None:
        if prep_entry is None:
            return None, UNKNOWN, DOWN
        role = prep_entry.prep_role(spec.prep_level)
        if role is None:
            return None, UNKNOWN, DOWN
        direction = DOWN
    else:
        return None, UNKNOWN, DOWN

    target = parent_concept if direction == DOWN else child_concept
    filler = child_concept if direction == DOWN else parent_concept
    if target is None or filler is None:
        return role, UNKNOWN, direction
    return role, selectional_check(kb, target, role, filler), direction


def _direct_slots(kb: KnowledgeBase, concept: str) -> tuple[tuple[str, str], ...]:
    return kb.concepts[concept].slots


def semantic_fragments(kb: KnowledgeBase, state, instance_ids: list[int]):
    """Best-effort role fragments from role/slot knowledge and word order
    alone (the syntax-lesioned or failed path).

    Instances whose concepts declare slots directly act as binders; each
    slot takes the leftmost instance that is still unbound and satisfies
    the restriction.  Every instance ends up in exactly one fragment.
    Returns (role root ids, bind records) where a bind record is
    (role label, filler instance id, binder instance id).
    """
    bound: set[int] = set()
    binds: list[tuple[str, int, int]] = []
    for mid in instance_ids:
        instance = state.meanings[mid]
        for label, restriction in _direct_slots(kb, instance.concept):
            filler = None
            for other in instance_ids:
                if other == mid or other in bound:
                    continue
                if kb.isa_subsumes(state.meanings[other].concept, restriction):
                    filler = other
                    break
            if filler is None:
                continue
            bound.add(filler)
            instance.bindings[label] = filler
            binds.append((label, filler, mid))
            filler_role = state.role_nodes.get(state.meanings[filler].role_node)
            binder_role = state.role_nodes.get(state.meanings[mid].role_node)
            if filler_role is not None and binder_role is not None:
                if kb.role_reachable(filler_role.label, label):
                    if filler_role.label != label:
                        filler_role.label = label
                        filler_role.history.append(label)
                filler_role.parent = binder_role.id
                binder_role.children.append(filler_role.id)
    roots = [state.meanings[mid].role_node for mid in instance_ids
             if state.meanings[mid].role_node is not None
             and state.role_nodes[state.meanings[mid].role_node].parent is None]
    return roots, binds
