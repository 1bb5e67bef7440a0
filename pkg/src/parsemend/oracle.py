"""Exhaustive, preference-free parse enumeration for verification.

The oracle shares nothing with the engine's candidate generation: it
builds every grammar-licensed tree bottom-up over the token span by
brute-force template matching, then computes the semantic bindings of
each complete parse.  It exists to check the engine's claims, not to be
fast; sentences are desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .kb import KnowledgeBase, NONE_SENSE, OK, UNKNOWN, VIOLATION
from . import semantics


@dataclass(frozen=True)
class OracleNode:
    category: str
    span: tuple[int, int]
    feature: str | None = None
    template_ref: tuple[str, int] | None = None
    word: str | None = None
    entry_index: int | None = None
    children: tuple["OracleNode", ...] = ()
    positions: tuple[int, ...] = ()       # template position of each child


@dataclass(frozen=True)
class BindingRecord:
    role: str
    binder_tag: str
    filler_tag: str
    result: str


@dataclass(frozen=True)
class InstanceRecord:
    tag: str
    concept: str
    bindings: tuple[tuple[str, str], ...]   # (role, filler tag)


@dataclass(frozen=True)
class OracleParse:
    root: OracleNode
    instances: tuple[InstanceRecord, ...]
    bindings: tuple[BindingRecord, ...]


def semantically_clean(parse: OracleParse) -> bool:
    """True iff no binding in the parse violates a selectional restriction."""
    return all(b.result != VIOLATION for b in parse.bindings)


def enumerate_parses(tokens: list[str], kb: KnowledgeBase) -> list[OracleParse]:
    """Every complete sentence parse over the tokens, with its bindings."""
    if not tokens:
        raise ValueError("empty input")
    words = [t.lower() for t in tokens]
    entries = [kb.lexical_access(word, i) for i, word in enumerate(words)]
    n = len(words)

    @lru_cache(maxsize=None)
    def derive(category: str, start: int, end: int) -> tuple[OracleNode, ...]:
        node = kb.categories[category]
        if node.lexical:
            if end != start + 1:
                return ()
            out = []
            for index, entry in enumerate(entries[start]):
                if entry.category == category:
                    out.append(OracleNode(category, (start, end),
                                          entry.subcategory, word=words[start],
                                          entry_index=index))
            return tuple(out)
        results = []
        for template in node.templates:
            for assignment in _match(template.positions, 0, start, end):
                children = tuple(child for _, child in assignment)
                positions = tuple(pos for pos, _ in assignment)
                feature = None
                for pos, child in assignment:
                    if pos == template.head:
                        feature = child.feature
                results.append(OracleNode(
                    category, (start, end), feature,
                    (category, template.index), children=children,
                    positions=positions))
        return tuple(results)

    def _match(positions, index: int, at: int, end: int):
        """All assignments of [at, end) to positions[index:], as lists of
        (position, node); obligatory positions cannot be skipped."""
        if index == len(positions):
            if at == end:
                yield []
            return
        spec = positions[index]
        if spec.optional:
            yield from _match(positions, index + 1, at, end)
        for stop in range(at + 1, end + 1):
            for child in derive(spec.category, at, stop):
                if spec.accepts(child.category, child.feature):
                    for rest in _match(positions, index + 1, stop, end):
                        yield [(index, child)] + rest

    parses = [_interpret(kb, root) for root in derive("S", 0, n)]
    parses.sort(key=lambda p: _shape_key(p.root))
    return parses


# -- semantics of a finished parse ---------------------------------------


def _interpret(kb: KnowledgeBase, root: OracleNode) -> OracleParse:
    counts: dict[str, int] = {}
    tags: dict[int, str] = {}          # id(node) -> instance tag
    concepts: dict[int, str] = {}
    order: list[tuple[str, str]] = []  # (tag, concept) in leaf order
    instance_binds: dict[str, list[tuple[str, str]]] = {}
    records: list[BindingRecord] = []

    def meaning(node: OracleNode) -> tuple[str, str] | None:
        """(tag, concept) reaching this node, instantiating at leaves."""
        if node.word is not None:
            entry = kb.words[node.word][node.entry_index]
            if entry.sense == NONE_SENSE:
                return None
            ordinal = counts.get(entry.sense, 0) + 1
            counts[entry.sense] = ordinal
            tag = f"{entry.sense}{ordinal}"
            order.append((tag, entry.sense))
            instance_binds[tag] = []
            return tag, entry.sense
        template = kb.categories[node.template_ref[0]].templates[node.template_ref[1]]
        own = None
        child_meanings = []
        for pos, child in zip(node.positions, node.children):
            m = meaning(child)
            child_meanings.append((pos, child, m))
            if pos == template.head:
                own = m
        for pos, child, m in child_meanings:
            if pos == template.head:
                continue
            spec = template.positions[pos]
            prep = _prep_entry(kb, child)
            parent_concept = own[1] if own else None
            child_concept = m[1] if m else None
            role, result, direction = semantics.role_assignment(
                kb, spec, parent_concept, child_concept, prep)
            if role is None or m is None:
                continue
            if direction == semantics.DOWN:
                if own is None:
                    continue
                binder, filler = own, m
            else:
                if own is None:
                    continue
                binder, filler = m, own
            records.append(BindingRecord(role, binder[0], filler[0], result))
            if result == OK:
                instance_binds[binder[0]].append((role, filler[0]))
        return own

    meaning(root)
    instances = tuple(InstanceRecord(tag, concept,
                                     tuple(instance_binds.get(tag, ())))
                      for tag, concept in order)
    return OracleParse(root, instances, tuple(records))


def _prep_entry(kb: KnowledgeBase, node: OracleNode):
    if node.word is not None:
        entry = kb.words[node.word][node.entry_index]
        return entry if entry.prep_roles else None
    for child in node.children:
        found = _prep_entry(kb, child)
        if found is not None:
            return found
    return None


# -- shape comparison against the engine ----------------------------------


def _shape_key(node: OracleNode):
    return (node.category, node.span,
            tuple(_shape_key(c) for c in node.children))


def parse_shape(parse: OracleParse):
    """Canonical (category, span, children) tuple for an oracle parse."""
    return _shape_key(parse.root)


def state_shape(state, node_id: int):
    """The same canonical shape for an engine parse-state subtree."""
    node = state.nodes[node_id]
    return (node.category, node.span,
            tuple(state_shape(state, c) for c in node.children))
