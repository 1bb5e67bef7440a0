"""Syntax knowledge-source adapter: attachment-site generation.

Candidate sites live on the right frontier of the current fragment,
reached through bounded projection chains (a word's category is raised
through template head positions, at most three levels).  A chain top can
also found a new parent that consumes whole root fragments to its left,
which is how a verb's phrase and the sentence node come into existence
over an already-built subject.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kb import KnowledgeBase, PositionSpec, Template

MAX_CHAIN = 3

FRONTIER = "frontier"
ADOPT = "adopt"
ROOT = "root"

# one created node of a projection chain: the child sits at `position`
# of `template`; `feature` percolates up through head positions
@dataclass(frozen=True)
class ChainLink:
    category: str
    template_index: int
    position: int
    feature: str | None


@dataclass(frozen=True)
class AttachmentSite:
    kind: str
    parent: int | None                 # existing parent node id (frontier only)
    template_ref: tuple[str, int]      # template holding the filled position
    position: int                      # 0-based position the chain top fills
    chain: tuple[ChainLink, ...]       # nodes to create above the leaf, bottom-up
    consumed: tuple[tuple[int, int], ...] = ()   # (fragment root id, position)
    depth: int = 0                     # depth rank of the site, shallower wins

    @property
    def creates(self) -> int:
        return len(self.chain) + (1 if self.kind == ADOPT else 0)


def get_template(kb: KnowledgeBase, ref: tuple[str, int]) -> Template:
    return kb.categories[ref[0]].templates[ref[1]]


def check_features(spec: PositionSpec, category: str, feature: str | None) -> bool:
    """Pure predicate: does a node of this category/feature fit the position."""
    return spec.accepts(category, feature)


def expectation_satisfied(site: AttachmentSite, kb: KnowledgeBase) -> bool:
    """True iff the site fills an obligatory position of an existing node's
    template (new-root sites never satisfy a pre-existing expectation)."""
    if site.kind == ROOT:
        return False
    spec = get_template(kb, site.template_ref).positions[site.position]
    return not spec.optional


def open_positions(kb: KnowledgeBase, node) -> list[tuple[int, PositionSpec]]:
    """Positions of ``node`` still fillable next, in template order."""
    if node.template_ref is None:
        return []
    template = get_template(kb, node.template_ref)
    last = node.child_positions[-1] if node.child_positions else -1
    out = []
    for index in range(last + 1, len(template.positions)):
        out.append((index, template.positions[index]))
        if not template.positions[index].optional:
            break
    return out


def recursively_complete(kb: KnowledgeBase, state, node_id: int) -> bool:
    """Every obligatory template position filled, throughout the subtree."""
    node = state.nodes[node_id]
    if node.template_ref is not None:
        template = get_template(kb, node.template_ref)
        filled = set(node.child_positions)
        for index, spec in enumerate(template.positions):
            if not spec.optional and index not in filled:
                return False
    return all(recursively_complete(kb, state, c) for c in node.children)


def right_frontier(state, root_id: int) -> list[int]:
    """Node ids on the right spine, deepest first."""
    spine = []
    cursor = root_id
    while True:
        spine.append(cursor)
        children = state.nodes[cursor].children
        if not children:
            break
        cursor = children[-1]
    return [n for n in reversed(spine) if state.nodes[n].template_ref is not None]


def projection_chains(kb: KnowledgeBase, category: str,
                      feature: str | None) -> list[tuple[ChainLink, ...]]:
    """All chains of at most MAX_CHAIN projections over a node, including
    the empty chain.  A projection puts the current top at a template
    position whose preceding positions are all optional."""
    chains: list[tuple[ChainLink, ...]] = [()]
    frontier = [((), category, feature)]
    seen = {()}
    while frontier:
        chain, top_cat, top_feat = frontier.pop(0)
        if len(chain) >= MAX_CHAIN:
            continue
        for link in _single_projections(kb, top_cat, top_feat):
            new_chain = chain + (link,)
            key = tuple((l.category, l.template_index, l.position) for l in new_chain)
            if key in seen:
                continue
            seen.add(key)
            chains.append(new_chain)
            frontier.append((new_chain, link.category, link.feature))
    return chains


def _single_projections(kb: KnowledgeBase, category: str, feature: str | None):
    for cat in kb.categories.values():
        for template in cat.templates:
            for index, spec in enumerate(template.positions):
                if any(not p.optional for p in template.positions[:index]):
                    break
                if spec.accepts(category, feature):
                    percolated = feature if index == template.head else None
                    yield ChainLink(cat.name, template.index, index, percolated)


def _chain_top(chain: tuple[ChainLink, ...], category: str,
               feature: str | None) -> tuple[str, str | None]:
    if chain:
        return chain[-1].category, chain[-1].feature
    return category, feature


def _match_consumed(state, kb, positions, upto: int, roots: list[int]) -> list[tuple[int, int]] | None:
    """Greedily assign root fragments to template positions [0, upto);
    all fragments must be consumed, none may be left unfinished, and no
    obligatory position may be skipped."""
    assignment = []
    pos = 0
    for root_id in roots:
        if not recursively_complete(kb, state, root_id):
            return None
        node = state.nodes[root_id]
        feature = node.features[0] if node.features else None
        placed = False
        while pos < upto:
            spec = positions[pos]
            if spec.accepts(node.category, feature):
                assignment.append((root_id, pos))
                pos += 1
                placed = True
                break
            if spec.optional:
                pos += 1
                continue
            return None
        if not placed:
            return None
    for skipped in range(pos, upto):
        if not positions[skipped].optional:
            return None
    return assignment


def syntactic_candidates(kb: KnowledgeBase, state, category: str,
                         feature: str | None, start: int,
                         allow_root: bool = False) -> list[AttachmentSite]:
    """Every site where a new node of ``category``/``feature`` beginning at
    token ``start`` can join the parse: right-frontier attachments and
    new parents adopting left fragments.  ``allow_root`` additionally
    offers single-projection new fragments (sentence start or fallback)."""
    sites: list[AttachmentSite] = []
    chains = projection_chains(kb, category, feature)
    last_fragment = None
    if state.roots and state.nodes[state.roots[-1]].span[1] == start:
        last_fragment = state.roots[-1]

    if last_fragment is not None:
        for node_id in right_frontier(state, last_fragment):
            node = state.nodes[node_id]
            node_depth = state.depth(node_id)
            for index, spec in open_positions(kb, node):
                for chain in chains:
                    top_cat, top_feat = _chain_top(chain, category, feature)
                    if spec.accepts(top_cat, top_feat):
                        sites.append(AttachmentSite(
                            FRONTIER, node_id, node.template_ref, index,
                            chain, depth=node_depth))

    # new parents consuming a suffix of adjacent left fragments (at least one)
    consumable = len(state.roots) if last_fragment is not None else 0
    for chain in chains:
        top_cat, top_feat = _chain_top(chain, category, feature)
        for cat in kb.categories.values():
            for template in cat.templates:
                for index, spec in enumerate(template.positions):
                    if index == 0 or not spec.accepts(top_cat, top_feat):
                        continue
                    for take in range(1, consumable + 1):
                        roots = state.roots[-take:]
                        consumed = _match_consumed(state, kb, template.positions,
                                                   index, roots)
                        if consumed:
                            sites.append(AttachmentSite(
                                ADOPT, None, (cat.name, template.index), index,
                                chain, tuple(consumed), depth=0))

    if allow_root and not sites:
        for chain in chains:
            if len(chain) != 1:
                continue
            link = chain[0]
            sites.append(AttachmentSite(
                ROOT, None, (link.category, link.template_index),
                link.position, chain, depth=0))
    return _dedupe(sites)


def _dedupe(sites: list[AttachmentSite]) -> list[AttachmentSite]:
    seen = set()
    out = []
    for site in sites:
        key = (site.kind, site.parent, site.template_ref, site.position,
               site.chain, site.consumed)
        if key not in seen:
            seen.add(key)
            out.append(site)
    return out
