"""The unified control loop.

One process handles every word the same way: access all lexical entries,
build the basic leaf node, propose attachment sites from the syntactic
source crossed with binding feasibility from the semantic source,
evaluate, select one candidate and retain the rest, then bind meanings
upward along the new structure.  Failure to attach examines the retained
alternatives and repairs the tree by moving an already-built subtree;
a selectional violation discovered later re-runs the same evaluate and
select cycle against the retained sites.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .kb import (KnowledgeBase, LexicalEntry, NONE_SENSE, OK, UNKNOWN,
                 VIOLATION, UnknownWordError)
from .structures import (Alternative, CONSUMED, Counters, ParseState,
                         StructureError, VIABLE, VIOLATING, attach, detach,
                         reactivation_order, retain, specialize_role)
from . import semantics
from . import syntax
from .syntax import ADOPT, FRONTIER, AttachmentSite, ChainLink, get_template

LESIONS = frozenset({"syntax", "semantics", "link"})

_SEM_RANK = {OK: 0, UNKNOWN: 1, VIOLATION: 2}

COMPLETE = "complete"
FRAGMENTS = "fragments"


class RecoveryInvariantError(AssertionError):
    """A repair constructed parse nodes; subtree reuse was violated."""


@dataclass(frozen=True)
class PreferenceVector:
    """Lexicographic candidate order: semantic class, expectation
    satisfaction, site depth (shallower wins), grammar file order."""

    semantic: str
    expectation_satisfied: bool
    recency: int
    template_rank: int

    def sort_key(self) -> tuple:
        return (_SEM_RANK[self.semantic], 0 if self.expectation_satisfied else 1,
                self.recency, self.template_rank)

    def as_tuple(self) -> tuple:
        return (self.semantic, self.expectation_satisfied,
                self.recency, self.template_rank)


@dataclass(frozen=True)
class EngineConfig:
    capacity: int | None = None
    lesion: frozenset = frozenset()
    unknown_as_noun: bool = False
    trace_verbosity: int = 1

    def __post_init__(self):
        bad = set(self.lesion) - LESIONS
        if bad:
            raise ValueError(f"unknown lesion(s): {sorted(bad)}")


@dataclass(frozen=True)
class Candidate:
    entry: LexicalEntry
    entry_index: int
    site: AttachmentSite
    vector: PreferenceVector
    display: str


@dataclass
class Interpretation:
    status: str
    parse_roots: tuple[int, ...]
    role_roots: tuple[int, ...]
    meaning_roots: tuple[int, ...]
    counters: Counters
    trace: tuple[str, ...]
    recovery_deltas: tuple[int, ...]
    state: ParseState = field(repr=False, default=None)
    tokens: tuple[str, ...] = ()


def tokenize(text: str) -> list[str]:
    """Whitespace tokens, ASCII-lowercased, trailing punctuation stripped."""
    tokens = []
    for raw in text.split():
        word = raw.strip(".!?,;").lower()
        if word:
            tokens.append(word)
    return tokens


def process_sentence(tokens: list[str], kb: KnowledgeBase,
                     config: EngineConfig | None = None) -> Interpretation:
    """Deterministically interpret one tokenized sentence."""
    if not tokens:
        raise ValueError("empty input")
    return Engine(kb, config or EngineConfig()).parse(tokens)


class Engine:
    """One engine instance interprets one sentence; no shared mutable state."""

    def __init__(self, kb: KnowledgeBase, config: EngineConfig):
        self.kb = kb
        self.config = config
        self.lesion = frozenset(config.lesion)

    # -- public ---------------------------------------------------------

    def parse(self, tokens: list[str]) -> Interpretation:
        state = ParseState()
        for index, word in enumerate(tokens):
            state = self._step(state, word.lower(), index)
        if "syntax" in self.lesion and "semantics" not in self.lesion:
            _, binds = semantics.semantic_fragments(self.kb, state,
                                                    sorted(state.meanings))
            for role, filler, binder in binds:
                self._emit(state, f"BIND role={role} "
                           f"filler={state.meanings[filler].tag} "
                           f"head={state.meanings[binder].tag}")
        return self._interpretation(state, tokens)

    # -- per-word cycle ---------------------------------------------------

    def _step(self, state: ParseState, word: str, index: int) -> ParseState:
        entries = self._access(state, word, index)
        if "syntax" in self.lesion:
            self._semantic_only(state, entries)
            return state

        leaf = state.new_node(entries[0].category, (index, index + 1), word=word)
        candidates = self._propose(state, leaf.id, entries,
                                   allow_root=not state.roots)
        if not candidates:
            self._emit(state, f"FAIL node={leaf.id} reason=no-site")
            recovered, state = self._recover(state, leaf.id, entries)
            if recovered:
                candidates = self._propose(state, leaf.id, entries,
                                           allow_root=False)
            else:
                self._emit(state, f"FAIL node={leaf.id} reason=recovery-exhausted")
                candidates = self._propose(state, leaf.id, entries,
                                           allow_root=True)
        if not candidates:
            # no template accepts the word at all: bare fragment
            self._commit_leaf(state, leaf.id, entries[0], 0)
            state.roots.append(leaf.id)
            return state
        chosen, retained = self._select(state, leaf.id, candidates, index)
        top_id = self._commit(state, leaf.id, chosen)
        for alt in retained:
            alt.chosen_node = top_id
        if not self.lesion & {"semantics", "link"}:
            self._sync_fragment(state, state.root_of(leaf.id), index)
        return state

    # -- access -----------------------------------------------------------

    def _access(self, state: ParseState, word: str, index: int):
        try:
            entries = self.kb.lexical_access(word, index)
        except UnknownWordError:
            if not self.config.unknown_as_noun:
                raise
            entries = (LexicalEntry(word, "N", "common", "GENERIC-THING"),)
        listing = ",".join(e.describe() for e in entries)
        self._emit(state, f"ACCESS w={word} entries=[{listing}]")
        return entries

    def _semantic_only(self, state: ParseState, entries) -> None:
        if "semantics" in self.lesion:
            return
        entry = next((e for e in entries if e.sense != NONE_SENSE), None)
        if entry is None:
            return
        instance = state.new_meaning(entry.sense)
        label = semantics.primitive_role(self.kb, entry.category)
        if label:
            role = state.new_role(label, filler=instance.id)
            instance.role_node = role.id

    # -- propose / evaluate / select ---------------------------------------

    def _propose(self, state: ParseState, leaf_id: int, entries,
                 allow_root: bool) -> list[Candidate]:
        start = state.nodes[leaf_id].span[0]
        candidates = []
        for entry_index, entry in enumerate(entries):
            sites = syntax.syntactic_candidates(
                self.kb, state, entry.category, entry.subcategory, start,
                allow_root=allow_root)
            for site in sites:
                vector = self._evaluate(state, entry, site)
                candidates.append(Candidate(entry, entry_index, site, vector,
                                            self._display(state, site)))
        listing = ",".join(c.display for c in candidates)
        self._emit(state, f"PROPOSE node={leaf_id} sites=[{listing}]")
        return candidates

    def _display(self, state: ParseState, site: AttachmentSite) -> str:
        if site.kind == FRONTIER:
            parent = site.parent
        elif site.kind == ADOPT:
            # chain nodes are built first, then the adopting parent
            parent = state.next_node_id + len(site.chain)
        else:
            parent = state.next_node_id + len(site.chain) - 1
        return f"{parent}.{site.position + 1}"

    def _chain_concept(self, entry: LexicalEntry, chain) -> str | None:
        """Concept reaching the chain top, None once a non-head link breaks
        the percolation (a PP's meaning waits for its NP)."""
        concept = entry.sense if entry.sense != NONE_SENSE else None
        for link in chain:
            template = self.kb.categories[link.category].templates[link.template_index]
            if link.position != template.head:
                return None
        return concept

    def _concept_of(self, state: ParseState, meaning_id: int | None) -> str | None:
        if meaning_id is None:
            return None
        return state.meanings[meaning_id].concept

    def _evaluate(self, state: ParseState, entry: LexicalEntry,
                  site: AttachmentSite) -> PreferenceVector:
        expectation = syntax.expectation_satisfied(site, self.kb)
        rank = get_template(self.kb, site.template_ref).rank
        if self.lesion & {"semantics", "link"}:
            return PreferenceVector(UNKNOWN, expectation, site.depth, rank)

        sem = UNKNOWN
        template = get_template(self.kb, site.template_ref)
        top_concept = self._chain_concept(entry, site.chain)
        prep = entry if entry.prep_roles else None
        if site.kind == FRONTIER:
            parent = state.nodes[site.parent]
            spec = template.positions[site.position]
            _, sem, _ = semantics.role_assignment(
                self.kb, spec, self._concept_of(state, parent.meaning),
                top_concept, prep)
        elif site.kind == ADOPT:
            head_concept = top_concept if site.position == template.head else None
            if head_concept is None:
                for root_id, pos in site.consumed:
                    if pos == template.head:
                        head_concept = self._concept_of(
                            state, state.nodes[root_id].meaning)
            results = []
            for root_id, pos in site.consumed:
                spec = template.positions[pos]
                child_concept = self._concept_of(state, state.nodes[root_id].meaning)
                _, result, _ = semantics.role_assignment(
                    self.kb, spec, head_concept, child_concept, prep)
                results.append(result)
            if VIOLATION in results:
                sem = VIOLATION
            elif OK in results:
                sem = OK
        return PreferenceVector(sem, expectation, site.depth, rank)

    def _candidate_key(self, cand: Candidate) -> tuple:
        parent, pos = cand.display.split(".")
        return cand.vector.sort_key() + (int(parent), int(pos), cand.entry_index)

    def _select(self, state: ParseState, leaf_id: int,
                candidates: list[Candidate],
                token: int) -> tuple[Candidate, list[Alternative]]:
        ranked = sorted(candidates, key=self._candidate_key)
        for cand in ranked:
            self._emit_evaluate(state, cand.display, cand.vector)
        chosen, rest = ranked[0], ranked[1:]
        retained = []
        for cand in rest:
            alt = Alternative(
                id=state.next_alt_id,
                child=leaf_id,
                parent=cand.site.parent,
                template_ref=cand.site.template_ref,
                position=cand.site.position,
                chain=cand.site.chain,
                entry_index=cand.entry_index,
                preference=cand.vector.as_tuple(),
                status=VIOLATING if cand.vector.semantic == VIOLATION else VIABLE,
                birth=token)
            state.next_alt_id += 1
            retained.append(alt)
            retain(state, alt, self.config.capacity)
        listing = ",".join(str(a.id) for a in retained)
        self._emit(state, f"SELECT site={chosen.display} retained=[{listing}]")
        return chosen, retained

    def _emit_evaluate(self, state: ParseState, display: str,
                       vector: PreferenceVector) -> None:
        self._emit(state, f"EVALUATE site={display} sem={vector.semantic} "
                   f"exp={1 if vector.expectation_satisfied else 0} "
                   f"rec={vector.recency} tmpl={vector.template_rank}")

    # -- commit -------------------------------------------------------------

    def _commit_leaf(self, state: ParseState, leaf_id: int,
                     entry: LexicalEntry, entry_index: int) -> None:
        leaf = state.nodes[leaf_id]
        leaf.category = entry.category
        leaf.features = (entry.subcategory,)
        leaf.entry_index = entry_index
        if "semantics" not in self.lesion and entry.sense != NONE_SENSE:
            instance = state.new_meaning(entry.sense)
            leaf.meaning = instance.id
            label = semantics.primitive_role(self.kb, entry.category)
            if label:
                role = state.new_role(label, filler=instance.id)
                instance.role_node = role.id
                leaf.role = role.id

    def _commit(self, state: ParseState, leaf_id: int, cand: Candidate) -> int:
        self._commit_leaf(state, leaf_id, cand.entry, cand.entry_index)
        site = cand.site
        cursor = state.nodes[leaf_id]
        for link in site.chain:
            template = self.kb.categories[link.category].templates[link.template_index]
            node = state.new_node(link.category, cursor.span,
                                  features=(link.feature,) if link.feature else (),
                                  template_ref=(link.category, link.template_index))
            attach(state, cursor.id, node.id, link.position, template.positions)
            cursor = node

        if site.kind == FRONTIER:
            parent = state.nodes[site.parent]
            positions = get_template(self.kb, parent.template_ref).positions
            attach(state, cursor.id, parent.id, site.position, positions)
        elif site.kind == ADOPT:
            template = get_template(self.kb, site.template_ref)
            first = state.nodes[site.consumed[0][0]]
            adopter = state.new_node(site.template_ref[0],
                                     (first.span[0], first.span[0]),
                                     template_ref=site.template_ref)
            for root_id, pos in site.consumed:
                attach(state, root_id, adopter.id, pos, template.positions)
            attach(state, cursor.id, adopter.id, site.position, template.positions)
            state.roots.append(adopter.id)
        else:  # ROOT: the chain top founds a new fragment
            state.roots.append(cursor.id)
        return cursor.id

    # -- meaning propagation and binding -------------------------------------

    def _node_entry(self, state: ParseState, node) -> LexicalEntry | None:
        if node.word is None or node.entry_index is None:
            return None
        return self.kb.words[node.word][node.entry_index]

    def _prep_entry_of(self, state: ParseState, node_id: int) -> LexicalEntry | None:
        for nid in state.subtree_ids(node_id):
            entry = self._node_entry(state, state.nodes[nid])
            if entry is not None and entry.prep_roles:
                return entry
        return None

    def _sync_fragment(self, state: ParseState, root_id: int, token: int) -> None:
        """Percolate meanings up head positions, then bind every parent and
        child pair whose meanings have both arrived.  A selectional
        violation re-opens the choice against retained alternatives, which
        can repair the tree, so the pass restarts until it is quiet."""
        limit = 4 + 2 * len(state.nodes)
        for _ in range(limit):
            repaired = self._sync_pass(state, state.root_of(root_id), token)
            if not repaired:
                return
        raise RecoveryInvariantError("semantic re-selection did not settle")

    def _sync_pass(self, state: ParseState, root_id: int, token: int) -> bool:
        order = self._post_order(state, root_id)
        for node_id in order:
            node = state.nodes[node_id]
            if node.template_ref is None:
                continue
            template = get_template(self.kb, node.template_ref)
            head_child = None
            for child_id, pos in zip(node.children, node.child_positions):
                if pos == template.head:
                    head_child = state.nodes[child_id]
            node.meaning = head_child.meaning if head_child else None
            node.role = head_child.role if head_child else None
        for node_id in order:
            node = state.nodes[node_id]
            if node.template_ref is None:
                continue
            template = get_template(self.kb, node.template_ref)
            for child_id, pos in zip(list(node.children), list(node.child_positions)):
                if pos == template.head:
                    continue
                edge = (node_id, child_id)
                if edge in state.bindings or edge in state.failed_binds:
                    continue
                child = state.nodes[child_id]
                spec = template.positions[pos]
                parent_concept = self._concept_of(state, node.meaning)
                child_concept = self._concept_of(state, child.meaning)
                if child_concept is None:
                    continue  # pending: the child's meaning has not arrived
                if parent_concept is None and (spec.role or spec.prep_level
                                               or spec.into_child):
                    continue  # pending: the governing meaning is not there yet
                prep = self._prep_entry_of(state, child_id)
                role, result, direction = semantics.role_assignment(
                    self.kb, spec, parent_concept, child_concept, prep)
                if role is None:
                    state.failed_binds.add(edge)
                    continue
                if result == OK:
                    self._record_bind(state, node_id, child_id, role, direction)
                elif result == VIOLATION:
                    if self._reselect_on_violation(state, node_id, child_id,
                                                   spec, token):
                        return True
                    state.failed_binds.add(edge)
                else:
                    state.failed_binds.add(edge)
        return False

    def _post_order(self, state: ParseState, root_id: int) -> list[int]:
        out = []

        def visit(node_id: int):
            for child in state.nodes[node_id].children:
                visit(child)
            out.append(node_id)

        visit(root_id)
        return out

    def _record_bind(self, state: ParseState, parent_id: int, child_id: int,
                     role: str, direction: str) -> None:
        parent = state.nodes[parent_id]
        child = state.nodes[child_id]
        if direction == semantics.DOWN:
            binder_mid, filler_mid = parent.meaning, child.meaning
        else:
            binder_mid, filler_mid = child.meaning, parent.meaning
        binder = state.meanings[binder_mid]
        filler = state.meanings[filler_mid]
        binder.bindings[role] = filler_mid

        role_node = state.role_nodes.get(filler.role_node)
        fresh_needed = (role_node is None or role_node.dead
                        or role_node.parent is not None
                        or not self.kb.role_reachable(role_node.label, role))
        if fresh_needed:
            base = role_node.history[0] if role_node is not None else role
            role_node = state.new_role(base, filler=filler_mid)
            filler.role_node = role_node.id
        specialize_role(state, role_node.id, role, self.kb)
        binder_role = state.role_nodes.get(binder.role_node)
        if binder_role is not None:
            role_node.parent = binder_role.id
            binder_role.children.append(role_node.id)
        state.bindings[(parent_id, child_id)] = (binder_mid, role,
                                                 filler_mid, role_node.id)
        self._emit(state, f"BIND role={role} filler={filler.tag} head={binder.tag}")

    def _unbind_edge(self, state: ParseState, parent_id: int, child_id: int) -> None:
        record = state.bindings.pop((parent_id, child_id), None)
        state.failed_binds.discard((parent_id, child_id))
        if record is None:
            return
        binder_mid, role, filler_mid, role_node_id = record
        binder = state.meanings[binder_mid]
        if binder.bindings.get(role) == filler_mid:
            del binder.bindings[role]
        role_node = state.role_nodes[role_node_id]
        role_node.dead = True
        if role_node.parent is not None:
            parent_role = state.role_nodes[role_node.parent]
            if role_node_id in parent_role.children:
                parent_role.children.remove(role_node_id)
            role_node.parent = None

    # -- repairs ---------------------------------------------------------

    def _chain_path(self, state: ParseState, leaf_id: int, top_id: int) -> list[int]:
        """Node ids strictly above the leaf up to the subtree root,
        or [] when the leaf is the root or disconnected from it."""
        path = []
        cursor = leaf_id
        while cursor != top_id:
            cursor = state.nodes[cursor].parent
            if cursor is None:
                return []
            path.append(cursor)
        return path

    def _relabel(self, state: ParseState, alt: Alternative, top_id: int) -> bool:
        """Recast the chosen subtree as the alternative's projection chain:
        same nodes and ids, new categories, templates and features."""
        leaf = state.nodes[alt.child]
        path = self._chain_path(state, alt.child, top_id)
        if alt.child == top_id:
            path = []
        if len(path) != len(alt.chain):
            return False
        entry = self.kb.words[leaf.word][alt.entry_index]
        if leaf.meaning is not None and \
                entry.sense != state.meanings[leaf.meaning].concept:
            return False  # sense swap across a repair is not supported
        planned = {alt.child: (entry.category, entry.subcategory)}
        for node_id, link in zip(path, alt.chain):
            planned[node_id] = (link.category, link.feature)
        plan = []
        for node_id, link in zip(path, alt.chain):
            node = state.nodes[node_id]
            template = self.kb.categories[link.category].templates[link.template_index]
            assignment = self._assign_positions(state, node, template, planned)
            if assignment is None:
                return False
            plan.append((node_id, link, assignment))
        self._commit_leaf_relabel(state, leaf, entry, alt.entry_index)
        for node_id, link, assignment in plan:
            node = state.nodes[node_id]
            node.category = link.category
            node.template_ref = (link.category, link.template_index)
            node.features = (link.feature,) if link.feature else ()
            node.child_positions = assignment
        return True

    def _commit_leaf_relabel(self, state: ParseState, leaf,
                             entry: LexicalEntry, entry_index: int) -> None:
        leaf.category = entry.category
        leaf.features = (entry.subcategory,)
        leaf.entry_index = entry_index

    def _assign_positions(self, state: ParseState, node, template,
                          planned: dict) -> list[int] | None:
        """Greedy left-to-right fit of node's children into the template,
        with planned category overrides for relabeled chain members."""
        assignment = []
        pos = 0
        for cid in node.children:
            cnode = state.nodes[cid]
            cat, feat = planned.get(
                cid, (cnode.category,
                      cnode.features[0] if cnode.features else None))
            placed = False
            while pos < len(template.positions):
                spec = template.positions[pos]
                if spec.accepts(cat, feat):
                    assignment.append(pos)
                    pos += 1
                    placed = True
                    break
                if spec.optional:
                    pos += 1
                else:
                    return None
            if not placed:
                return None
        return assignment

    def _move_subtree(self, state: ParseState, top_id: int,
                      alt: Alternative) -> bool:
        """Detach the subtree chosen over ``alt``, recast it, and attach it
        at the alternative site; only repair-site bindings are redone."""
        node = state.nodes[top_id]
        if node.parent is None or alt.parent is None:
            return False
        if alt.parent in state.subtree_ids(top_id):
            return False
        target = state.nodes.get(alt.parent)
        if target is None or target.template_ref != alt.template_ref:
            return False
        # undo bindings that flowed through the detached head path
        cursor = top_id
        parent_id = node.parent
        while parent_id is not None:
            pnode = state.nodes[parent_id]
            slot = pnode.children.index(cursor)
            template = get_template(self.kb, pnode.template_ref)
            if pnode.child_positions[slot] == template.head:
                for cid in list(pnode.children):
                    self._unbind_edge(state, parent_id, cid)
                cursor, parent_id = parent_id, pnode.parent
            else:
                self._unbind_edge(state, parent_id, cursor)
                break
        detach(state, top_id)
        if not self._relabel(state, alt, top_id):
            return False
        positions = get_template(self.kb, alt.template_ref).positions
        try:
            attach(state, top_id, alt.parent, alt.position, positions)
        except StructureError:
            return False
        return True

    def _recover(self, state: ParseState, leaf_id: int,
                 entries) -> tuple[bool, ParseState]:
        """Examine retained alternatives, most recent first; the first
        repair that gives the failed node a site is committed.  Each
        alternative is tried at most once.  Repairs construct nothing:
        they move, recast and rebind structure that already exists."""
        start = state.nodes[leaf_id].span[0]
        for alt_id in [a.id for a in reactivation_order(state)]:
            original = next(a for a in state.alternatives if a.id == alt_id)
            trial = copy.deepcopy(state)
            original.status = CONSUMED
            trial_alt = next(a for a in trial.alternatives if a.id == alt_id)
            trial_alt.status = CONSUMED
            if trial_alt.chosen_node is None:
                continue
            before = trial.counters.node_constructions
            self._emit(trial, f"RECOVER alt={alt_id} detach={trial_alt.chosen_node} "
                       f"reattach={trial_alt.parent}.{trial_alt.position + 1}")
            if not self._move_subtree(trial, trial_alt.chosen_node, trial_alt):
                continue
            if not self.lesion & {"semantics", "link"}:
                self._sync_fragment(trial, trial_alt.parent, trial_alt.birth)
            delta = trial.counters.node_constructions - before
            if delta != 0:
                raise RecoveryInvariantError(
                    f"recovery constructed {delta} node(s)")
            retry_ok = any(
                syntax.syntactic_candidates(self.kb, trial, entry.category,
                                            entry.subcategory, start)
                for entry in entries)
            if retry_ok:
                trial.counters.recoveries += 1
                trial.recovery_deltas.append(delta)
                return True, trial
        return False, state

    def _reselect_on_violation(self, state: ParseState, parent_id: int,
                               child_id: int, spec, token: int) -> bool:
        """A binding violation re-runs evaluate/select for the already
        placed subtree against its retained alternative sites.  Returns
        True when the tree was repaired."""
        alts = [a for a in state.alternatives
                if a.status != CONSUMED and a.chosen_node == child_id]
        if not alts:
            return False
        parent = state.nodes[parent_id]
        position = parent.child_positions[parent.children.index(child_id)]
        current_vector = PreferenceVector(
            VIOLATION, not spec.optional, state.depth(parent_id),
            get_template(self.kb, parent.template_ref).rank)
        ranked: list[tuple[tuple, PreferenceVector, str, Alternative | None]] = [
            (current_vector.sort_key() + (parent_id, position + 1, 0),
             current_vector, f"{parent_id}.{position + 1}", None)]
        for alt in alts:
            vector = self._evaluate_existing(state, child_id, alt)
            if vector is None:
                continue
            ranked.append((vector.sort_key() + (alt.parent, alt.position + 1, 1),
                           vector, f"{alt.parent}.{alt.position + 1}", alt))
        ranked.sort(key=lambda item: item[0])
        for _, vector, display, _alt in ranked:
            self._emit_evaluate(state, display, vector)
        _, _, best_display, best_alt = ranked[0]
        if best_alt is None:
            self._emit(state, f"SELECT site={best_display} retained=[]")
            return False
        # the abandoned placement stays available, marked as violating
        old_alt = Alternative(
            id=state.next_alt_id, child=best_alt.child, parent=parent_id,
            template_ref=parent.template_ref, position=position,
            chain=self._chain_of(state, best_alt.child, child_id),
            entry_index=state.nodes[best_alt.child].entry_index or 0,
            preference=current_vector.as_tuple(), status=VIOLATING,
            birth=token, chosen_node=child_id)
        state.next_alt_id += 1
        retain(state, old_alt, self.config.capacity)
        self._emit(state, f"SELECT site={best_display} retained=[{old_alt.id}]")
        best_alt.status = CONSUMED
        before = state.counters.node_constructions
        self._emit(state, f"RECOVER alt={best_alt.id} detach={child_id} "
                   f"reattach={best_display}")
        if not self._move_subtree(state, child_id, best_alt):
            raise RecoveryInvariantError("validated repair failed to apply")
        delta = state.counters.node_constructions - before
        if delta != 0:
            raise RecoveryInvariantError(f"recovery constructed {delta} node(s)")
        state.counters.recoveries += 1
        state.recovery_deltas.append(delta)
        return True

    def _chain_of(self, state: ParseState, leaf_id: int,
                  top_id: int) -> tuple[ChainLink, ...]:
        links = []
        prev = leaf_id
        for node_id in self._chain_path(state, leaf_id, top_id):
            node = state.nodes[node_id]
            slot = node.children.index(prev)
            links.append(ChainLink(
                node.category, node.template_ref[1],
                node.child_positions[slot],
                node.features[0] if node.features else None))
            prev = node_id
        return tuple(links)

    def _evaluate_existing(self, state: ParseState, child_id: int,
                           alt: Alternative) -> PreferenceVector | None:
        """Vector for re-placing an existing subtree at a retained site;
        None when the site can no longer take it."""
        if alt.parent is None:
            return None
        parent = state.nodes.get(alt.parent)
        if parent is None or parent.template_ref != alt.template_ref:
            return None
        if alt.parent in state.subtree_ids(child_id):
            return None
        template = get_template(self.kb, alt.template_ref)
        spec = template.positions[alt.position]
        if alt.chain:
            top_cat, top_feat = alt.chain[-1].category, alt.chain[-1].feature
        else:
            entry = self.kb.words[state.nodes[alt.child].word][alt.entry_index]
            top_cat, top_feat = entry.category, entry.subcategory
        if not spec.accepts(top_cat, top_feat):
            return None
        if alt.position not in dict(syntax.open_positions(self.kb, parent)):
            return None
        child = state.nodes[child_id]
        if parent.children and \
                state.nodes[parent.children[-1]].span[1] != child.span[0]:
            return None
        path = self._chain_path(state, alt.child, child_id)
        if alt.child != child_id and len(path) != len(alt.chain):
            return None
        prep = self._prep_entry_of(state, child_id)
        _, result, _ = semantics.role_assignment(
            self.kb, spec, self._concept_of(state, parent.meaning),
            self._concept_of(state, child.meaning), prep)
        return PreferenceVector(result, not spec.optional,
                                state.depth(alt.parent), template.rank)

    # -- interpretation -----------------------------------------------------

    def _interpretation(self, state: ParseState, tokens) -> Interpretation:
        n = len(tokens)
        complete = ("syntax" not in self.lesion
                    and len(state.roots) == 1
                    and state.nodes[state.roots[0]].category == "S"
                    and state.nodes[state.roots[0]].span == (0, n)
                    and syntax.recursively_complete(self.kb, state, state.roots[0]))
        fillers = set()
        for instance in state.meanings.values():
            fillers.update(instance.bindings.values())
        meaning_roots = tuple(mid for mid in state.meanings if mid not in fillers)
        role_roots = tuple(rid for rid, role in state.role_nodes.items()
                           if not role.dead and role.parent is None)
        return Interpretation(
            status=COMPLETE if complete else FRAGMENTS,
            parse_roots=tuple(state.roots),
            role_roots=role_roots,
            meaning_roots=meaning_roots,
            counters=state.counters,
            trace=tuple(state.trace),
            recovery_deltas=tuple(state.recovery_deltas),
            state=state,
            tokens=tuple(tokens))

    def _emit(self, state: ParseState, line: str) -> None:
        state.trace.append(line)
