"""Knowledge sources: lexicon, syntactic category network, concept network.

A loaded ``KnowledgeBase`` is immutable and safe to share across any
number of concurrent parses.  All cross-references are resolved at load
time and the ISA graph is checked for cycles, so downstream code never
has to defend against dangling identifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .sexpr import Sym, SexprError, is_identifier, parse_sexprs

NONE_SENSE = "NONE"

OK = "OK"
UNKNOWN = "UNKNOWN"
VIOLATION = "VIOLATION"


class KbError(ValueError):
    """Any defect in the knowledge-base files."""


class UnknownWordError(KeyError):
    def __init__(self, word: str, index: int):
        super().__init__(word)
        self.word = word
        self.index = index

    def __str__(self):
        return f"UNKNOWN_WORD: {self.word!r} at token {self.index}"


@dataclass(frozen=True)
class LexicalEntry:
    word: str
    category: str
    subcategory: str
    sense: str
    # attachment level -> role label, for prepositions
    prep_roles: tuple[tuple[str, str], ...] = ()

    def prep_role(self, level: str) -> str | None:
        for lvl, label in self.prep_roles:
            if lvl == level:
                return label
        return None

    def describe(self) -> str:
        return f"{self.category}/{self.subcategory}/{self.sense}"


@dataclass(frozen=True)
class PositionSpec:
    """One slot of a constituent template."""

    category: str
    subcat: str | None = None
    optional: bool = False
    role: str | None = None
    prep_level: str | None = None
    into_child: str | None = None

    def accepts(self, category: str, feature: str | None) -> bool:
        if category != self.category:
            return False
        if self.subcat is not None and feature != self.subcat:
            return False
        return True


@dataclass(frozen=True)
class Template:
    category: str
    positions: tuple[PositionSpec, ...]
    head: int          # 0-based index into positions
    rank: int          # global grammar-file order, the tie-breaking key
    index: int         # index within the owning category


@dataclass(frozen=True)
class CategoryNode:
    name: str
    templates: tuple[Template, ...] = ()
    primitive_role: str | None = None

    @property
    def lexical(self) -> bool:
        return not self.templates


@dataclass(frozen=True)
class ConceptNode:
    name: str
    isa: tuple[str, ...] = ()
    slots: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class KnowledgeBase:
    words: dict[str, tuple[LexicalEntry, ...]]
    categories: dict[str, CategoryNode]
    concepts: dict[str, ConceptNode]
    roles: dict[str, tuple[str, ...]]   # label -> direct specializations
    templates: tuple[Template, ...] = field(default=())

    # -- lexicon ------------------------------------------------------

    def lexical_access(self, word: str, index: int = 0) -> tuple[LexicalEntry, ...]:
        """All entries for ``word`` in lexicon order, never pre-filtered."""
        entries = self.words.get(word.lower())
        if not entries:
            raise UnknownWordError(word, index)
        return entries

    # -- concepts -----------------------------------------------------

    def isa_subsumes(self, concept: str, restriction: str) -> bool:
        """True iff ``restriction`` is reachable from ``concept`` via ISA."""
        if concept not in self.concepts or restriction not in self.concepts:
            raise KbError(f"undefined concept in isa_subsumes: "
                          f"{concept if concept not in self.concepts else restriction}")
        seen = set()
        frontier = [concept]
        while frontier:
            name = frontier.pop()
            if name == restriction:
                return True
            if name in seen:
                continue
            seen.add(name)
            frontier.extend(self.concepts[name].isa)
        return False

    def find_slot(self, concept: str, role: str) -> str | None:
        """Restriction for ``role`` on ``concept``, inherited via ISA."""
        seen = set()
        frontier = [concept]
        while frontier:
            name = frontier.pop(0)
            if name in seen:
                continue
            seen.add(name)
            node = self.concepts[name]
            for label, restriction in node.slots:
                if label == role:
                    return restriction
            frontier.extend(node.isa)
        return None

    # -- roles --------------------------------------------------------

    def role_reachable(self, source: str, target: str) -> bool:
        if source == target:
            return True
        seen = set()
        frontier = [source]
        while frontier:
            label = frontier.pop()
            if label == target:
                return True
            if label in seen:
                continue
            seen.add(label)
            frontier.extend(self.roles.get(label, ()))
        return False


# ---------------------------------------------------------------------
# loading


def _expect_sym(value, what: str) -> str:
    if not is_identifier(value):
        raise KbError(f"expected identifier for {what}, got {value!r}")
    return str(value)


def _subforms(form: list, tag: str) -> list[list]:
    return [f for f in form if isinstance(f, list) and f and f[0] == Sym(tag)]


def _parse_lexicon(text: str) -> dict[str, tuple[LexicalEntry, ...]]:
    words: dict[str, tuple[LexicalEntry, ...]] = {}
    for form in parse_sexprs(text):
        if not form or form[0] != Sym("word"):
            raise KbError(f"lexicon: expected (word ...) form, got {form!r}")
        if len(form) < 3 or not isinstance(form[1], str) or isinstance(form[1], Sym):
            raise KbError("lexicon: (word ...) needs a quoted surface form")
        surface = form[1].lower()
        entries = []
        for entry_form in form[2:]:
            if not isinstance(entry_form, list) or not entry_form or entry_form[0] != Sym("entry"):
                raise KbError(f"lexicon: bad entry in {surface!r}: {entry_form!r}")
            fields = {"cat": None, "subcat": None, "sense": None}
            prep_roles = []
            for part in entry_form[1:]:
                if not isinstance(part, list) or len(part) < 2:
                    raise KbError(f"lexicon: bad entry field in {surface!r}: {part!r}")
                tag = str(part[0])
                if tag in fields:
                    fields[tag] = _expect_sym(part[1], f"{surface}.{tag}")
                elif tag == "role":
                    if len(part) != 3:
                        raise KbError(f"lexicon: (role LEVEL LABEL) expected in {surface!r}")
                    prep_roles.append((_expect_sym(part[1], "role level"),
                                       _expect_sym(part[2], "role label")))
                else:
                    raise KbError(f"lexicon: unknown entry field {tag!r} in {surface!r}")
            missing = [k for k, v in fields.items() if v is None]
            if missing:
                raise KbError(f"lexicon: entry for {surface!r} lacks {missing}")
            entries.append(LexicalEntry(surface, fields["cat"], fields["subcat"],
                                        fields["sense"], tuple(prep_roles)))
        if surface in words:
            raise KbError(f"lexicon: duplicate word {surface!r}")
        words[surface] = tuple(entries)
    return words


def _parse_position(part: list, where: str) -> PositionSpec:
    if not part or not is_identifier(part[0]):
        raise KbError(f"grammar: bad template position in {where}: {part!r}")
    category = str(part[0])
    kwargs: dict = {}
    i = 1
    while i < len(part):
        key = part[i]
        if key == Sym(":opt"):
            kwargs["optional"] = True
            i += 1
        elif key == Sym(":subcat"):
            kwargs["subcat"] = _expect_sym(part[i + 1], f"{where} :subcat")
            i += 2
        elif key == Sym(":role"):
            kwargs["role"] = _expect_sym(part[i + 1], f"{where} :role")
            i += 2
        elif key == Sym(":prep-role"):
            kwargs["prep_level"] = _expect_sym(part[i + 1], f"{where} :prep-role")
            i += 2
        elif key == Sym(":into-child"):
            kwargs["into_child"] = _expect_sym(part[i + 1], f"{where} :into-child")
            i += 2
        else:
            raise KbError(f"grammar: unknown position annotation {key!r} in {where}")
    return PositionSpec(category, **kwargs)


def _parse_grammar(text: str) -> dict[str, CategoryNode]:
    categories: dict[str, CategoryNode] = {}
    rank = 0
    for form in parse_sexprs(text):
        if not form or form[0] != Sym("category"):
            raise KbError(f"grammar: expected (category ...) form, got {form!r}")
        name = _expect_sym(form[1], "category name")
        if name in categories:
            raise KbError(f"grammar: duplicate category {name}")
        head_forms = _subforms(form, "head")
        role_forms = _subforms(form, "role")
        template_forms = _subforms(form, "template")
        primitive_role = None
        if role_forms:
            primitive_role = _expect_sym(role_forms[0][1], f"{name} role")
        templates = []
        for t_index, t_form in enumerate(template_forms):
            positions = tuple(_parse_position(p, name) for p in t_form[1:])
            if not positions:
                raise KbError(f"grammar: empty template in {name}")
            if not head_forms or not isinstance(head_forms[0][1], int):
                raise KbError(f"grammar: category {name} has templates but no (head N)")
            head = head_forms[0][1] - 1
            if not 0 <= head < len(positions):
                raise KbError(f"grammar: head {head + 1} out of range in {name}")
            templates.append(Template(name, positions, head, rank, t_index))
            rank += 1
        categories[name] = CategoryNode(name, tuple(templates), primitive_role)
    if not categories:
        raise KbError("no categories defined")
    return categories


def _parse_concepts(text: str) -> tuple[dict[str, ConceptNode], dict[str, tuple[str, ...]]]:
    concepts: dict[str, ConceptNode] = {}
    roles: dict[str, tuple[str, ...]] = {}
    for form in parse_sexprs(text):
        if form and form[0] == Sym("concept"):
            name = _expect_sym(form[1], "concept name")
            if name in concepts:
                raise KbError(f"concepts: duplicate concept {name}")
            isa = tuple(_expect_sym(p, f"{name} isa")
                        for f in _subforms(form, "isa") for p in f[1:])
            slots = []
            for slot_form in _subforms(form, "slot"):
                if len(slot_form) != 3:
                    raise KbError(f"concepts: (slot LABEL RESTRICTION) expected in {name}")
                slots.append((_expect_sym(slot_form[1], f"{name} slot label"),
                              _expect_sym(slot_form[2], f"{name} slot restriction")))
            concepts[name] = ConceptNode(name, isa, tuple(slots))
        elif form and form[0] == Sym("role"):
            label = _expect_sym(form[1], "role label")
            if label in roles:
                raise KbError(f"concepts: duplicate role {label}")
            spec = tuple(_expect_sym(p, f"role {label} specializes")
                         for f in _subforms(form, "specializes") for p in f[1:])
            roles[label] = spec
        else:
            raise KbError(f"concepts: expected (concept ...) or (role ...), got {form!r}")
    return concepts, roles


def _check_isa_acyclic(concepts: dict[str, ConceptNode]) -> None:
    WHITE, GREY, BLACK = 0, 1, 2
    state = {name: WHITE for name in concepts}

    def visit(name: str, path: list[str]):
        state[name] = GREY
        path.append(name)
        for parent in concepts[name].isa:
            if state[parent] == GREY:
                cycle = path[path.index(parent):]
                raise KbError(f"ISA cycle: {{{', '.join(sorted(set(cycle)))}}}")
            if state[parent] == WHITE:
                visit(parent, path)
        path.pop()
        state[name] = BLACK

    for name in concepts:
        if state[name] == WHITE:
            visit(name, [])


def _validate(kb: KnowledgeBase) -> None:
    for name, concept in kb.concepts.items():
        for parent in concept.isa:
            if parent not in kb.concepts:
                raise KbError(f"concept {name}: dangling isa reference {parent}")
        for label, restriction in concept.slots:
            if restriction not in kb.concepts:
                raise KbError(f"concept {name}: dangling slot restriction {restriction}")
            if label not in kb.roles:
                raise KbError(f"concept {name}: slot label {label} not a defined role")
    _check_isa_acyclic(kb.concepts)
    for label, targets in kb.roles.items():
        for target in targets:
            if target not in kb.roles:
                raise KbError(f"role {label}: dangling specialization {target}")
    for name, category in kb.categories.items():
        if category.primitive_role and category.primitive_role not in kb.roles:
            raise KbError(f"category {name}: primitive role {category.primitive_role} undefined")
        for template in category.templates:
            for pos in template.positions:
                if pos.category not in kb.categories:
                    raise KbError(f"category {name}: template references "
                                  f"undefined category {pos.category}")
                if pos.role and pos.role not in kb.roles:
                    raise KbError(f"category {name}: position role {pos.role} undefined")
                if pos.into_child and pos.into_child not in kb.roles:
                    raise KbError(f"category {name}: into-child role {pos.into_child} undefined")
    for word, entries in kb.words.items():
        for entry in entries:
            if entry.category not in kb.categories:
                raise KbError(f"word {word!r}: dangling category {entry.category}")
            if entry.sense != NONE_SENSE and entry.sense not in kb.concepts:
                raise KbError(f"word {word!r}: dangling sense {entry.sense}")
            for _, label in entry.prep_roles:
                if label not in kb.roles:
                    raise KbError(f"word {word!r}: dangling role label {label}")


def load_kb(lexicon_text: str, grammar_text: str, concepts_text: str) -> KnowledgeBase:
    """Load and validate the three knowledge sources from document text."""
    try:
        words = _parse_lexicon(lexicon_text)
        categories = _parse_grammar(grammar_text)
        concepts, roles = _parse_concepts(concepts_text)
    except SexprError as exc:
        raise KbError(f"syntax error: {exc}") from exc
    templates = tuple(t for cat in categories.values() for t in cat.templates)
    kb = KnowledgeBase(words, categories, concepts, roles,
                       tuple(sorted(templates, key=lambda t: t.rank)))
    _validate(kb)
    return kb


def load_kb_dir(path) -> KnowledgeBase:
    """Load lexicon.sexp, grammar.sexp and concepts.sexp from a directory."""
    from pathlib import Path

    base = Path(path)
    texts = []
    for name in ("lexicon.sexp", "grammar.sexp", "concepts.sexp"):
        file = base / name
        if not file.is_file():
            raise KbError(f"missing knowledge-base file: {file}")
        texts.append(file.read_text(encoding="utf-8"))
    return load_kb(*texts)


def load_default_kb() -> KnowledgeBase:
    """Load the knowledge base bundled with the package."""
    data = resources.files(__package__) / "data"
    return load_kb((data / "lexicon.sexp").read_text(encoding="utf-8"),
                   (data / "grammar.sexp").read_text(encoding="utf-8"),
                   (data / "concepts.sexp").read_text(encoding="utf-8"))
