import random

import pytest
from hypothesis import given, settings, strategies as st

from parsemend.kb import KbError, UnknownWordError, load_kb
from parsemend import load_default_kb

MINI_GRAMMAR = """
(category NP (template (Det :opt) (N)) (head 2) (role THING))
(category Det)
(category N (role THING))
"""

MINI_CONCEPTS = """
(concept PHYSICAL-OBJECT)
(concept HORSE (isa PHYSICAL-OBJECT))
(role THING)
"""


def test_shipped_kb_sizes(kb):
    assert len(kb.words) >= 14
    assert len(kb.categories) >= 11
    assert len(kb.concepts) >= 15


def test_lexical_access_saw_both_entries(kb):
    entries = kb.lexical_access("saw")
    assert [e.describe() for e in entries] == \
        ["V/transitive/SEE", "N/common/SAW-TOOL"]


def test_lexical_access_taught_both_analyses(kb):
    entries = kb.lexical_access("taught")
    assert [e.describe() for e in entries] == \
        ["V/past-transitive/TEACH", "V/passive-participle/TEACH"]


def test_lexical_access_case_folds(kb):
    assert kb.lexical_access("The") == kb.lexical_access("the")


def test_unknown_word_carries_token_index(kb):
    with pytest.raises(UnknownWordError) as info:
        kb.lexical_access("blorf", 3)
    assert info.value.index == 3


def test_isa_subsumes_examples(kb):
    assert kb.isa_subsumes("HORSE", "PHYSICAL-OBJECT")
    assert not kb.isa_subsumes("HORSE", "OPTICAL-INSTRUMENT")
    assert kb.isa_subsumes("SEE", "SEE")


def test_isa_reflexive_transitive_antisymmetric(kb):
    names = list(kb.concepts)
    for a in names:
        assert kb.isa_subsumes(a, a)
    for a in names:
        for b in names:
            for c in names:
                if kb.isa_subsumes(a, b) and kb.isa_subsumes(b, c):
                    assert kb.isa_subsumes(a, c)
            if a != b and kb.isa_subsumes(a, b):
                assert not kb.isa_subsumes(b, a)


def test_isa_subsumes_undefined_identifier(kb):
    with pytest.raises(KbError):
        kb.isa_subsumes("HORSE", "UNICORN")


def test_empty_grammar_rejected():
    with pytest.raises(KbError, match="no categories"):
        load_kb("", "", MINI_CONCEPTS)


def test_isa_cycle_names_members():
    concepts = "(concept HORSE (isa ANIMAL))\n(concept ANIMAL (isa HORSE))\n(role THING)"
    with pytest.raises(KbError, match="ANIMAL.*HORSE|HORSE.*ANIMAL"):
        load_kb("", MINI_GRAMMAR, concepts)


def test_prep_role_mapping(kb):
    (entry,) = kb.lexical_access("with")
    assert entry.prep_role("vp") == "INSTRUMENT"
    assert entry.prep_role("np") == "ACCOMPANIMENT"
    assert entry.prep_role("xx") is None


def test_slot_inheritance(kb):
    # ACCOMPANIMENT is declared on PHYSICAL-OBJECT and inherited by WOMAN
    assert kb.find_slot("WOMAN", "ACCOMPANIMENT") == "PHYSICAL-OBJECT"
    assert kb.find_slot("SEE", "INSTRUMENT") == "OPTICAL-INSTRUMENT"
    assert kb.find_slot("SEE", "LOCATION") is None


def test_role_specialization_graph(kb):
    assert kb.role_reachable("THING", "ACTOR")
    assert kb.role_reachable("THING", "OBJECT")
    assert not kb.role_reachable("OBJECT", "ACTOR")
    assert not kb.role_reachable("EVENT", "ACTOR")


# -- loader rejects broken cross-references --------------------------------


def _shipped_texts():
    from importlib import resources

    data = resources.files("parsemend") / "data"
    return [(data / name).read_text()
            for name in ("lexicon.sexp", "grammar.sexp", "concepts.sexp")]


@pytest.mark.parametrize("target, mutation", [
    ("lexicon", ("(sense SEE)", "(sense SEF)")),
    ("lexicon", ("(cat Det)", "(cat Dez)")),
    ("grammar", ("(template (Det :opt)", "(template (Dez :opt)")),
    ("grammar", ("(role EVENT)", "(role EVENZ)")),
    ("concepts", ("(isa ANIMATE)", "(isa ANIMATF)")),
    ("concepts", ("(slot ACTOR ANIMATE)", "(slot ACTOR ANIMATF)")),
])
def test_single_character_mutations_rejected(target, mutation):
    lexicon, grammar, concepts = _shipped_texts()
    old, new = mutation
    texts = {"lexicon": lexicon, "grammar": grammar, "concepts": concepts}
    assert old in texts[target]
    texts[target] = texts[target].replace(old, new, 1)
    with pytest.raises(KbError):
        load_kb(texts["lexicon"], texts["grammar"], texts["concepts"])


def test_shipped_kb_is_loadable_total():
    lexicon, grammar, concepts = _shipped_texts()
    kb = load_kb(lexicon, grammar, concepts)
    assert kb.lexical_access("saw")


# -- multiple access is never filtered -------------------------------------


def _random_lexicon(rng: random.Random) -> dict[str, int]:
    """Random lexicon text over the shipped grammar's lexical categories;
    returns the expected entry count per word."""
    cats = [("Det", "definite"), ("N", "common"), ("V", "transitive"),
            ("P", "plain"), ("Adj", "common"), ("Adv", "degree")]
    words = {}
    lines = []
    for i in range(rng.randint(1, 12)):
        word = f"w{i}"
        count = rng.randint(1, 4)
        entries = []
        for _ in range(count):
            cat, subcat = rng.choice(cats)
            entries.append(f'(entry (cat {cat}) (subcat {subcat}) (sense HORSE))')
        lines.append(f'(word "{word}" {" ".join(entries)})')
        words[word] = count
    return "\n".join(lines), words


@pytest.mark.parametrize("seed", range(20))
def test_access_returns_every_entry_random_lexicons(seed):
    rng = random.Random(seed)
    _, grammar, concepts = _shipped_texts()
    lexicon_text, expected = _random_lexicon(rng)
    kb = load_kb(lexicon_text, grammar, concepts)
    for word, count in expected.items():
        assert len(kb.lexical_access(word)) == count


@settings(max_examples=60, derandomize=True)
@given(st.lists(st.sampled_from(["Det", "N", "V", "P", "Adj", "Adv"]),
                min_size=1, max_size=5))
def test_access_count_matches_entry_count(cats):
    _, grammar, concepts = _shipped_texts()
    entries = " ".join(f"(entry (cat {c}) (subcat x) (sense HORSE))" for c in cats)
    kb = load_kb(f'(word "w" {entries})', grammar, concepts)
    assert len(kb.lexical_access("w")) == len(cats)
