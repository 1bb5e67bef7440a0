import pytest

from parsemend.sexpr import Sym, SexprError, parse_sexprs


def test_nested_forms():
    forms = parse_sexprs('(word "saw" (entry (cat V)))')
    assert forms == [[Sym("word"), "saw", [Sym("entry"), [Sym("cat"), Sym("V")]]]]


def test_quoted_string_distinct_from_symbol():
    (form,) = parse_sexprs('(a "a")')
    assert isinstance(form[0], Sym)
    assert not isinstance(form[1], Sym)


def test_integers_and_negative():
    assert parse_sexprs("(head 2 -3)") == [[Sym("head"), 2, -3]]


def test_comments_ignored():
    forms = parse_sexprs("; leading\n(a b) ; trailing\n(c)")
    assert len(forms) == 2


def test_unbalanced_close_reports_position():
    with pytest.raises(SexprError) as info:
        parse_sexprs("(a)\n )")
    assert info.value.line == 2
    assert info.value.column == 2


def test_unclosed_open():
    with pytest.raises(SexprError):
        parse_sexprs("(a (b)")


def test_unterminated_string():
    with pytest.raises(SexprError):
        parse_sexprs('(a "oops)')


def test_atom_outside_form():
    with pytest.raises(SexprError):
        parse_sexprs("stray")


def test_parenlike_string_content():
    (form,) = parse_sexprs('(w "(")')
    assert form[1] == "("
