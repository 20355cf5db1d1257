import random

import pytest

from src.errors import NegativeIndexError, TermSyntaxError
from src.lang.syntax import parse_pattern, parse_term, print_term
from src.lang.term import EPS, All, App, Bvar, Lam, Let, Lit, Meta, Sym
from tests.generators import random_term


def test_parse_basic_forms():
    assert parse_term("(lam _ (bvar 0))") == Lam(Sym("_"), Bvar(0))
    assert parse_term("(all Nat (bvar 0))") == All(Sym("Nat"), Bvar(0))
    assert parse_term("(let _ (lit 3) (bvar 0))") == Let(Sym("_"), Lit(3), Bvar(0))
    assert parse_term("eps") == EPS
    assert parse_term("plus.comm'") == Sym("plus.comm'")


def test_eps_is_never_a_symbol():
    with pytest.raises(ValueError):
        Sym("eps")
    assert parse_term(print_term(EPS)) == EPS
    assert parse_term("epsilon") == Sym("epsilon")


def test_app_is_left_nested():
    assert parse_term("(app plus (lit 1) (lit 0))") == App(App(Sym("plus"), Lit(1)), Lit(0))


def test_tagged_bvar():
    assert parse_term('(bvar 2 : "Nat")') == Bvar(2, "Nat")
    assert print_term(Bvar(0, 'say "hi"')) == '(bvar 0 : "say \\"hi\\"")'
    assert parse_term(print_term(Bvar(0, 'say "hi"'))) == Bvar(0, 'say "hi"')


def test_print():
    t = Lam(Sym("_"), App(Lam(Sym("_"), Bvar(4)), Lit(0)))
    assert print_term(t) == "(lam _ (app (lam _ (bvar 4)) (lit 0)))"


def test_negative_index_rejected():
    with pytest.raises(NegativeIndexError) as info:
        parse_term("(bvar -1)")
    assert isinstance(info.value, IndexError)
    assert isinstance(info.value, SyntaxError)


def test_metavariable_only_in_patterns():
    assert parse_pattern("(app f ?x)") == App(Sym("f"), Meta("x"))
    with pytest.raises(TermSyntaxError):
        parse_term("(app f ?x)")
    with pytest.raises(TermSyntaxError):
        parse_pattern("(bvar ?x)")


@pytest.mark.parametrize("text", ["(app f)", "(lam _)", "(lit -2)", "(app f g", "(foo a b)", ""])
def test_malformed(text):
    with pytest.raises(TermSyntaxError):
        parse_term(text)


def test_error_offset_is_in_bytes():
    with pytest.raises(TermSyntaxError) as info:
        parse_term('(app (bvar 0 : "é") (bvar -1))')
    assert info.value.offset == len('(app (bvar 0 : "é") (bvar '.encode("utf-8"))


def test_printed_terms_parse_back():
    rng = random.Random(11)
    for _ in range(200):
        t = random_term(rng, 15, allow_let=True, allow_all=True)
        assert parse_term(print_term(t)) == t
