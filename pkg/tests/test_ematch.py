from src.egraph.ematch import (
    ABORT_CASE1, ABORT_CASE2, VALID, ematch, ematch_class, parse_pattern, validate_match,
)
from src.egraph.graph import EGraph, Justification
from src.lang.rewrite import FWD
from src.lang.syntax import parse_term as T
from src.lang.term import Bvar, Sym


def _graph(*terms):
    g = EGraph()
    ids = [g.add_term(T(t)) for t in terms]
    g.rebuild()
    return g, ids


def test_redex_with_bound_body():
    g, (root,) = _graph("(app (lam _ (bvar 0)) (lit 1))")
    p = parse_pattern("(app (lam _ ?x) (lit 1))")
    matches = ematch(g, p)
    assert len(matches) == 1
    m = matches[0]
    assert m.root == root
    assert m.assignment == {"x": g.lookup(Bvar(0))}
    assert m.depths == {"x": [1]}
    assert validate_match(g, p, m) == ABORT_CASE2


def test_metavariable_matches_every_class():
    g, _ = _graph("(app f (lam _ (bvar 0)))", "(app g a)")
    assert len(ematch(g, parse_pattern("?x"))) == g.class_count()


def test_aliased_metavariable_at_two_depths():
    g, _ = _graph("(lam _ (app (lam _ (bvar 0)) (bvar 0)))")
    p = parse_pattern("(lam _ (app (lam _ ?x) ?x))")
    (m,) = ematch(g, p)
    assert m.depths == {"x": [1, 2]}
    assert validate_match(g, p, m) == ABORT_CASE1


def test_closed_binding_is_valid():
    g, _ = _graph("(lam _ (app (lam _ a) a))")
    p = parse_pattern("(lam _ (app (lam _ ?x) ?x))")
    (m,) = ematch(g, p)
    assert validate_match(g, p, m) == VALID


def test_outer_variable_under_binder_is_valid():
    g, _ = _graph("(app (lam _ (bvar 3)) (lit 1))")
    p = parse_pattern("(app (lam _ ?x) (lit 1))")
    (m,) = ematch(g, p)
    assert validate_match(g, p, m) == VALID


def test_repeated_metavariable_needs_one_class():
    g, (ab, aa) = _graph("(app f a b)", "(app f a a)")
    p = parse_pattern("(app f ?x ?x)")
    assert ematch_class(g, p, ab) == []
    assert len(ematch_class(g, p, aa)) == 1


def test_matching_sees_merged_classes():
    g, (fa, _) = _graph("(app f a)", "b")
    g.union(g.lookup(Sym("a")), g.lookup(Sym("b")), Justification.from_rule("test", FWD))
    g.rebuild()
    (m,) = ematch_class(g, parse_pattern("(app f b)"), fa)
    assert m.assignment == {}