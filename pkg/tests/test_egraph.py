import random

import pytest

from src.egraph.graph import APP, JUST_CONGRUENCE, EGraph, ENode, Justification
from src.errors import EncodeError, StaleId
from src.lang.rewrite import FWD
from src.lang.syntax import parse_term as T
from src.lang.term import App, Bvar, Lit, Sym, fvars_term
from tests.generators import random_term

BY_TEST = Justification.from_rule("test", FWD)


def test_bound_variable_shared_across_binders():
    g = EGraph()
    g.add_term(T("(lam _ (app plus (bvar 0) (lit 1)))"))
    g.add_term(T("(lam _ (app not (bvar 0)))"))
    zero = g.lookup(Bvar(0))
    assert g.id_node[g.lookup(T("(app plus (bvar 0))"))].children[1] == zero
    assert g.id_node[g.lookup(T("(app not (bvar 0))"))].children[1] == zero


def test_add_is_idempotent():
    g = EGraph()
    t = T("(app f (lam _ (bvar 0)))")
    assert g.add_term(t) == g.add_term(t)
    assert g.class_count() == 5


def test_nodes_of_application():
    g = EGraph()
    cid = g.add_term(T("(app f a)"))
    f, a = g.lookup(Sym("f")), g.lookup(Sym("a"))
    assert g.nodes(cid) == [(ENode(APP, None, (f, a)), cid)]


def test_stale_ids():
    g = EGraph()
    g.add_term(Sym("a"))
    for bad in (999, -1, "x"):
        with pytest.raises(StaleId):
            g.find(bad)
    with pytest.raises(KeyError):
        g.find(5)


def test_union_and_self_union():
    g = EGraph()
    a, b = g.add_term(Sym("a")), g.add_term(Sym("b"))
    assert g.union(a, a, BY_TEST) == a
    assert g.union_log == []
    g.union(a, b, BY_TEST)
    assert g.find(a) == g.find(b)
    assert g.union_log == [(a, b, BY_TEST)]


def test_congruence_after_rebuild():
    g = EGraph()
    fa, fb = g.add_term(T("(app f a)")), g.add_term(T("(app f b)"))
    g.union(g.lookup(Sym("a")), g.lookup(Sym("b")), BY_TEST)
    g.rebuild()
    assert g.find(fa) == g.find(fb)
    assert (fb, fa, JUST_CONGRUENCE) in g.union_log or (fa, fb, JUST_CONGRUENCE) in g.union_log


def test_transitive_congruence():
    g = EGraph()
    fa, fc = g.add_term(T("(app f a)")), g.add_term(T("(app f c)"))
    a, b, c = (g.add_term(Sym(n)) for n in "abc")
    g.union(a, b, BY_TEST)
    g.union(b, c, BY_TEST)
    g.rebuild()
    assert g.find(fa) == g.find(fc)


def test_congruent_add_gets_alias_id():
    g = EGraph()
    fa = g.add_term(T("(app f a)"))
    b = g.add_term(Sym("b"))
    g.union(g.lookup(Sym("a")), b, BY_TEST)
    g.rebuild()
    fb = g.add_term(T("(app f b)"))
    assert fb != fa and g.find(fb) == g.find(fa)
    assert g.term_of(fb) == T("(app f b)")
    assert g.union_log[-1] == (fb, fa, JUST_CONGRUENCE)


def test_free_variable_analysis():
    g = EGraph()
    assert g.class_free_vars(g.add_term(Bvar(4))) == {4}
    assert g.class_free_vars(g.add_term(T("(lam _ (app (bvar 0) (bvar 2)))"))) == {1}
    assert g.class_free_vars(g.add_term(Sym("f"))) == frozenset()


def test_free_variables_join_on_union():
    g = EGraph()
    a, b = g.add_term(Bvar(0)), g.add_term(Bvar(3))
    lam = g.add_term(T("(lam _ (bvar 0))"))
    g.union(a, b, BY_TEST)
    g.rebuild()
    assert g.class_free_vars(a) == {0, 3}
    # the binder above the merged class now sees index 3 as free index 2
    assert g.class_free_vars(lam) == {2}


def test_rebuild_on_clean_graph_changes_nothing():
    g = EGraph()
    g.add_term(T("(app f (app g a))"))
    before = g.dump()
    g.rebuild()
    assert g.dump() == before


def test_extract_terms():
    g = EGraph()
    assert g.extract_terms(g.add_term(Lit(1)), 3) == {Lit(1)}
    a = g.add_term(Sym("a"))
    fa = g.add_term(T("(app f a)"))
    g.union(a, fa, BY_TEST)
    g.rebuild()
    assert g.extract_terms(a, 5) == {T("a"), T("(app f a)"), T("(app f (app f a))")}
    with pytest.raises(ValueError):
        g.extract_terms(a, 0)


def test_lookup_does_not_add():
    g = EGraph()
    g.add_term(Sym("a"))
    assert g.lookup(T("(app f a)")) is None
    assert g.class_count() == 1


def test_let_is_not_encodable():
    with pytest.raises(EncodeError):
        EGraph().add_term(T("(let _ a (bvar 0))"))


def test_dump_format():
    g = EGraph()
    g.add_term(T("(app f (bvar 4))"))
    assert g.dump() == "class 0: f | fv={}\nclass 1: (bvar 4) | fv={4}\nclass 2: (app 0 1) | fv={4}"


def _random_graph(seed):
    rng = random.Random(seed)
    g = EGraph()
    ids = [g.add_term(random_term(rng, 7)) for _ in range(8)]
    for _ in range(4):
        g.union(rng.choice(ids), rng.choice(ids), BY_TEST)
    g.rebuild()
    return g


def test_free_variable_analysis_over_approximates():
    for seed in range(30):
        g = _random_graph(seed)
        for cid in g.class_ids():
            free = g.class_free_vars(cid)
            for t in g.extract_terms(cid, 5):
                assert fvars_term(t) <= free


def test_hashcons_is_congruence_closed():
    for seed in range(30):
        g = _random_graph(seed)
        for cid in g.class_ids():
            for t in g.extract_terms(cid, 5):
                assert g.find(g.add_term(t)) == g.find(cid)


def test_same_operations_same_dump():
    assert _random_graph(3).dump() == _random_graph(3).dump()
