import random
import time

import pytest

from src.egraph.graph import EGraph, Justification
from src.egraph.subst import (
    IN_PROGRESS, Beta, Class, Done, Index, Shift, SubstState, apply_sigma, beta_class, eta_class,
    process_waiting, subst,
)
from src.errors import UnderflowError
from src.lang.rewrite import FWD
from src.lang.syntax import parse_term as T
from src.lang.term import App, Bvar, Lam, Lit, Sym, beta_step, fvars_term, instantiate, shift_term, size
from tests.generators import random_redex, random_term

BY_TEST = Justification.from_rule("test", FWD)


def _only(g, cid, max_size=9):
    return g.extract_terms(cid, max_size)


def test_apply_sigma_shift():
    g = EGraph()
    assert apply_sigma(Shift(-1, 2), 4, 0, g) == Index(3)
    assert apply_sigma(Shift(5, 3), 1, 0, g) == Index(1)
    assert apply_sigma(Shift(2, 0), 0, 1, g) == Index(0)
    with pytest.raises(UnderflowError):
        apply_sigma(Shift(-3, 0), 1, 0, g)
    with pytest.raises(ValueError):
        apply_sigma(Shift(1, 0), -1, 0, g)


def test_apply_sigma_beta():
    g = EGraph()
    arg = g.add_term(Bvar(0))
    assert apply_sigma(Beta(arg), 3, 1, g) == Index(2)
    assert apply_sigma(Beta(arg), 0, 1, g) == Index(0)
    out = apply_sigma(Beta(arg), 1, 1, g)
    assert isinstance(out, Class)
    assert _only(g, out.id) == {Bvar(1)}


def test_shift_class():
    g = EGraph()
    c = g.add_term(Bvar(4))
    assert _only(g, subst(g, c, Shift(-1, 2))) == {Bvar(3)}


def test_identity_shortcuts():
    g = EGraph()
    c = g.add_term(T("(lam _ (app (bvar 0) (bvar 2)))"))
    assert subst(g, c, Shift(0, 3)) == c
    assert subst(g, c, Shift(4, 2)) == c
    assert subst(g, g.add_term(T("(app f a)")), Shift(7, 0)) == g.lookup(T("(app f a)"))


def test_eta_class():
    g = EGraph()
    assert _only(g, eta_class(g, g.add_term(Bvar(1)))) == {Bvar(0)}
    closed = g.add_term(T("(app f a)"))
    assert eta_class(g, closed) == closed


def test_beta_class():
    g = EGraph()
    body = g.add_term(T("(app plus (bvar 0) (lit 0))"))
    arg = g.add_term(Lit(1))
    assert _only(g, beta_class(g, body, arg)) == {T("(app plus (lit 1) (lit 0))")}
    lit = g.add_term(Lit(7))
    assert beta_class(g, lit, arg) == lit


def test_beta_lifts_argument_under_binder():
    g = EGraph()
    body = g.add_term(Lam(Sym("_"), Bvar(1)))
    arg = g.add_term(Bvar(0))
    assert _only(g, beta_class(g, body, arg)) == {Lam(Sym("_"), Bvar(1))}


def test_repeated_call_returns_same_class():
    g = EGraph()
    c = g.add_term(T("(app f (bvar 2))"))
    first = subst(g, c, Shift(1, 0))
    assert subst(g, c, Shift(1, 0)) == first


def test_other_classes_are_untouched():
    g = EGraph()
    for text in ("(app f (bvar 0))", "(lam _ (bvar 3))", "(app g (app f (bvar 0)))"):
        g.add_term(T(text))
    before = {cid: _only(g, cid, 6) for cid in g.class_ids()}
    subst(g, g.lookup(T("(app f (bvar 0))")), Shift(2, 0))
    for cid, terms in before.items():
        assert _only(g, cid, 6) == terms


def test_self_cycle_with_open_leaf():
    g = EGraph()
    zero = g.add_term(Bvar(0))
    g.union(g.add_term(App(Sym("f"), Bvar(0))), zero, BY_TEST)
    g.rebuild()
    started = time.monotonic()
    sc = subst(g, zero, Shift(1, 0))
    assert time.monotonic() - started < 1.0
    assert _only(g, sc, 7) == {shift_term(t, 1, 0) for t in _only(g, zero, 7)}
    assert _only(g, sc, 5) == {Bvar(1), T("(app f (bvar 1))"), T("(app f (app f (bvar 1)))")}


def test_closed_cycle_is_identity():
    g = EGraph()
    one = g.add_term(Lit(1))
    g.union(g.add_term(App(Sym("f"), Lit(1))), one, BY_TEST)
    g.rebuild()
    assert g.find(subst(g, one, Shift(1, 0))) == g.find(one)


def test_mutual_cycle():
    g = EGraph()
    zero = g.add_term(Bvar(0))
    g.union(g.add_term(T("(app f (app g (bvar 0)))")), zero, BY_TEST)
    g.rebuild()
    sc = subst(g, zero, Shift(2, 0))
    assert _only(g, sc, 9) == {shift_term(t, 2, 0) for t in _only(g, zero, 9)}


def test_process_waiting_with_nothing_waiting():
    g = EGraph()
    leaf = g.add_term(Bvar(0))
    assert process_waiting(SubstState(g, Shift(1, 0)), (leaf, 0)) == []


def test_process_waiting_builds_node_once_blocker_finishes():
    g = EGraph()
    fx = g.add_term(App(Sym("f"), Bvar(0)))
    f, leaf = g.lookup(Sym("f")), g.lookup(Bvar(0))
    state = SubstState(g, Shift(1, 0))
    owner, leaf_key = (fx, 0), (leaf, 0)
    state.visited[owner] = IN_PROGRESS
    state.visited[(f, 0)] = Done(f)
    state.visited[leaf_key] = IN_PROGRESS
    (node, _), = g.nodes(fx)
    state.block(owner, node, [(f, 0), leaf_key], {leaf_key})

    assert state.add_result(leaf_key, g.add_term(Bvar(1)))
    assert process_waiting(state, leaf_key) == [owner]
    assert state.waiting == {}
    assert g.term_of(state.done_id(owner)) == T("(app f (bvar 1))")


def test_underflow_propagates():
    g = EGraph()
    with pytest.raises(UnderflowError):
        subst(g, g.add_term(Bvar(0)), Shift(-1, 0))


def test_beta_agrees_with_plain_terms():
    rng = random.Random(5)
    for _ in range(100):
        redex = random_redex(rng, 10)
        g = EGraph()
        g.add_term(redex)
        g.rebuild()
        body, arg = g.lookup(redex.fn.body), g.lookup(redex.arg)
        expected = beta_step(redex)
        assert _only(g, beta_class(g, body, arg), size(expected)) == {expected}


@pytest.mark.slow
def test_subst_matches_plain_terms_on_random_graphs():
    rng = random.Random(2024)
    for _ in range(200):
        g = EGraph()
        ids = [g.add_term(random_term(rng, 8, free=3)) for _ in range(rng.randint(10, 50))]
        g.rebuild()
        c = rng.choice(ids)
        (source,) = _only(g, c, 8)
        if rng.random() < 0.5:
            sigma = Shift(rng.choice([-1, 1, 2]), rng.randint(0, 2))
            try:
                expected = shift_term(source, sigma.offset, sigma.cutoff)
            except UnderflowError:
                with pytest.raises(UnderflowError):
                    subst(g, c, sigma)
                continue
        else:
            arg_term = random_term(rng, 3, free=2)
            sigma = Beta(g.add_term(arg_term))
            expected = instantiate(source, arg_term)
        assert _only(g, subst(g, c, sigma), max(8, size(expected))) == {expected}


@pytest.mark.slow
def test_shift_covers_every_member_of_merged_classes():
    rng = random.Random(77)
    checked = 0
    for _ in range(100):
        g = EGraph()
        terms = [random_term(rng, 8, free=3) for _ in range(rng.randint(10, 50))]
        ids = [g.add_term(t) for t in terms]
        g.rebuild()
        cutoff = rng.randint(0, 1)
        # top-level terms only, so merging them never puts a class under a binder or into a cycle
        roots = sorted({g.find(i) for i, t in zip(ids, terms)
                        if not g.classes[g.find(i)].parents and any(v >= cutoff for v in fvars_term(t))})
        if len(roots) < 2:
            continue
        members = rng.sample(roots, min(len(roots), rng.randint(2, 4)))
        for other in members[1:]:
            g.union(members[0], other, BY_TEST)
        g.rebuild()
        c = g.find(members[0])
        sources = _only(g, c, 8)
        assert len(sources) == len(members)
        # no index of the graph reaches 20, so every shifted node is new
        result = subst(g, c, Shift(20, cutoff))
        assert _only(g, result, 8) == {shift_term(t, 20, cutoff) for t in sources}
        checked += 1
    assert checked > 50
