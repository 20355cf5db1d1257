"""E-matching of patterns against e-classes, plus the guards against invalid matches."""

import logging
from typing import NamedTuple

from src.egraph.graph import ALL, APP, BVAR, EPS_OP, LAM, LIT, SYM
from src.lang.rewrite import pattern_depths
from src.lang.syntax import parse_pattern
from src.lang.term import EPS, All, App, Bvar, Lam, Lit, Meta, Sym

logger = logging.getLogger(__name__)

VALID = "Valid"
ABORT_CASE1 = "AbortCase1"
ABORT_CASE2 = "AbortCase2"


class MatchBinding(NamedTuple):
    root: int
    assignment: dict
    depths: dict

    def key(self):
        return (self.root, tuple(sorted(self.assignment.items())))


__all__ = ["parse_pattern", "ematch", "ematch_class", "validate_match", "MatchBinding"]


def _head(p):
    if isinstance(p, Bvar):
        return BVAR, (p.index, p.tag), ()
    if isinstance(p, App):
        return APP, None, (p.fn, p.arg)
    if isinstance(p, Lam):
        return LAM, None, (p.binder_type, p.body)
    if isinstance(p, All):
        return ALL, None, (p.binder_type, p.body)
    if isinstance(p, Sym):
        return SYM, p.name, ()
    if isinstance(p, Lit):
        return LIT, p.value, ()
    if p == EPS:
        return EPS_OP, None, ()
    return None, None, ()


def _match(g, p, cid, subst):
    cid = g.find(cid)
    if isinstance(p, Meta):
        bound = subst.get(p.name)
        if bound is None:
            yield {**subst, p.name: cid}
        elif g.find(bound) == cid:
            yield subst
        return
    op, data, kids = _head(p)
    if op is None:
        return
    for node, _ in g.nodes(cid):
        if node.op != op or node.data != data:
            continue
        yield from _match_children(g, kids, node.children, subst)


def _match_children(g, patterns, ids, subst):
    if not patterns:
        yield subst
        return
    for partial in _match(g, patterns[0], ids[0], subst):
        yield from _match_children(g, patterns[1:], ids[1:], partial)


def ematch_class(g, p, cid, depths=None):
    """All distinct bindings of ``p`` rooted at one class."""
    depths = pattern_depths(p) if depths is None else depths
    root = g.find(cid)
    seen, out = set(), []
    for subst in _match(g, p, root, {}):
        m = MatchBinding(root, dict(sorted(subst.items())), depths)
        if m.key() not in seen:
            seen.add(m.key())
            out.append(m)
    return out


def ematch(g, p):
    """Matches ``p`` against every class, in class id order."""
    depths = pattern_depths(p)
    out = []
    for cid in g.class_ids():
        out.extend(ematch_class(g, p, cid, depths))
    return out


def validate_match(g, p, m):
    """
    Case 1: a metavariable occurring at several binder depths is bound to a class
    that may contain variables. Case 2: a metavariable at depth d is bound to a
    class that may contain an index below d, i.e. a variable bound inside the pattern.
    """
    for var, depths in m.depths.items():
        free = g.class_free_vars(m.assignment[var])
        if len(depths) > 1 and free:
            return ABORT_CASE1
    for var, depths in m.depths.items():
        free = g.class_free_vars(m.assignment[var])
        if any(v < max(depths) for v in free):
            return ABORT_CASE2
    return VALID
