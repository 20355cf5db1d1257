"""
Hashconsed e-graph over de Bruijn terms.

Every id is created for one concrete e-node, so ``term_of(id)`` is always a
finite term and every union in the log joins two concrete terms. Adding a node
that is congruent (children equal up to ``find``) but not identical to an
existing one creates a fresh id that is attached to the existing class by a
Congruence union instead of starting a new class.

Mutation is single-writer. A rebuilt graph can be read from several threads.
"""

import itertools
import logging
from typing import NamedTuple, Optional

from src.errors import EncodeError, StaleId
from src.lang.term import EPS, All, App, Bvar, Lam, Let, Lit, Sym, children

logger = logging.getLogger(__name__)

BVAR = "bvar"
APP = "app"
LAM = "lam"
ALL = "all"
SYM = "sym"
LIT = "lit"
EPS_OP = "eps"

BINDER_OPS = (LAM, ALL)


class ENode(NamedTuple):
    op: str
    data: object
    children: tuple

    def binders_at(self, i):
        return 1 if self.op in BINDER_OPS and i == 1 else 0


# --- Justifications ---

RULE = "rule"
CONGRUENCE = "congruence"
BETA_JUST = "beta"
ETA_JUST = "eta"
SUBST_INTERNAL = "subst-internal"


class Justification(NamedTuple):
    kind: str
    rule: Optional[str] = None
    direction: Optional[str] = None

    @classmethod
    def from_rule(cls, name, direction):
        return cls(RULE, name, direction)

    def __str__(self):
        if self.kind == RULE:
            return f"{self.rule}:{self.direction}"
        return self.kind


JUST_CONGRUENCE = Justification(CONGRUENCE)
JUST_BETA = Justification(BETA_JUST)
JUST_ETA = Justification(ETA_JUST)
JUST_SUBST = Justification(SUBST_INTERNAL)


class ProofEdge(NamedTuple):
    other: int
    justification: Justification
    stamp: int
    forward: bool


class EClass:
    def __init__(self, cid, node, free):
        self.id = cid
        self.nodes = [(node, cid)]  # (canonical e-node, id it was created for)
        self.parents = []
        self.free = set(free)

    def __repr__(self):
        return f"EClass({self.id}, nodes={len(self.nodes)}, fv={sorted(self.free)})"


def node_of_term(t, kids):
    if isinstance(t, Bvar):
        return ENode(BVAR, (t.index, t.tag), ())
    if isinstance(t, App):
        return ENode(APP, None, tuple(kids))
    if isinstance(t, Lam):
        return ENode(LAM, None, tuple(kids))
    if isinstance(t, All):
        return ENode(ALL, None, tuple(kids))
    if isinstance(t, Sym):
        return ENode(SYM, t.name, ())
    if isinstance(t, Lit):
        return ENode(LIT, t.value, ())
    if t == EPS:
        return ENode(EPS_OP, None, ())
    raise EncodeError(f"Cannot encode {type(t).__name__} into the e-graph")


def term_of_node(node, kids):
    if node.op == BVAR:
        return Bvar(node.data[0], node.data[1])
    if node.op == APP:
        return App(kids[0], kids[1])
    if node.op == LAM:
        return Lam(kids[0], kids[1])
    if node.op == ALL:
        return All(kids[0], kids[1])
    if node.op == SYM:
        return Sym(node.data)
    if node.op == LIT:
        return Lit(node.data)
    return EPS


class EGraph:
    def __init__(self):
        self.parent = []
        self.id_node = []
        self.memo = {}
        self.hashcons = {}
        self.classes = {}
        self.proof = []
        self.union_log = []
        self.pending = []
        self.analysis_pending = []
        self.subst_cache = {}
        self._terms = {}

    # --- Union-find ---

    def _check(self, cid):
        if not isinstance(cid, int) or cid < 0 or cid >= len(self.parent):
            raise StaleId(f"Unknown e-class id {cid!r}")

    def find(self, cid):
        self._check(cid)
        root = cid
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[cid] != root:
            self.parent[cid], cid = root, self.parent[cid]
        return root

    def canonicalize(self, node):
        if not node.children:
            return node
        return node._replace(children=tuple(self.find(c) for c in node.children))

    # --- Analysis ---

    def node_free(self, node):
        if node.op == BVAR:
            return {node.data[0]}
        out = set()
        for i, child in enumerate(node.children):
            free = self.classes[self.find(child)].free
            if node.binders_at(i):
                out |= {v - 1 for v in free if v > 0}
            else:
                out |= free
        return out

    def class_free_vars(self, cid):
        return frozenset(self.classes[self.find(cid)].free)

    # --- Adding ---

    def add_enode(self, node):
        """Adds a node whose children are ids; returns the id created for it."""
        for child in node.children:
            self._check(child)
        if node in self.memo:
            return self.memo[node]

        new = len(self.parent)
        self.parent.append(new)
        self.id_node.append(node)
        self.proof.append([])
        self.memo[node] = new

        canon = self.canonicalize(node)
        existing = self.hashcons.get(canon)
        if existing is not None:
            self.parent[new] = self.find(existing)
            self._record(new, existing, JUST_CONGRUENCE)
            return new

        self.classes[new] = EClass(new, canon, self.node_free(canon))
        self.hashcons[canon] = new
        for child in sorted(set(canon.children)):
            self.classes[child].parents.append((canon, new))
        return new

    def add_term(self, t):
        if isinstance(t, Let):
            raise EncodeError("let must be ζ-reduced before encoding")
        kids = [self.add_term(c) for c in children(t)]
        return self.add_enode(node_of_term(t, kids))

    def lookup(self, t):
        """Id of an already added term, or None. Never mutates."""
        kids = []
        for c in children(t):
            kid = self.lookup(c)
            if kid is None:
                return None
            kids.append(kid)
        try:
            return self.memo.get(node_of_term(t, kids))
        except EncodeError:
            return None

    def term_of(self, cid):
        """The concrete term ``cid`` was created for."""
        self._check(cid)
        # children always have smaller ids, so the stack cannot cycle
        stack = [cid]
        while stack:
            top = stack[-1]
            if top in self._terms:
                stack.pop()
                continue
            node = self.id_node[top]
            missing = [c for c in node.children if c not in self._terms]
            if missing:
                stack.extend(missing)
                continue
            self._terms[top] = term_of_node(node, [self._terms[c] for c in node.children])
            stack.pop()
        return self._terms[cid]

    # --- Merging ---

    def _record(self, a, b, justification):
        stamp = len(self.union_log)
        self.union_log.append((a, b, justification))
        self.proof[a].append(ProofEdge(b, justification, stamp, True))
        self.proof[b].append(ProofEdge(a, justification, stamp, False))

    def union(self, a, b, justification):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        self._record(a, b, justification)

        ca, cb = self.classes[ra], self.classes[rb]
        if (len(ca.nodes) + len(ca.parents), -ra) < (len(cb.nodes) + len(cb.parents), -rb):
            ra, rb, ca, cb = rb, ra, cb, ca
        self.parent[rb] = ra
        del self.classes[rb]

        if not cb.free <= ca.free:
            self.analysis_pending.extend(c for _, c in ca.parents)
        if not ca.free <= cb.free:
            self.analysis_pending.extend(c for _, c in cb.parents)
        ca.free |= cb.free
        ca.nodes.extend(cb.nodes)
        ca.parents.extend(cb.parents)
        self.pending.append(ra)
        self.subst_cache.clear()
        return ra

    def rebuild(self):
        rounds = 0
        while self.pending or self.analysis_pending:
            rounds += 1
            todo = sorted({self.find(c) for c in self.pending})
            self.pending = []
            for cid in todo:
                self._repair(self.find(cid))
            analysis = sorted({self.find(c) for c in self.analysis_pending})
            self.analysis_pending = []
            for cid in analysis:
                self._repair_analysis(cid)
        if rounds:
            logger.debug(f"Rebuilt in {rounds} rounds: {self.node_count()} nodes, {len(self.classes)} classes")

    def _repair(self, cid):
        cls = self.classes[cid]
        parents, cls.parents = cls.parents, []
        for node, origin in parents:
            if self.hashcons.get(node) == origin:
                del self.hashcons[node]
        seen = {}
        for node, origin in parents:
            canon = self.canonicalize(node)
            other = self.hashcons.get(canon)
            if other is not None and self.find(other) != self.find(origin):
                self.union(other, origin, JUST_CONGRUENCE)
            elif other is None:
                self.hashcons[canon] = origin
            if canon in seen and self.find(seen[canon]) != self.find(origin):
                self.union(seen[canon], origin, JUST_CONGRUENCE)
            seen.setdefault(canon, origin)
        root = self.classes[self.find(cid)]
        root.parents.extend((self.canonicalize(n), o) for n, o in seen.items())

        deduped = {}
        for node, origin in root.nodes:
            deduped.setdefault(self.canonicalize(node), origin)
        root.nodes = list(deduped.items())

    def _repair_analysis(self, cid):
        cls = self.classes[self.find(cid)]
        grown = set()
        for node, _ in cls.nodes:
            grown |= self.node_free(self.canonicalize(node))
        if not grown <= cls.free:
            cls.free |= grown
            self.analysis_pending.extend(c for _, c in cls.parents)

    # --- Queries ---

    def node_count(self):
        """Stored e-nodes, one per id. Never decreases."""
        return len(self.id_node)

    def class_count(self):
        return len(self.classes)

    def class_ids(self):
        return sorted(self.classes)

    def nodes(self, cid):
        """Canonical e-nodes of a class paired with the ids they were created for."""
        return list(self.classes[self.find(cid)].nodes)

    def extract_terms(self, cid, max_size):
        """Every term of at most ``max_size`` nodes that the class represents."""
        if max_size < 1:
            raise ValueError("max_size must be at least 1")
        root = self.find(cid)
        reachable, stack = set(), [root]
        while stack:
            c = stack.pop()
            if c in reachable:
                continue
            reachable.add(c)
            for node, _ in self.classes[c].nodes:
                stack.extend(self.find(ch) for ch in node.children)

        table = {c: [set() for _ in range(max_size + 1)] for c in reachable}
        for s in range(1, max_size + 1):
            for c in sorted(reachable):
                for node, _ in self.classes[c].nodes:
                    kids = [self.find(ch) for ch in node.children]
                    if not kids:
                        if s == 1:
                            table[c][1].add(term_of_node(node, ()))
                        continue
                    for split in _compositions(s - 1, len(kids)):
                        pools = [table[k][n] for k, n in zip(kids, split)]
                        for combo in itertools.product(*pools):
                            table[c][s].add(term_of_node(node, combo))
        return set().union(*table[root][1:])

    def dump(self):
        lines = []
        for cid in self.class_ids():
            cls = self.classes[cid]
            nodes = " ".join(_dump_node(self.canonicalize(n)) for n, _ in cls.nodes)
            free = ",".join(str(v) for v in sorted(cls.free))
            lines.append(f"class {cid}: {nodes} | fv={{{free}}}")
        return "\n".join(lines)


def _compositions(total, parts):
    """Ordered ways to write ``total`` as ``parts`` positive integers."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _dump_node(node):
    if node.op == BVAR:
        index, tag = node.data
        return f"(bvar {index})" if tag is None else f'(bvar {index} : "{tag}")'
    if node.op == SYM:
        return node.data
    if node.op == LIT:
        return f"(lit {node.data})"
    if node.op == EPS_OP:
        return "eps"
    return f"({node.op} " + " ".join(str(c) for c in node.children) + ")"
