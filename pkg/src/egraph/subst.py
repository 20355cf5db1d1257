"""
Substitution on e-classes.

``subst(g, c, sigma)`` extends the graph with a class holding ``sigma`` applied
to every term ``c`` represents. The walk is a DFS over (class, binder depth)
pairs. A node is rebuilt only once all of its children have substitutes; nodes
whose children are still in progress wait in a table keyed by the blocking
pairs and are constructed when the last blocker finishes. Classes are created
leaf first, so the walk terminates on cyclic graphs as long as every class
represents at least one finite term.

The first node built for a pair becomes its substitute class. Further nodes
are joined to it with SubstInternal unions, which are deferred until the
outermost call returns so the source classes stay fixed during the walk.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from src.egraph.graph import BVAR, JUST_SUBST, ENode
from src.errors import EggLamError, UnderflowError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Shift:
    """Adds ``offset`` to every index that is at least ``cutoff`` past the current depth."""
    offset: int
    cutoff: int = 0


@dataclass(frozen=True)
class Beta:
    """Replaces the index equal to the current depth by ``arg``, lowering the ones above it."""
    arg: int


class Index(NamedTuple):
    value: int


class Class(NamedTuple):
    id: int


class Done(NamedTuple):
    id: int


IN_PROGRESS = "InProgress"


class WaitingNode:
    def __init__(self, owner, node, child_keys, blockers):
        self.owner = owner
        self.node = node
        self.child_keys = child_keys
        self.blockers = blockers

    def __repr__(self):
        return f"WaitingNode(owner={self.owner}, op={self.node.op}, blockers={sorted(self.blockers)})"


class _Frame:
    """One (class, depth) pair on the walk stack and how far through its nodes it is."""

    def __init__(self, key, nodes):
        self.key = key
        self.nodes = nodes
        self.next_node = 0
        self.child_keys = None
        self.next_child = 0


class _Run:
    """Shared by one outermost subst call and the argument lifts it triggers."""

    def __init__(self):
        self.unions = []
        self.memo = {}


def apply_sigma(s, idx, depth, g, _run=None):
    if idx < 0 or depth < 0:
        raise ValueError(f"index and depth must be natural, got {idx} and {depth}")
    if isinstance(s, Shift):
        if idx - depth < s.cutoff:
            return Index(idx)
        shifted = idx + s.offset
        if shifted < 0:
            raise UnderflowError(f"Shifting index {idx} by {s.offset} underflows")
        return Index(shifted)
    if idx > depth:
        return Index(idx - 1)
    if idx < depth:
        return Index(idx)
    return Class(subst(g, s.arg, Shift(depth, 0), _run=_run))


class SubstState:
    def __init__(self, g, sigma, run=None):
        self.g = g
        self.sigma = sigma
        self.run = run if run is not None else _Run()
        self.visited = {}
        self.waiting = {}
        self.blocked_on = {}
        self.completion_queue = []
        self._next_entry = 0

    def is_identity(self, cid, depth):
        free = self.g.class_free_vars(cid)
        if isinstance(self.sigma, Shift):
            return self.sigma.offset == 0 or all(v < depth + self.sigma.cutoff for v in free)
        return all(v < depth for v in free)

    def done_id(self, key):
        status = self.visited.get(key)
        return status.id if isinstance(status, Done) else None

    def _enter(self, key):
        """Marks ``key`` in progress and returns its frame, or None if it needs no walk."""
        if key in self.visited:
            return None
        if self.is_identity(*key):
            self.visited[key] = Done(key[0])
            return None
        self.visited[key] = IN_PROGRESS
        return _Frame(key, self.g.nodes(key[0]))

    def visit(self, cid, depth):
        """Substitute id for (cid, depth), or None while it is still in progress."""
        g = self.g
        key = (g.find(cid), depth)
        frame = self._enter(key)
        stack = [frame] if frame else []
        while stack:
            frame = stack[-1]
            if frame.next_node == len(frame.nodes):
                stack.pop()
                continue
            node, _ = frame.nodes[frame.next_node]
            if frame.child_keys is None:
                frame.child_keys = [(g.find(ch), frame.key[1] + node.binders_at(i))
                                    for i, ch in enumerate(node.children)]
                frame.next_child = 0
            if frame.next_child < len(frame.child_keys):
                child = self._enter(frame.child_keys[frame.next_child])
                frame.next_child += 1
                if child:
                    stack.append(child)
                continue

            child_keys = frame.child_keys
            frame.next_node += 1
            frame.child_keys = None
            blockers = {ck for ck in child_keys if self.done_id(ck) is None}
            if blockers:
                self.block(frame.key, node, child_keys, blockers)
            elif self.add_result(frame.key, self.construct(node, child_keys, frame.key[1])):
                process_waiting(self, frame.key)
        return self.done_id(key)

    def block(self, owner, node, child_keys, blockers):
        entry_id = self._next_entry
        self._next_entry += 1
        self.waiting[entry_id] = WaitingNode(owner, node, child_keys, set(blockers))
        for blocker in blockers:
            self.blocked_on.setdefault(blocker, []).append(entry_id)
        logger.debug(f"Node {node.op} of {owner} waits for {sorted(blockers)}")

    def construct(self, node, child_keys, depth):
        if node.op == BVAR:
            index, tag = node.data
            out = apply_sigma(self.sigma, index, depth, self.g, _run=self.run)
            if isinstance(out, Class):
                return out.id
            return self.g.add_enode(ENode(BVAR, (out.value, tag), ()))
        kids = tuple(self.done_id(k) for k in child_keys)
        return self.g.add_enode(node._replace(children=kids))

    def add_result(self, key, new_id):
        """Records a built node for ``key``; True when this finishes ``key``."""
        status = self.visited[key]
        if isinstance(status, Done):
            if self.g.find(status.id) != self.g.find(new_id):
                self.run.unions.append((status.id, new_id))
            return False
        self.visited[key] = Done(new_id)
        self.completion_queue.append(key)
        return True


def process_waiting(state, finished):
    """Constructs every waiting node unblocked by ``finished``, cascading to a fixpoint."""
    completed = []
    queue = deque([finished])
    while queue:
        key = queue.popleft()
        for entry_id in state.blocked_on.pop(key, []):
            entry = state.waiting.get(entry_id)
            if entry is None:
                continue
            entry.blockers.discard(key)
            if entry.blockers:
                continue
            del state.waiting[entry_id]
            built = state.construct(entry.node, entry.child_keys, entry.owner[1])
            if state.add_result(entry.owner, built):
                completed.append(entry.owner)
                queue.append(entry.owner)
    if completed:
        logger.debug(f"Cascade from {finished} completed {completed}")
    return completed


def subst(g, c, s, _run=None):
    outermost = _run is None
    if outermost:
        g.rebuild()
        if isinstance(s, Beta):
            s = Beta(g.find(s.arg))
        cached = g.subst_cache.get((g.find(c), s))
        if cached is not None:
            return g.find(cached)
        _run = _Run()

    memo_key = (g.find(c), s)
    if memo_key in _run.memo:
        return _run.memo[memo_key]

    state = SubstState(g, s, _run)
    result = state.visit(c, 0)
    if result is None or state.waiting:
        raise EggLamError(f"Substitution {s} on class {c} left {len(state.waiting)} nodes waiting")
    _run.memo[memo_key] = result

    if outermost:
        for a, b in _run.unions:
            g.union(a, b, JUST_SUBST)
        g.rebuild()
        result = g.find(result)
        g.subst_cache[(g.find(c), s)] = result
        logger.debug(f"subst {s} on {c} -> {result} ({len(_run.unions)} internal unions)")
    return result


def eta_class(g, c):
    return subst(g, c, Shift(-1, 1))


def beta_class(g, c, arg):
    return subst(g, c, Beta(arg))
