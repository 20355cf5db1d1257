"""
Explanations: turning the union log into a linear sequence of positioned
rewrite steps, and checking such a sequence on plain terms.

The union log forms a graph over ids. Rule, β and η edges each stand for one
rewrite at the root of the two concrete terms they join. A Congruence edge
joins two nodes with the same operator, and it can be crossed only when every
pair of children is itself connected without SubstInternal edges. Which
congruence edges qualify is computed as a fixpoint before the search.
"""

import json
import logging
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Optional

from src.config.statuses import REPLAY_ACCEPTED, REPLAY_REJECTED
from src.egraph.graph import BETA_JUST, CONGRUENCE, ETA_JUST, RULE, SUBST_INTERNAL
from src.errors import ExplanationIncomplete
from src.lang.rewrite import BETA, BWD, ETA, FWD, Step, normalize_rule, replay_step
from src.lang.syntax import parse_term, print_term
from src.lang.term import normalize, replace_at

logger = logging.getLogger(__name__)

_FLIP = {FWD: BWD, BWD: FWD}


@dataclass(frozen=True)
class Explanation:
    start: object
    steps: tuple

    @property
    def end(self):
        return self.steps[-1].result if self.steps else self.start

    def to_json(self):
        return {
            "start": print_term(self.start),
            "steps": [
                {"rule": s.rule, "dir": s.direction, "pos": list(s.position), "result": print_term(s.result)}
                for s in self.steps
            ],
        }

    def dumps(self):
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data):
        steps = tuple(
            Step(s["rule"], s["dir"], tuple(s["pos"]), parse_term(s["result"]))
            for s in data["steps"]
        )
        return cls(parse_term(data["start"]), steps)


class Decision(NamedTuple):
    accepted: bool
    index: Optional[int] = None
    reason: Optional[str] = None

    def __str__(self):
        if self.accepted:
            return REPLAY_ACCEPTED
        return f"{REPLAY_REJECTED} at step {self.index}: {self.reason}"


ACCEPTED = Decision(True)


def rejected(index, reason):
    return Decision(False, index, reason)


# --- Extraction ---

class _Forest:
    """
    Trusted edges of the union log, each with the fixpoint round that admitted it.
    Rule, β and η edges are round 0. A congruence edge enters in the first round
    whose starting state already connects all of its child pairs, so the child
    paths of a round-r edge only need edges from earlier rounds.
    """

    def __init__(self, g):
        self.g = g
        self.parent = list(range(len(g.parent)))
        self.level = {}
        self._trust()

    def _root(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def _join(self, a, b):
        ra, rb = self._root(a), self._root(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def connected(self, a, b):
        return self._root(a) == self._root(b)

    def _trust(self):
        pending = []
        for stamp, (a, b, justification) in enumerate(self.g.union_log):
            if justification.kind == CONGRUENCE:
                pending.append((stamp, a, b))
            elif justification.kind != SUBST_INTERNAL:
                self.level[stamp] = 0
                self._join(a, b)
        rounds = 0
        while pending:
            rounds += 1
            ready = [(s, a, b) for s, a, b in pending if self._children_connected(a, b)]
            if not ready:
                break
            for stamp, a, b in ready:
                self.level[stamp] = rounds
                self._join(a, b)
            pending = [p for p in pending if p[0] not in self.level]

    def _children_connected(self, a, b):
        na, nb = self.g.id_node[a], self.g.id_node[b]
        return all(self.connected(x, y) for x, y in zip(na.children, nb.children))

    def path(self, a, b, bound=None):
        """
        Shortest path from id ``a`` to id ``b`` over trusted edges below round
        ``bound``; ties go to the earliest union.
        """
        if a == b:
            return []
        back = {a: None}
        queue = deque([a])
        while queue:
            here = queue.popleft()
            for edge in sorted(self.g.proof[here], key=lambda e: e.stamp):
                level = self.level.get(edge.stamp)
                if edge.other in back or level is None or (bound is not None and level >= bound):
                    continue
                back[edge.other] = (here, edge)
                if edge.other == b:
                    return _walk_back(back, b)
                queue.append(edge.other)
        return None


def has_trusted_path(g, a, b):
    """True when ``explain`` can join ids ``a`` and ``b``."""
    return _Forest(g).connected(a, b)


def _walk_back(back, end):
    out = []
    while back[end] is not None:
        here, edge = back[end]
        out.append((here, edge))
        end = here
    out.reverse()
    return out


def _step_direction(edge):
    j = edge.justification
    if j.kind == RULE:
        return j.direction if edge.forward else _FLIP[j.direction]
    return FWD if edge.forward else BWD


def _step_name(edge):
    j = edge.justification
    if j.kind == BETA_JUST:
        return BETA
    if j.kind == ETA_JUST:
        return ETA
    return j.rule


def _explain_ids(forest, a, b, prefix, current, steps, bound=None):
    edges = forest.path(a, b, bound)
    if edges is None:
        raise ExplanationIncomplete(f"No trusted path between ids {a} and {b}")
    g = forest.g
    for here, edge in edges:
        if edge.justification.kind == CONGRUENCE:
            na, nb = g.id_node[here], g.id_node[edge.other]
            level = forest.level[edge.stamp]
            for i, (x, y) in enumerate(zip(na.children, nb.children)):
                if x != y:
                    current = _explain_ids(forest, x, y, prefix + (i,), current, steps, level)
        else:
            current = replace_at(current, prefix, g.term_of(edge.other))
            steps.append(Step(_step_name(edge), _step_direction(edge), prefix, current))
    return current


def explain(g, lhs, rhs, start_term):
    """
    Linear rewrite sequence from ``start_term`` to the term ``rhs`` was created
    for. Raises ExplanationIncomplete when the two are only connected through
    SubstInternal links.
    """
    if g.find(lhs) != g.find(rhs):
        raise ExplanationIncomplete(f"Classes of {lhs} and {rhs} are not equal")
    start = g.lookup(start_term)
    if start is None:
        raise ExplanationIncomplete("Start term is not in the e-graph")
    forest = _Forest(g)
    steps = []
    _explain_ids(forest, start, rhs, (), start_term, steps)
    logger.debug(f"Explained {lhs} = {rhs} in {len(steps)} steps")
    return Explanation(start_term, tuple(steps))


# --- Replay ---

def replay_check(e, rules, goal, proof_heads=frozenset(), annotate=False):
    """
    Re-derives every step on plain terms. The goal and the rules go through
    the same normalization as during proving; nothing here reads an e-graph.
    """
    lhs = normalize(goal[0], proof_heads, annotate)
    rhs = normalize(goal[1], proof_heads, annotate)
    rules_by_name = {r.name: normalize_rule(r, proof_heads, annotate) for r in rules}

    if e.start != lhs:
        return rejected(0, "start does not match the goal")
    current = e.start
    for index, step in enumerate(e.steps):
        reason = replay_step(current, step, rules_by_name)
        if reason is not None:
            return rejected(index, reason)
        current = step.result
    if current != rhs:
        return rejected(len(e.steps), "endpoint mismatch")
    return ACCEPTED
