"""
Brute-force reachability over plain terms. Slow on purpose: it is the reference
the e-graph results are checked against.
"""

import logging
from collections import deque
from dataclasses import dataclass

from src.config import limits
from src.errors import LimitExceeded
from src.lang.rewrite import (
    BETA, BWD, ETA, FWD, Step, reduce_root, rewrite_root,
)
from src.lang.syntax import print_term
from src.lang.term import positions, replace_at, size, subterm_at

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleLimits:
    max_depth: int = limits.ORACLE_MAX_DEPTH
    max_term_size: int = limits.ORACLE_MAX_TERM_SIZE
    max_states: int = limits.ORACLE_MAX_STATES

    def __post_init__(self):
        if min(self.max_depth, self.max_term_size, self.max_states) <= 0:
            raise ValueError("Oracle limits must be positive")


class _Seeds:
    """Known redexes indexed by their reduct, used for backward β/η steps."""

    def __init__(self, names):
        self.names = names
        self.by_reduct = {name: {} for name in names}
        self._seen = set()

    def add(self, t):
        for pos in positions(t):
            sub = subterm_at(t, pos)
            key = print_term(sub)
            if key in self._seen:
                continue
            self._seen.add(key)
            for name in self.names:
                reduct = reduce_root(name, sub)
                if reduct is not None:
                    bucket = self.by_reduct[name].setdefault(print_term(reduct), [])
                    if sub not in bucket:
                        bucket.append(sub)

    def expansions(self, name, t):
        return self.by_reduct[name].get(print_term(t), ())


def neighbours(state, rules, builtins, seeds):
    """Every single-position rewrite of ``state``, in a fixed order."""
    for pos in positions(state):
        sub = subterm_at(state, pos)
        for rule in rules:
            for step_dir in (FWD, BWD):
                if not rule.allows(step_dir):
                    continue
                out = rewrite_root(rule, step_dir, sub)
                if out is not None and out != sub:
                    yield Step(rule.name, step_dir, pos, replace_at(state, pos, out))
        for name in builtins:
            out = reduce_root(name, sub)
            if out is not None:
                yield Step(name, FWD, pos, replace_at(state, pos, out))
            for redex in seeds.expansions(name, sub):
                yield Step(name, BWD, pos, replace_at(state, pos, redex))


def oracle_search(start, goal, rules, enable_beta=True, enable_eta=False, oracle_limits=None):
    """
    Breadth-first search for a shortest rewrite trace from ``start`` to ``goal``.
    Returns the list of steps, or None when the goal is not reached within
    ``max_depth`` levels. Raises LimitExceeded once ``max_states`` are visited.
    """
    oracle_limits = oracle_limits or OracleLimits()
    builtins = [name for name, on in ((BETA, enable_beta), (ETA, enable_eta)) if on]
    seeds = _Seeds(builtins)
    for t in (start, goal):
        seeds.add(t)
    for rule in rules:
        if rule.is_ground:
            seeds.add(rule.lhs)
            seeds.add(rule.rhs)

    goal_key = print_term(goal)
    start_key = print_term(start)
    if start_key == goal_key:
        return []

    parents = {start_key: None}
    frontier = deque([start])
    for level in range(oracle_limits.max_depth):
        next_frontier = deque()
        while frontier:
            state = frontier.popleft()
            seeds.add(state)
            for step in neighbours(state, rules, builtins, seeds):
                key = print_term(step.result)
                if key in parents or size(step.result) > oracle_limits.max_term_size:
                    continue
                parents[key] = (print_term(state), step)
                if key == goal_key:
                    logger.debug(f"Oracle reached goal at depth {level + 1} after {len(parents)} states")
                    return _trace(parents, key)
                if len(parents) >= oracle_limits.max_states:
                    raise LimitExceeded(f"Oracle visited {len(parents)} states")
                next_frontier.append(step.result)
        if not next_frontier:
            break
        frontier = next_frontier
    return None


def _trace(parents, key):
    steps = []
    while parents[key] is not None:
        prev, step = parents[key]
        steps.append(step)
        key = prev
    steps.reverse()
    return steps
