"""
Single-position rewriting on plain terms.

Matching is capture-avoiding: a metavariable sitting under ``d`` binders of the
pattern only matches subterms whose free indices are all >= d, and it binds the
subterm shifted down by ``d`` so the value is expressed relative to the pattern
root. Instantiation shifts each value back up by the depth of its occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

from src.errors import EncodeError
from src.lang.term import (
    Meta, beta_step, binders_at, children, eta_step, fvars_term, has_let,
    normalize, replace_at, shift_term, subterm_at, with_children,
)

FORWARD = "forward"
BACKWARD = "backward"
BOTH = "both"

FWD = "fwd"
BWD = "bwd"

BETA = "beta"
ETA = "eta"
BUILTIN_RULES = (BETA, ETA)

DIRECTION_NAMES = {"fwd": FORWARD, "bwd": BACKWARD, "both": BOTH}


@dataclass(frozen=True)
class RuleSpec:
    name: str
    lhs: object
    rhs: object
    directions: str = BOTH

    def allows(self, step_dir):
        if self.directions == BOTH:
            return True
        return (self.directions == FORWARD) == (step_dir == FWD)

    def sides(self, step_dir):
        """(trigger, output) for a step direction."""
        return (self.lhs, self.rhs) if step_dir == FWD else (self.rhs, self.lhs)

    @property
    def is_ground(self):
        return not metavars(self.lhs) and not metavars(self.rhs)


class Step(NamedTuple):
    rule: str
    direction: str
    position: tuple
    result: object


# --- Patterns ---

def metavars(p):
    if isinstance(p, Meta):
        return {p.name}
    out = set()
    for c in children(p):
        out |= metavars(c)
    return out


def pattern_depths(p, depth=0, out=None):
    """metavariable -> sorted list of the binder depths of its occurrences."""
    out = {} if out is None else out
    if isinstance(p, Meta):
        out.setdefault(p.name, [])
        if depth not in out[p.name]:
            out[p.name].append(depth)
            out[p.name].sort()
        return out
    for i, c in enumerate(children(p)):
        pattern_depths(c, depth + binders_at(p, i), out)
    return out


def match_pattern(p, t, depth=0, binding=None) -> Optional[dict]:
    binding = {} if binding is None else binding
    if isinstance(p, Meta):
        if any(i < depth for i in fvars_term(t)):
            return None
        value = shift_term(t, -depth, 0)
        if p.name in binding:
            return binding if binding[p.name] == value else None
        return {**binding, p.name: value}
    if type(p) is not type(t):
        return None
    kids = children(p)
    if not kids:
        return binding if p == t else None
    for i, (pc, tc) in enumerate(zip(kids, children(t))):
        binding = match_pattern(pc, tc, depth + binders_at(p, i), binding)
        if binding is None:
            return None
    return binding


def instantiate_pattern(p, binding, depth=0):
    if isinstance(p, Meta):
        return shift_term(binding[p.name], depth, 0)
    kids = children(p)
    if not kids:
        return p
    return with_children(p, [instantiate_pattern(c, binding, depth + binders_at(p, i))
                             for i, c in enumerate(kids)])


def rewrite_root(rule, step_dir, t):
    """Applies ``rule`` at the root of ``t`` in the given direction, or returns None."""
    trigger, output = rule.sides(step_dir)
    if not metavars(output) <= metavars(trigger):
        return None
    binding = match_pattern(trigger, t)
    if binding is None:
        return None
    return instantiate_pattern(output, binding)


def normalize_rule(rule, proof_heads=frozenset(), annotate=False):
    """Runs both sides through the encoding pipeline. Let is only allowed in ground rules."""
    if not rule.is_ground and (has_let(rule.lhs) or has_let(rule.rhs)):
        raise EncodeError(f"Rule '{rule.name}': let is not allowed in patterns with metavariables")
    return replace(rule,
                   lhs=normalize(rule.lhs, proof_heads, annotate),
                   rhs=normalize(rule.rhs, proof_heads, annotate))


def reduce_root(name, t):
    if name == BETA:
        return beta_step(t)
    if name == ETA:
        return eta_step(t)
    return None


# --- Replay of a single step ---

def _rewrites_to(rule, step_dir, source, pos, target):
    here = subterm_at(source, pos)
    out = rewrite_root(rule, step_dir, here) if here is not None else None
    if out is None:
        return None
    return replace_at(source, pos, out) == target


def replay_step(current, step, rules_by_name):
    """
    Re-derives ``step`` from ``current``. Returns None when the step is valid,
    otherwise a short reason.

    A user rule step is valid when the rule in the step's direction takes
    ``current`` to the result, or the opposite direction takes the result back
    to ``current``; rule equations are symmetric whatever directions saturation
    was allowed to use. Backward β and η steps are checked by reducing the
    claimed result, since expansions are not determined by the reduct.
    """
    pos = tuple(step.position)
    if step.direction not in (FWD, BWD):
        return f"unknown direction {step.direction!r}"
    if step.rule in BUILTIN_RULES:
        source, target = (current, step.result) if step.direction == FWD else (step.result, current)
        here = subterm_at(source, pos)
        if here is None:
            return f"position {list(pos)} does not exist"
        reduced = reduce_root(step.rule, here)
        if reduced is None:
            return f"{step.rule} does not apply at {list(pos)}"
        return None if replace_at(source, pos, reduced) == target else "mismatch"

    rule = rules_by_name.get(step.rule)
    if rule is None:
        return f"unknown rule {step.rule!r}"
    if subterm_at(current, pos) is None:
        return f"position {list(pos)} does not exist"
    flipped = BWD if step.direction == FWD else FWD
    outcomes = (_rewrites_to(rule, step.direction, current, pos, step.result),
                _rewrites_to(rule, flipped, step.result, pos, current))
    if True in outcomes:
        return None
    if outcomes == (None, None):
        return f"{step.rule} does not apply at {list(pos)}"
    return "mismatch"
