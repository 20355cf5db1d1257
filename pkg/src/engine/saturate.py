"""
Equality saturation with guarded dynamic rewrites.

Every iteration collects the matches of all rewrites (declaration order, then
β, then η) against the rebuilt graph, re-validates each one against the
current free-variable analysis when its turn comes, applies it and unions the
results right away. Rule applications always union a concrete instance of the
trigger with a concrete instance of the output, so every Rule/Beta/Eta entry
of the union log is one plain-term rewrite at the root.

When the goal classes meet before a trusted path joins them, the loop keeps
going for a few grace iterations so that an explanation can be built.
"""

import logging
import time
from dataclasses import dataclass, field

from src.config import limits
from src.config.statuses import (
    STATUS_ITER_LIMIT, STATUS_NODE_LIMIT, STATUS_PROVED, STATUS_SATURATED, STATUS_TIME_LIMIT,
)
from src.egraph.ematch import VALID, ematch, validate_match
from src.egraph.graph import BVAR, JUST_BETA, JUST_ETA, JUST_SUBST, EGraph, Justification, node_of_term
from src.egraph.subst import Shift, beta_class, eta_class, subst
from src.engine.explain import has_trusted_path
from src.engine.rules import compile_rules
from src.errors import UnderflowError
from src.lang.rewrite import BETA, ETA, normalize_rule
from src.lang.syntax import parse_pattern
from src.lang.term import Meta, beta_step, binders_at, children, eta_step, normalize, shift_term

logger = logging.getLogger(__name__)

BETA_PATTERN = parse_pattern("(app (lam ?t ?b) ?a)")
ETA_PATTERN = parse_pattern("(lam ?t (app ?f ?z))")


@dataclass(frozen=True)
class SaturationConfig:
    iter_limit: int = limits.ITER_LIMIT
    node_limit: int = limits.NODE_LIMIT
    time_limit_ms: int = limits.TIME_LIMIT_MS
    explain_grace: int = limits.EXPLAIN_GRACE
    enable_beta: bool = True
    enable_eta: bool = False
    annotate_bvars: bool = False
    proof_heads: frozenset = frozenset()

    def __post_init__(self):
        if min(self.iter_limit, self.node_limit, self.time_limit_ms) <= 0:
            raise ValueError("Saturation limits must be positive")
        if self.explain_grace < 0:
            raise ValueError("explain_grace must not be negative")
        object.__setattr__(self, "proof_heads", frozenset(self.proof_heads))

    @classmethod
    def from_manager(cls, config):
        return cls(
            iter_limit=int(config.get("iter_limit")),
            node_limit=int(config.get("node_limit")),
            time_limit_ms=int(config.get("time_limit_ms")),
            explain_grace=int(config.get("explain_grace")),
            enable_beta=config.beta,
            enable_eta=config.eta,
            annotate_bvars=config.annotate_bvars,
            proof_heads=config.proof_heads,
        )


@dataclass
class SaturationReport:
    status: str
    iterations: int
    node_count: int
    class_count: int
    goal_lhs: int
    goal_rhs: int
    applications: dict = field(default_factory=dict)
    aborted: dict = field(default_factory=dict)

    @property
    def proved(self):
        return self.status == STATUS_PROVED


@dataclass
class Encoded:
    """A goal and its rules after the encoding pipeline, plus where the goal landed in the graph."""
    graph: EGraph
    lhs: object
    rhs: object
    rules: list
    lhs_id: int
    rhs_id: int


def encode(lhs, rhs, rules, config, g=None):
    """ζ-reduce, erase proofs, optionally tag, then add the goal and both sides of every ground rule."""
    g = g if g is not None else EGraph()
    heads, annotate = config.proof_heads, config.annotate_bvars
    lhs = normalize(lhs, heads, annotate)
    rhs = normalize(rhs, heads, annotate)
    rules = [normalize_rule(r, heads, annotate) for r in rules]
    lhs_id = g.add_term(lhs)
    rhs_id = g.add_term(rhs)
    for rule in rules:
        if rule.is_ground:
            g.add_term(rule.lhs)
            g.add_term(rule.rhs)
    g.rebuild()
    return Encoded(g, lhs, rhs, rules, lhs_id, rhs_id)


# --- Instances ---

def _add_instance(g, p, resolve, depth=0):
    if isinstance(p, Meta):
        return resolve(p.name, depth)
    kids = [_add_instance(g, c, resolve, depth + binders_at(p, i)) for i, c in enumerate(children(p))]
    return g.add_enode(node_of_term(p, kids))


def apply_rewrite(g, rw, m):
    """
    Returns the unions that apply ``rw`` at match ``m``, or None when a shift
    underflows. The first union carries the rule; the rest are SubstInternal
    links between a concretely shifted value and its substitute class.
    """
    assignment = m.assignment
    root = _add_instance(g, rw.trigger, lambda name, depth: assignment[name])
    internal = []

    def resolve(name, out_depth):
        cid = assignment[name]
        in_depth = rw.trigger_depth(name)
        if out_depth == in_depth or not g.class_free_vars(cid):
            return cid
        offset = out_depth - in_depth
        concrete = g.add_term(shift_term(g.term_of(cid), offset, in_depth))
        internal.append((concrete, subst(g, cid, Shift(offset, in_depth)), JUST_SUBST))
        return concrete

    try:
        out = _add_instance(g, rw.output, resolve)
    except UnderflowError as e:
        logger.debug(f"Abandoned {rw} at {m.root}: {e}")
        return None
    return [(root, out, Justification.from_rule(rw.name, rw.direction))] + internal


def _beta_at(g, m):
    a = m.assignment
    root = _add_instance(g, BETA_PATTERN, lambda name, depth: a[name])
    reduct = g.add_term(beta_step(g.term_of(root)))
    target = beta_class(g, a["b"], a["a"])
    return [(root, reduct, JUST_BETA), (reduct, target, JUST_SUBST)]


def _eta_at(g, m):
    a = m.assignment
    if 0 in g.class_free_vars(a["f"]):
        return None
    zero = next((origin for node, origin in g.nodes(a["z"])
                 if node.op == BVAR and node.data[0] == 0), None)
    if zero is None:
        return None
    root = _add_instance(g, ETA_PATTERN, lambda name, depth: zero if name == "z" else a[name])
    reduct = g.add_term(eta_step(g.term_of(root)))
    target = eta_class(g, a["f"])
    return [(root, reduct, JUST_ETA), (reduct, target, JUST_SUBST)]


def _collect_builtin(g, pattern, apply):
    out = []
    for m in ematch(g, pattern):
        result = apply(g, m)
        if result is not None:
            out.extend(result)
    return out


def builtin_beta(g):
    g.rebuild()
    return _collect_builtin(g, BETA_PATTERN, _beta_at)


def builtin_eta(g):
    g.rebuild()
    return _collect_builtin(g, ETA_PATTERN, _eta_at)


# --- Loop ---

def _limit_status(g, config, iterations, started):
    if iterations >= config.iter_limit:
        return STATUS_ITER_LIMIT
    if g.node_count() >= config.node_limit:
        return STATUS_NODE_LIMIT
    if (time.monotonic() - started) * 1000 >= config.time_limit_ms:
        return STATUS_TIME_LIMIT
    return None


def run(g, rewrites, config, goal_lhs, goal_rhs):
    started = time.monotonic()
    builtins = []
    if config.enable_beta:
        builtins.append((BETA, BETA_PATTERN, _beta_at))
    if config.enable_eta:
        builtins.append((ETA, ETA_PATTERN, _eta_at))

    applications = {rw.name: 0 for rw in rewrites}
    aborted = {rw.name: 0 for rw in rewrites}
    for name, _, _ in builtins:
        applications[name] = 0
        aborted[name] = 0

    g.rebuild()
    iterations = 0
    saturated = False
    grace = config.explain_grace
    while True:
        joined = g.find(goal_lhs) == g.find(goal_rhs)
        if joined:
            if grace == 0 or has_trusted_path(g, goal_lhs, goal_rhs):
                status = STATUS_PROVED
                break
            logger.info(f"Goal joined without a trusted path, {grace} grace iterations left")
            grace -= 1
        if saturated:
            status = STATUS_PROVED if joined else STATUS_SATURATED
            break
        status = _limit_status(g, config, iterations, started)
        if status:
            status = STATUS_PROVED if joined else status
            break

        iterations += 1
        nodes_before, classes_before = g.node_count(), g.class_count()

        seen, work = set(), []
        for rw in rewrites:
            for m in ematch(g, rw.trigger):
                key = (rw.name, rw.direction, m.key())
                if key not in seen:
                    seen.add(key)
                    work.append((rw, m))
        for name, pattern, apply in builtins:
            for m in ematch(g, pattern):
                work.append(((name, apply), m))

        unions = 0
        for item, m in work:
            if g.node_count() >= config.node_limit:
                break
            if isinstance(item, tuple):
                name, apply = item
                result = apply(g, m)
            else:
                name = item.name
                decision = validate_match(g, item.trigger, m)
                if decision != VALID:
                    aborted[name] += 1
                    logger.debug(f"{item} at class {m.root}: {decision}")
                    continue
                result = apply_rewrite(g, item, m)
            if result is None:
                aborted[name] += 1
                continue
            applications[name] += 1
            for a, b, justification in result:
                if g.find(a) != g.find(b):
                    g.union(a, b, justification)
                    unions += 1
        g.rebuild()

        logger.info(f"Iteration {iterations}: {g.node_count()} nodes, {g.class_count()} classes, {unions} unions")
        saturated = (unions == 0 and g.node_count() == nodes_before and g.class_count() == classes_before)

    report = SaturationReport(status, iterations, g.node_count(), g.class_count(), goal_lhs, goal_rhs,
                              applications, aborted)
    logger.info(f"Saturation stopped: {status} after {iterations} iterations")
    return report


def prove(lhs, rhs, rules, config):
    """Encodes a goal, compiles its rules and saturates. Returns (Encoded, SaturationReport)."""
    encoded = encode(lhs, rhs, rules, config)
    rewrites = compile_rules(encoded.rules)
    report = run(encoded.graph, rewrites, config, encoded.lhs_id, encoded.rhs_id)
    return encoded, report
