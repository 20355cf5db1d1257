import logging
from dataclasses import dataclass, field
from typing import Optional

from src.errors import UnboundMetavar
from src.lang.rewrite import BWD, FWD, metavars, pattern_depths

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompiledRewrite:
    """One direction of a rule, ready for e-matching."""
    name: str
    direction: str
    trigger: object
    output: object
    lhs_depths: dict = field(default_factory=dict, hash=False, compare=False)
    rhs_depths: dict = field(default_factory=dict, hash=False, compare=False)
    builtin: Optional[str] = None

    def trigger_depth(self, var):
        return self.lhs_depths[var][0]

    def __str__(self):
        return f"{self.name}:{self.direction}"


def compile_rule(rule):
    """One rewrite per direction the rule allows, in (fwd, bwd) order."""
    out = []
    for step_dir in (FWD, BWD):
        if not rule.allows(step_dir):
            continue
        trigger, output = rule.sides(step_dir)
        unbound = metavars(output) - metavars(trigger)
        if unbound:
            raise UnboundMetavar(rule.name, sorted(unbound)[0], step_dir)
        out.append(CompiledRewrite(
            name=rule.name,
            direction=step_dir,
            trigger=trigger,
            output=output,
            lhs_depths=pattern_depths(trigger),
            rhs_depths=pattern_depths(output),
        ))
    logger.debug(f"Compiled rule '{rule.name}' into {len(out)} rewrites")
    return out


def compile_rules(rules):
    return [rw for rule in rules for rw in compile_rule(rule)]
