"""
Problem files:

    (problem
      (goal <term> <term>)
      (rule NAME <pattern> <pattern> [:dir both|fwd|bwd])*
      (config (KEY VALUE)*)?)

``;`` starts a comment that runs to the end of the line.
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import pyparsing as pp

from src.config.manager import PROBLEM_KEYS
from src.errors import DuplicateRule, TermSyntaxError
from src.lang.rewrite import BUILTIN_RULES, DIRECTION_NAMES, RuleSpec
from src.lang.syntax import PATTERN_GRAMMAR, SYMBOL_RE, TERM_GRAMMAR

logger = logging.getLogger(__name__)

BOOL_KEYS = {"beta", "eta", "annotate_bvars"}
NON_NEGATIVE_KEYS = {"explain_grace"}

# Located reports where a section's parse began, before whitespace and comments.
_LEADING = re.compile(r"(?:\s+|;[^\n]*)*")


@dataclass(frozen=True)
class ProblemFile:
    goal: tuple
    rules: tuple
    config: dict = field(default_factory=dict, hash=False, compare=False)
    name: str = ""


def _grammar():
    lp, rp = pp.Suppress("("), pp.Suppress(")")
    name = pp.Regex(SYMBOL_RE)

    goal = lp + pp.Keyword("goal") + TERM_GRAMMAR + TERM_GRAMMAR + rp
    direction = pp.Suppress(pp.Literal(":dir")) + pp.one_of("both fwd bwd", as_keyword=True)
    rule = (lp + pp.Keyword("rule") + name + PATTERN_GRAMMAR + PATTERN_GRAMMAR
            + pp.Optional(direction) + rp)

    atom = pp.Keyword("true") | pp.Keyword("false") | pp.Regex(r"-?\d+") | name
    value = atom | pp.Group(lp + pp.ZeroOrMore(name) + rp)
    entry = pp.Group(lp + pp.Regex(r"[a-z][a-z-]*") + pp.ZeroOrMore(value) + rp)
    config = lp + pp.Keyword("config") + pp.Group(pp.ZeroOrMore(entry)) + rp

    section = pp.Group(pp.Located(goal | rule | config))
    problem = lp + pp.Keyword("problem").suppress() + pp.Group(pp.ZeroOrMore(section)) + rp
    problem.ignore(pp.Regex(r";[^\n]*"))
    return problem


_PROBLEM = _grammar()


def _config_value(key, values, offset):
    if key == "proof_heads":
        heads = []
        for v in values:
            heads.extend(v if isinstance(v, pp.ParseResults) else [v])
        return sorted(set(heads))
    if len(values) != 1 or isinstance(values[0], pp.ParseResults):
        raise TermSyntaxError(f"config key '{key}' takes exactly one value", offset)
    raw = values[0]
    if key in BOOL_KEYS:
        if raw not in ("true", "false"):
            raise TermSyntaxError(f"config key '{key}' expects true or false", offset)
        return raw == "true"
    try:
        number = int(raw)
    except ValueError:
        raise TermSyntaxError(f"config key '{key}' expects an integer", offset) from None
    if number < 0 or (number == 0 and key not in NON_NEGATIVE_KEYS):
        raise TermSyntaxError(f"config key '{key}' must be positive", offset)
    return number


def parse_problem(text, name=""):
    try:
        sections = _PROBLEM.parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as e:
        raise TermSyntaxError(e.msg, len(text[:e.loc].encode("utf-8"))) from None

    goals, rules, config = [], [], {}
    seen = set()
    for start, section, _ in sections:
        start = _LEADING.match(text, start).end()
        offset = len(text[:start].encode("utf-8"))
        kind = section[0]
        if kind == "goal":
            goals.append((section[1], section[2]))
        elif kind == "rule":
            rule_name = section[1]
            if rule_name in seen:
                raise DuplicateRule(f"Rule '{rule_name}' is defined more than once")
            if rule_name in BUILTIN_RULES:
                raise DuplicateRule(f"Rule name '{rule_name}' is reserved for the builtin reduction")
            seen.add(rule_name)
            directions = DIRECTION_NAMES[section[4]] if len(section) > 4 else DIRECTION_NAMES["both"]
            rules.append(RuleSpec(rule_name, section[2], section[3], directions))
        else:
            for entry in section[1]:
                key = PROBLEM_KEYS.get(entry[0])
                if key is None:
                    raise TermSyntaxError(f"unknown config key '{entry[0]}'", offset)
                config[key] = _config_value(key, list(entry[1:]), offset)

    if not goals:
        raise TermSyntaxError("problem has no goal", 0)
    if len(goals) > 1:
        raise TermSyntaxError("problem has more than one goal", 0)
    logger.debug(f"Parsed problem '{name}' with {len(rules)} rules")
    return ProblemFile(goals[0], tuple(rules), config, name)


def load_problem(path):
    path = Path(path)
    return parse_problem(path.read_text(encoding="utf-8"), path.name)
