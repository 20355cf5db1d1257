"""
Command implementations behind src/main.py. Each returns a process exit code;
reports go to ``out`` (stdout by default) and diagnostics go to the log.
"""

import argparse
import concurrent.futures
import json
import logging
import sys
from pathlib import Path

from src.config.manager import ConfigManager
from src.config.statuses import (
    EXIT_ERROR, EXIT_OK, EXIT_UNPROVED, EXIT_UNVERIFIED,
    REPLAY_ACCEPTED, REPLAY_REJECTED, REPLAY_UNAVAILABLE,
)
from src.engine.explain import Explanation, explain, replay_check
from src.engine.saturate import SaturationConfig, prove
from src.errors import EggLamError, ExplanationIncomplete
from src.lang.oracle import OracleLimits, oracle_search
from src.lang.rewrite import normalize_rule
from src.lang.syntax import print_term
from src.lang.term import normalize
from src.problem.problem import load_problem

logger = logging.getLogger(__name__)

FLAG_KEYS = (
    "beta", "eta", "iter_limit", "node_limit", "time_limit_ms", "explain_grace",
    "annotate_bvars", "proof_heads", "oracle_max_depth", "oracle_max_term_size", "oracle_max_states",
)

_EXPECTED_ERRORS = (OSError, EggLamError, ValueError, KeyError, TypeError)


def make_flags(**overrides):
    """A flags namespace with every setting unset, as argparse would produce it."""
    values = {key: None for key in FLAG_KEYS}
    values.update(config=None, json=False)
    values.update(overrides)
    return argparse.Namespace(**values)


def settings_for(problem, flags):
    """Defaults < config file < the problem's (config ...) block < flags."""
    config = ConfigManager(getattr(flags, "config", None))
    config.update(problem.config)
    config.update({key: getattr(flags, key, None) for key in FLAG_KEYS})
    return config


def _report_error(source, e):
    logger.error(f"{source}: {e}", exc_info=logger.isEnabledFor(logging.DEBUG))


# --- prove ---

def solve(problem, config):
    """Runs the whole pipeline on a parsed problem. Returns (exit code, report dict)."""
    sat = SaturationConfig.from_manager(config)
    lhs, rhs = problem.goal
    encoded, result = prove(lhs, rhs, problem.rules, sat)

    explanation, replay = None, REPLAY_UNAVAILABLE
    if result.proved:
        try:
            explanation = explain(encoded.graph, encoded.lhs_id, encoded.rhs_id, encoded.lhs)
        except ExplanationIncomplete as e:
            logger.warning(f"{problem.name}: proved but no explanation: {e}")
        else:
            decision = replay_check(explanation, problem.rules, problem.goal,
                                    sat.proof_heads, sat.annotate_bvars)
            replay = REPLAY_ACCEPTED if decision.accepted else REPLAY_REJECTED
            if not decision.accepted:
                logger.warning(f"{problem.name}: explanation {decision}")
        code = EXIT_OK if replay == REPLAY_ACCEPTED else EXIT_UNVERIFIED
    else:
        code = EXIT_UNPROVED

    report = {
        "status": result.status,
        "iterations": result.iterations,
        "nodes": result.node_count,
        "classes": result.class_count,
        "explanation": explanation.to_json() if explanation else None,
        "replay": replay,
    }
    return code, report


def _print_trace(start, steps, out):
    print(f"  {print_term(start)}", file=out)
    for step in steps:
        print(f"  = {step.rule} {step.direction} {list(step.position)}  {print_term(step.result)}", file=out)


def _print_report(report, explanation, out):
    print(f"status: {report['status']} ({report['iterations']} iterations, "
          f"{report['nodes']} nodes, {report['classes']} classes)", file=out)
    if explanation is not None:
        _print_trace(explanation.start, explanation.steps, out)
    print(f"replay: {report['replay']}", file=out)


def cmd_prove(path, flags, out=None):
    out = out or sys.stdout
    try:
        problem = load_problem(path)
        code, report = solve(problem, settings_for(problem, flags))
    except _EXPECTED_ERRORS as e:
        _report_error(path, e)
        return EXIT_ERROR
    if flags.json:
        print(json.dumps(report), file=out)
    else:
        explanation = Explanation.from_json(report["explanation"]) if report["explanation"] else None
        _print_report(report, explanation, out)
    return code


# --- check ---

def load_explanation(path):
    """Reads either a bare explanation or a full prove report."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if "explanation" in data:
        data = data["explanation"]
        if data is None:
            raise ValueError(f"{path} has no explanation")
    return Explanation.from_json(data)


def cmd_check(problem_path, explanation_path, flags, out=None):
    out = out or sys.stdout
    try:
        problem = load_problem(problem_path)
        explanation = load_explanation(explanation_path)
        config = settings_for(problem, flags)
        decision = replay_check(explanation, problem.rules, problem.goal,
                                config.proof_heads, config.annotate_bvars)
    except _EXPECTED_ERRORS as e:
        _report_error(explanation_path, e)
        return EXIT_ERROR

    if flags.json:
        print(json.dumps({"replay": REPLAY_ACCEPTED if decision.accepted else REPLAY_REJECTED,
                          "step": decision.index, "reason": decision.reason}), file=out)
    else:
        print(str(decision), file=out)
        if not decision.accepted and decision.index < len(explanation.steps):
            step = explanation.steps[decision.index]
            print(f"  failing step: {step.rule} {step.direction} {list(step.position)}  "
                  f"{print_term(step.result)}", file=out)
    return EXIT_OK if decision.accepted else EXIT_UNPROVED


# --- oracle ---

def cmd_oracle(path, flags, out=None):
    out = out or sys.stdout
    try:
        problem = load_problem(path)
        config = settings_for(problem, flags)
        heads, annotate = config.proof_heads, config.annotate_bvars
        lhs = normalize(problem.goal[0], heads, annotate)
        rhs = normalize(problem.goal[1], heads, annotate)
        rules = [normalize_rule(r, heads, annotate) for r in problem.rules]
        oracle_limits = OracleLimits(
            max_depth=int(config.get("oracle_max_depth")),
            max_term_size=int(config.get("oracle_max_term_size")),
            max_states=int(config.get("oracle_max_states")),
        )
        steps = oracle_search(lhs, rhs, rules, config.beta, config.eta, oracle_limits)
    except _EXPECTED_ERRORS as e:
        _report_error(path, e)
        return EXIT_ERROR

    if flags.json:
        trace = Explanation(lhs, tuple(steps)).to_json() if steps is not None else None
        print(json.dumps({"status": "reached" if steps is not None else "not-reached",
                          "trace": trace}), file=out)
    elif steps is None:
        print("NOT-REACHED", file=out)
    else:
        print(f"reached in {len(steps)} steps", file=out)
        _print_trace(lhs, steps, out)
    return EXIT_OK if steps is not None else EXIT_UNPROVED


# --- batch ---

def _solve_path(path, flags):
    try:
        problem = load_problem(path)
        return solve(problem, settings_for(problem, flags))
    except _EXPECTED_ERRORS as e:
        _report_error(path, e)
        return EXIT_ERROR, {"error": str(e)}


def cmd_batch(directory, flags, jobs=1, out=None):
    """Proves every *.problem file in ``directory``; one JSON line per file, in name order."""
    out = out or sys.stdout
    paths = sorted(Path(directory).glob("*.problem"))
    if not paths:
        logger.warning(f"No .problem files in {directory}")
        return EXIT_OK
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        results = list(executor.map(lambda p: _solve_path(p, flags), paths))

    worst = EXIT_OK
    for path, (code, report) in zip(paths, results):
        print(json.dumps({"problem": path.name, "exit": code, **report}), file=out)
        worst = max(worst, code)
    logger.info(f"Batch of {len(paths)} problems finished, worst exit code {worst}")
    return worst
