#!/usr/bin/env python3
"""
Runs prove and oracle over every corpus problem, twice.

Reports every problem that prove settles (exit 0) while the oracle cannot
reach the goal, and any difference between the JSON reports of the two runs.
Exits 1 if either is found.
"""
import argparse
import io
import json
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.cli.commands import cmd_oracle, cmd_prove, make_flags
from src.config.statuses import EXIT_OK

CORPUS_DIR = Path(__file__).parent.parent / "corpus"

# The oracle gets more room than the defaults when cross-checking.
ORACLE_FLAGS = dict(oracle_max_depth=10, oracle_max_term_size=60, oracle_max_states=200_000)


def prove_all(paths):
    reports = {}
    for path in paths:
        buf = io.StringIO()
        code = cmd_prove(path, make_flags(json=True), out=buf)
        reports[path.name] = (code, buf.getvalue())
    return reports


def main():
    parser = argparse.ArgumentParser(description="Cross-check the corpus against the oracle")
    parser.add_argument("--corpus", default=str(CORPUS_DIR))
    args = parser.parse_args()
    logging.basicConfig(level=logging.WARNING, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    paths = sorted(Path(args.corpus).glob("*.problem"))
    first = prove_all(paths)
    second = prove_all(paths)

    failures = 0
    for path in paths:
        code, text = first[path.name]
        if text != second[path.name][1]:
            print(f"NONDETERMINISTIC {path.name}")
            failures += 1
        status = json.loads(text)["status"] if text else "error"
        line = f"{path.name:32} prove={code} status={status}"
        if code == EXIT_OK:
            oracle = cmd_oracle(path, make_flags(**ORACLE_FLAGS), out=io.StringIO())
            line += f" oracle={oracle}"
            if oracle != EXIT_OK:
                line += "  DISAGREE"
                failures += 1
        print(line)

    print(f"{len(paths)} problems, {failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
