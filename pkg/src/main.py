import argparse
import logging
import sys
from pathlib import Path

project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from src.cli.commands import cmd_batch, cmd_check, cmd_oracle, cmd_prove
from src.config.statuses import EXIT_ERROR

logger = logging.getLogger(__name__)


def _heads(text):
    return [h for h in (part.strip() for part in text.split(",")) if h]


def _add_settings(parser):
    parser.add_argument("--config", help="JSON config file (default ~/.config/egglam/config.json)")
    parser.add_argument("--json", action="store_true", help="Print the machine-readable report")
    parser.add_argument("--beta", action=argparse.BooleanOptionalAction, default=None,
                        help="Enable built-in beta reduction")
    parser.add_argument("--eta", action=argparse.BooleanOptionalAction, default=None,
                        help="Enable built-in eta reduction")
    parser.add_argument("--annotate-bvars", dest="annotate_bvars",
                        action=argparse.BooleanOptionalAction, default=None,
                        help="Tag bound variables with their binder type")
    parser.add_argument("--iter-limit", dest="iter_limit", type=int)
    parser.add_argument("--node-limit", dest="node_limit", type=int)
    parser.add_argument("--time-limit-ms", dest="time_limit_ms", type=int)
    parser.add_argument("--explain-grace", dest="explain_grace", type=int,
                        help="Extra iterations to find an explanation once the goal is joined")
    parser.add_argument("--proof-heads", dest="proof_heads", type=_heads,
                        help="Comma-separated head symbols of proof terms to erase")
    parser.add_argument("--oracle-max-depth", dest="oracle_max_depth", type=int)
    parser.add_argument("--oracle-max-term-size", dest="oracle_max_term_size", type=int)
    parser.add_argument("--oracle-max-states", dest="oracle_max_states", type=int)


def build_parser():
    parser = argparse.ArgumentParser(description="egglam - equality saturation prover for de Bruijn lambda terms")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="Saturate, explain and replay one problem")
    p.add_argument("problem")
    _add_settings(p)

    p = sub.add_parser("check", help="Replay a saved explanation against a problem")
    p.add_argument("problem")
    p.add_argument("explanation")
    _add_settings(p)

    p = sub.add_parser("oracle", help="Search for a rewrite trace on plain terms")
    p.add_argument("problem")
    _add_settings(p)

    p = sub.add_parser("batch", help="Prove every .problem file in a directory")
    p.add_argument("directory")
    p.add_argument("--jobs", type=int, default=1, help="Worker threads")
    _add_settings(p)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )

    if args.command == "prove":
        return cmd_prove(args.problem, args)
    if args.command == "check":
        return cmd_check(args.problem, args.explanation, args)
    if args.command == "oracle":
        return cmd_oracle(args.problem, args)
    return cmd_batch(args.directory, args, jobs=args.jobs)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except Exception:
        logger.critical("Fatal Error", exc_info=True)
        sys.exit(EXIT_ERROR)
