"""Command-line entry point: ``icdlab {embed,run,compare,synth}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .errors import ContractError, DataIntegrityError, ParseError, StageError
from .experiment import cmd_compare, cmd_embed, cmd_run, cmd_synth, load_config

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
_DATA_ERRORS = (ParseError, ContractError, DataIntegrityError, FileNotFoundError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _experiment_flags(p):
    p.add_argument("--config", help="key = value experiment config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--label-mode", choices=["top18", "sub155", "top50"])
    p.add_argument("--composition", choices=["sumnorm", "sections", "stats"])
    p.add_argument("--strategy", choices=["br", "cc", "ecc", "mlknn"])
    p.add_argument("--out", help="output directory (embed: output file)")
    p.add_argument("--corpus")
    p.add_argument("--labels")
    p.add_argument("--vectors")
    p.add_argument("--tagging", choices=["none", "split", "pos"])
    p.add_argument("--pos-tags")
    p.add_argument("--preprocess", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--ensemble-size", type=int, help="number of chains for ECC")
    p.add_argument("--k", type=int, help="MLkNN neighbours")
    p.add_argument("--smoothing", type=float, help="MLkNN smoothing")
    p.add_argument("--ridge", type=float)
    p.add_argument("--solver", choices=["batch", "sgd"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--min-support", type=int)
    p.add_argument("--name", help="method name used by compare")


_OVERRIDES = ("seed", "folds", "label_mode", "composition", "strategy", "corpus", "labels", "vectors", "tagging",
              "pos_tags", "preprocess", "max_tokens", "ensemble_size", "k", "smoothing", "ridge", "solver",
              "epochs", "min_support", "name")


def build_parser():
    parser = _Parser(prog="icdlab", description="Multi-label ICD-9 prediction experiments on document embeddings.")
    parser.add_argument("--version", action="version", version=f"icdlab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("embed", help="write admission embeddings to a CSV matrix")
    _experiment_flags(p)

    p = sub.add_parser("run", help="cross-validate one configuration and write report.json")
    _experiment_flags(p)

    p = sub.add_parser("compare", help="Friedman/Nemenyi comparison of run outputs with a CD diagram")
    p.add_argument("runs", nargs="+", help="run directories or report.json files")
    p.add_argument("--alpha", type=float, default=0.05, choices=[0.05, 0.10])
    p.add_argument("--names", help="comma-separated method names, one per run")
    p.add_argument("--out", default="comparison")

    p = sub.add_parser("synth", help="generate a synthetic corpus, labels, vectors and config")
    p.add_argument("--n-admissions", type=int, default=200)
    p.add_argument("--n-labels", type=int, default=18)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--signal", type=float, default=1.0)
    p.add_argument("--ridge", type=float, default=1e-3, help="ridge written into the generated config")
    p.add_argument("--out", default="synth")
    return parser


def _config_from(args):
    overrides = {k: getattr(args, k) for k in _OVERRIDES}
    if args.command == "run":
        overrides["out"] = args.out
    return load_config(args.config, **overrides)


def _dispatch(args):
    if args.command == "embed":
        path = cmd_embed(_config_from(args), args.out)
        print(path)
    elif args.command == "run":
        report = cmd_run(_config_from(args))
        print(json.dumps({k: report[k] for k in ("config_hash", "seed", "micro_f1", "macro_f1")}))
    elif args.command == "compare":
        names = args.names.split(",") if args.names else None
        if names is not None and len(names) != len(args.runs):
            raise UsageError("--names must list one name per run")
        result = cmd_compare(args.runs, args.alpha, args.out, names)
        fr = result["friedman"]
        print(json.dumps({"avg_ranks": fr["avg_ranks"], "reject": fr["reject"], "cd": result["nemenyi"]["cd"]}))
    elif args.command == "synth":
        info = cmd_synth(args.n_admissions, args.n_labels, args.dim, args.seed, args.signal, args.out,
                         ridge=args.ridge)
        print(info["dir"])


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"icdlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        _dispatch(args)
    except UsageError as exc:
        print(f"icdlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"icdlab: error: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(exc.cause, _DATA_ERRORS) else EXIT_INTERNAL
    except _DATA_ERRORS as exc:
        print(f"icdlab: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"icdlab: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
