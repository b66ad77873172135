"""``qlz`` command line: one subcommand per experiment tag plus ``acceptance``.

Flags mirror config parameter keys. ``--config file.json`` is applied on
top of the flags, so values in the file win. Exit codes: 0 success,
2 invalid configuration, 3 acceptance failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from ..errors import ConfigInvalid
from .acceptance import acceptance
from .config import COMMON, SCHEMA, ExperimentConfig
from .run import run

EXIT_OK, EXIT_CONFIG, EXIT_ACCEPTANCE = 0, 2, 3

# types of keys whose default is None
_NONE_TYPES = {"seed": int, "t": float, "eta": float, "kappa": float, "scaling": str}


def _list_of(kind):
    def parse(text):
        try:
            return [kind(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated {kind.__name__} values") from None
    return parse


def _flag_type(key, default):
    if default is None:
        return _NONE_TYPES.get(key, str)
    if isinstance(default, bool):
        return lambda s: s.lower() in ("1", "true", "yes")
    if isinstance(default, list):
        return _list_of(float)
    return type(default)


def build_parser():
    parser = argparse.ArgumentParser(prog="qlz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for tag, schema in SCHEMA.items():
        p = sub.add_parser(tag, help=f"run the {tag} experiment")
        for key, default in {**schema, **COMMON}.items():
            p.add_argument(f"--{key}", dest=key, type=_flag_type(key, default), default=None,
                           help=f"default: {default}")
        p.add_argument("--config", help="JSON config; its values override flags")
        p.add_argument("--output", default="results", help="output directory")
    acc = sub.add_parser("acceptance", help="run the acceptance suite")
    acc.add_argument("--suite", default="fast", choices=["fast", "full"])
    acc.add_argument("--threads", type=int, default=1)
    acc.add_argument("--report", help="write a JSON report here")
    return parser


def _config_from_args(args):
    params = {k: getattr(args, k) for k in {**SCHEMA[args.command], **COMMON}
              if getattr(args, k) is not None}
    if params.get("seed") is not None and params["seed"] < 0:
        raise ConfigInvalid("seed must be a non-negative integer", "seed")
    cfg = ExperimentConfig(args.command, params, args.output)
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read {args.config}: {exc}", "config") from None
        file_cfg = ExperimentConfig.from_dict({"experiment": args.command, **data})
        if file_cfg.experiment != args.command:
            raise ConfigInvalid(f"config is for {file_cfg.experiment!r}, not {args.command!r}", "experiment")
        cfg.parameters.update(file_cfg.parameters)
        cfg.output_path = data.get("output_path", cfg.output_path)
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "acceptance":
        cap = os.environ.get("QLZ_THREADS")
        threads = min(args.threads, int(cap)) if cap and cap.isdigit() else args.threads
        results = acceptance(args.suite, threads=max(1, threads), report_path=args.report)
        passed = all(r.passed for r in results)
        print(f"acceptance ({args.suite}): {'PASS' if passed else 'FAIL'}")
        return EXIT_OK if passed else EXIT_ACCEPTANCE
    try:
        cfg = _config_from_args(args)
        table = run(cfg)
    except ConfigInvalid as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    stem = os.path.join(cfg.output_path, cfg.experiment)
    print(f"wrote {stem}.csv ({len(table)} rows, config {table.metadata['config_hash']})")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
