"""Command-line interface: run, study, list and validate scenarios.

Exit codes: 0 success, 2 configuration error, 3 runtime solver error.
"""

import argparse
import sys

from .errors import ConfigError, FemlbmError
from .scenarios import (
    default_config,
    get_spec,
    load_config,
    run_scenario,
    scenario_names,
    serialize_config,
    validate_config,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_common(parser):
    parser.add_argument("--config", metavar="PATH",
                        help="scenario configuration file")
    parser.add_argument("--scenario", metavar="NAME",
                        help="built-in scenario name (default config)")
    parser.add_argument("--out", metavar="DIR", default=None,
                        help="output directory for CSV/SVG artifacts")
    parser.add_argument("--override", metavar="KEY=VALUE", action="append",
                        default=[],
                        help="config override section.key=value (repeatable)")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress output")


def _load(args):
    if args.config:
        cfg = load_config(args.config)
    elif args.scenario:
        cfg = default_config(args.scenario)
    else:
        raise ConfigError(["provide --config PATH or --scenario NAME"])
    if args.override:
        cfg.apply_overrides(args.override)
    return cfg


def _cmd_run(args, expect_kind=None):
    cfg = _load(args)
    errors = validate_config(cfg)
    if errors:
        for msg in errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    name = cfg.get_str("scenario", "name")
    if expect_kind and get_spec(name).kind != expect_kind:
        print(f"config error: scenario {name!r} is not a {expect_kind} "
              f"scenario", file=sys.stderr)
        return EXIT_CONFIG
    report = run_scenario(cfg, outdir=args.out, quiet=args.quiet)
    if not args.quiet:
        print(f"{name}: completed in {report.wall_time:.2f} s")
        for path in report.outputs:
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_list(args):
    for name in scenario_names():
        spec = get_spec(name)
        print(f"{name:30s} [{spec.kind}]  {spec.description}")
    return EXIT_OK


def _cmd_validate(args):
    cfg = _load(args)
    errors = validate_config(cfg)
    if errors:
        for msg in errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        print(f"{cfg.get_str('scenario', 'name')}: configuration valid")
        if args.out:
            print(serialize_config(cfg), end="")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="femlbm",
        description="Hybrid FEM/LBM advection-diffusion scenario runner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_study = sub.add_parser(
        "study", help="execute a multi-level convergence/parameter study"
    )
    _add_common(p_study)
    p_study.set_defaults(func=lambda a: _cmd_run(a, expect_kind="study"))

    p_list = sub.add_parser("list", help="list built-in scenarios")
    p_list.set_defaults(func=_cmd_list)

    p_val = sub.add_parser("validate", help="validate a configuration")
    _add_common(p_val)
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for msg in exc.messages:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except FemlbmError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
