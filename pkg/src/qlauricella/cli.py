"""Command line entry point: ``qlauricella {eval,deriv,verify,suite,expand}``.

Exit status: 0 when every case passes, 1 on a verification failure, 2 on
bad input (schema errors, unreadable files, unknown suite).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import paramderiv, suites
from .descriptor import SCHEMA_ID, bundled, parse_descriptor
from .errors import QLauricellaError, SchemaError, UnknownSuite
from .series import EvalConfig

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _with_precision(cfg: EvalConfig, precision: str | None) -> EvalConfig:
    if precision is None or precision == cfg.precision:
        return cfg
    if precision == "extended":
        return replace(cfg, precision="extended", eps_term=min(cfg.eps_term, 1e-32),
                       eps_prod=min(cfg.eps_prod, 1e-36))
    return replace(cfg, precision="double")


def _load(args):
    if args.input is None:
        raise SchemaError(["--input is required for this command"])
    if args.input.startswith("bundled:"):
        doc = bundled(args.input.split(":", 1)[1])
    else:
        doc = parse_descriptor(args.input)
    return replace(doc, config=_with_precision(doc.config, args.precision))


def _emit(args, report: dict, text: str | None = None) -> None:
    if args.format == "json":
        out = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        out = text if text is not None else suites.format_text(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _status(report: dict) -> int:
    return EXIT_FAIL if report["summary"]["failed"] else EXIT_OK


def cmd_eval(args) -> int:
    report = suites.run_eval(_load(args))
    _emit(args, report)
    return _status(report)


def cmd_deriv(args) -> int:
    report = suites.run_deriv(_load(args), args.tol)
    _emit(args, report)
    return _status(report)


def cmd_verify(args) -> int:
    report = suites.run_suite(_load(args), args.tol)
    _emit(args, report)
    return _status(report)


def cmd_suite(args) -> int:
    if args.name is None and args.input is None:
        raise SchemaError(["give a suite name or --input"])
    if args.name is None:
        report = suites.run_suite(_load(args), args.tol)
    else:
        cfg = _with_precision(EvalConfig(), args.precision)
        report = suites.run_suite(args.name, args.tol, args.seed, cfg)
    _emit(args, report)
    return _status(report)


def cmd_expand(args) -> int:
    doc = _load(args)
    refs = doc.params or tuple(doc.spec.params())
    expansions, lines = [], []
    for ref in refs:
        terms = paramderiv.expand_derivative(doc.spec, ref)
        expansions.append({"param": str(ref), "terms": [t.to_dict() for t in terms]})
        lines.append(f"D[{ref}] F =")
        lines.extend(f"    {t.describe()}" for t in terms)
        if not terms:
            lines.append("    0")
    report = {"schema": SCHEMA_ID, "kind": "expand", "expansions": expansions}
    _emit(args, report, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="PATH",
                        help="descriptor JSON file, or bundled:NAME for a shipped example")
    common.add_argument("--tol", type=float, default=1e-9, help="verification tolerance (default 1e-9)")
    common.add_argument("--precision", choices=("double", "extended"), default=None)
    common.add_argument("--seed", type=int, default=suites.DEFAULT_SEED, help="seed for randomized suites")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="qlauricella",
        description="Evaluate q-Lauricella series and verify their parameter q-derivatives.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="sum the series at every point").set_defaults(func=cmd_eval)
    sub.add_parser("deriv", parents=[common], help="definitional and closed-form parameter derivatives"
                   ).set_defaults(func=cmd_deriv)
    sub.add_parser("verify", parents=[common], help="like deriv, exit 1 on any disagreement"
                   ).set_defaults(func=cmd_verify)
    p = sub.add_parser("suite", parents=[common], help="run a built-in suite: " + ", ".join(suites.SUITES))
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_suite)
    sub.add_parser("expand", parents=[common], help="print closed-form expansion terms"
                   ).set_defaults(func=cmd_expand)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, UnknownSuite) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QLauricellaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
