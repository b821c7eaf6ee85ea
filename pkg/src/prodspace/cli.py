import argparse
import csv
import io
import json
import logging
import os
import sys
import typing as t
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .calculus import CoefField, analyze
from .coordspace import doubling_fit
from .exception import PreconditionException, ProdSpaceException, RunConfigException
from .funcspaces import FAMILIES, FLAVORS, KINDS, SpaceParams, resolve_J, space_norm
from .report import VerificationReport, reports_to_csv
from .run_config import SUITE_NAMES, RunConfigAbstract, RunConfigDict, RunConfigJsonFile
from .run_config.abstract import parse_exponent
from .suites import get_suites
from .testsets import mode_field, random_fields
from .utils import format_float

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

SUMMARY_FILE = "summary.json"
NORM_CSV_HEADER = ["function", "space", "J", "cutoffs", "norm"]


def _dumps(data: t.Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _write_text(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def load_config(args: argparse.Namespace) -> RunConfigDict:
    if args.config:
        base: RunConfigDict = RunConfigJsonFile(args.config)
    else:
        base = RunConfigDict({})
    return base.with_overrides(
        output_dir=getattr(args, "out", None),
        seed=args.seed,
        threads=args.threads,
    )


def describe(config: RunConfigAbstract) -> t.Dict[str, t.Any]:
    ps = config.get_product_space()
    factors = []
    for model in ps.get_models():
        c0, d_est = doubling_fit(model)
        factors.append(
            {
                "name": model.get_name(),
                "params": model.get_params(),
                "n_modes": model.get_n_modes(),
                "n_nodes": model.get_n_nodes(),
                "d": model.get_dim_d(),
                "diameter": float(format_float(model.get_diameter())),
                "band_radius": float(format_float(model.get_band_radius())),
                "doubling_constant": float(format_float(c0)),
                "dimension_fit": float(format_float(d_est)),
            }
        )
    return {
        "version": __version__,
        "factors": factors,
        "spaces": [params.to_dict() for params in config.get_spaces()],
        "suites": [name for name in SUITE_NAMES if config.is_suite_enabled(name)],
    }


def _describe_text(summary: t.Dict[str, t.Any]) -> str:
    lines = [f"prodspace {summary['version']}"]
    for i, factor in enumerate(summary["factors"], start=1):
        params = ", ".join(f"{k}={v}" for k, v in sorted(factor["params"].items()))
        lines.append(
            f"factor {i}: {factor['name']}({params}) modes={factor['n_modes']} nodes={factor['n_nodes']} "
            f"d={factor['d']:g} band radius={factor['band_radius']:g} "
            f"doubling c0={factor['doubling_constant']:.4g} d_est={factor['dimension_fit']:.4g}"
        )
    for space in summary["spaces"]:
        lines.append(f"space: {json.dumps(space, sort_keys=True)}")
    lines.append(f"suites: {', '.join(summary['suites'])}")
    return "\n".join(lines) + "\n"


def parse_function_spec(config: RunConfigAbstract, spec: t.Sequence[str]) -> t.List[t.Tuple[str, CoefField]]:
    """
    "mode K L", "random SEED N" or "file PATH" into labelled coefficient
    fields; files hold the grid samples as a whitespace separated matrix.
    """
    ps = config.get_product_space()
    if not spec:
        raise RunConfigException("function spec is empty")
    kind, rest = spec[0], list(spec[1:])
    try:
        if kind == "mode" and len(rest) == 2:
            k, l = int(rest[0]), int(rest[1])
            return [(f"mode {k} {l}", mode_field(ps, k, l))]
        if kind == "random" and len(rest) == 2:
            seed, n = int(rest[0]), int(rest[1])
            return [(f"random {seed} {i}", cf) for i, cf in enumerate(random_fields(ps, n, seed))]
        if kind == "file" and len(rest) == 1:
            values = np.loadtxt(rest[0], ndmin=2)
            return [(f"file {rest[0]}", analyze(ps, values))]
    except (ValueError, OSError) as e:
        raise RunConfigException(f"Invalid function spec {' '.join(spec)!r}: {e}") from e
    raise RunConfigException(
        f"Invalid function spec {' '.join(spec)!r}; expected mode K L, random SEED N or file PATH"
    )


def _spaces_from_args(args: argparse.Namespace, config: RunConfigAbstract) -> t.List[SpaceParams]:
    flags = (args.family, args.kind, args.flavor, args.s, args.p, args.q)
    if all(v is None for v in flags):
        return config.get_spaces()
    s: t.Any = args.s if args.s is not None else [0.0]
    return [
        SpaceParams(
            s=s[0] if len(s) == 1 else s,
            p=parse_exponent(args.p) if args.p is not None else 2.0,
            q=parse_exponent(args.q) if args.q is not None else 2.0,
            family=args.family or "B",
            kind=args.kind or "classical",
            flavor=args.flavor or "mixed",
        )
    ]


def norm_rows(
    config: RunConfigAbstract, fields: t.Sequence[t.Tuple[str, CoefField]], spaces: t.Sequence[SpaceParams]
) -> t.List[t.Dict[str, t.Any]]:
    cs = config.get_cutoffs("primary")
    rows = []
    for label, cf in fields:
        for params in spaces:
            rows.append(
                {
                    "function": label,
                    "space": params.to_dict(),
                    "J": list(resolve_J(cf.get_space(), params)),
                    "cutoffs": cs.get_name(),
                    "norm": space_norm(cs, cf, params),
                }
            )
    return rows


def _norm_csv(rows: t.Sequence[t.Dict[str, t.Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(NORM_CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                row["function"],
                json.dumps(row["space"], sort_keys=True),
                json.dumps(row["J"]),
                row["cutoffs"],
                format_float(row["norm"]),
            ]
        )
    return buf.getvalue()


def _norm_json(rows: t.Sequence[t.Dict[str, t.Any]]) -> str:
    return _dumps([{**row, "norm": float(format_float(row["norm"]))} for row in rows])


def run_verify(config: RunConfigAbstract, names: t.Optional[t.Sequence[str]], fmt: str) -> int:
    suites = get_suites(config, None if not names or "all" in names else names)
    out_dir = config.get_output_dir()
    summary: t.Dict[str, t.Any] = {"suites": {}}
    failed = 0
    executor = ThreadPoolExecutor(max_workers=config.get_threads()) if config.get_threads() > 1 else None
    try:
        for suite in suites:
            logger.info("running suite %s", suite.name)
            reports = suite.run(executor)
            if fmt == "json":
                _write_text(
                    os.path.join(out_dir, f"{suite.name}.json"), _dumps([report.to_dict() for report in reports])
                )
            else:
                _write_text(os.path.join(out_dir, f"{suite.name}.csv"), reports_to_csv(reports))
            failures = [r.get_check_name() for r in reports if r.counts_as_failure()]
            failed += len(failures)
            summary["suites"][suite.name] = _suite_summary(reports, failures)
    finally:
        if executor is not None:
            executor.shutdown()
    summary["passed"] = failed == 0
    summary["seed"] = config.get_seed()
    _write_text(os.path.join(out_dir, SUMMARY_FILE), _dumps(summary))
    for name, entry in summary["suites"].items():
        logger.info("%s: %d checks, %d failed", name, entry["checks"], len(entry["failed"]))
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


def _suite_summary(reports: t.Sequence[VerificationReport], failures: t.List[str]) -> t.Dict[str, t.Any]:
    return {
        "checks": len(reports),
        "informational": sum(1 for r in reports if r.is_informational()),
        "failed": failures,
    }


def _parse_args(argv: t.Optional[t.List[str]] = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config; defaults apply when omitted")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="prodspace",
        description="Two-parameter spectral calculus on products of spaces.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    describe_parser = commands.add_parser("describe", parents=[common], help="summarize the configured models")
    describe_parser.add_argument("--format", choices=("text", "json"), default="text")

    norm_parser = commands.add_parser("norm", parents=[common], help="smoothness norms of a function")
    norm_parser.add_argument("function", nargs="+", help="mode K L | random SEED N | file PATH")
    norm_parser.add_argument("--format", choices=("csv", "json"), default="csv")
    norm_parser.add_argument("--family", choices=FAMILIES)
    norm_parser.add_argument("--kind", choices=KINDS)
    norm_parser.add_argument("--flavor", choices=FLAVORS)
    norm_parser.add_argument("--s", type=float, nargs="+")
    norm_parser.add_argument("--p")
    norm_parser.add_argument("--q")

    verify_parser = commands.add_parser("verify", parents=[common], help="run verification suites")
    verify_parser.add_argument("--suite", action="append", choices=SUITE_NAMES + ("all",))
    verify_parser.add_argument("--out", help="output directory")
    verify_parser.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser.parse_args(argv)


def main(argv: t.Optional[t.List[str]] = None) -> int:
    args = _parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args)
        if args.command == "describe":
            summary = describe(config)
            sys.stdout.write(_dumps(summary) if args.format == "json" else _describe_text(summary))
            return EXIT_OK
        if args.command == "norm":
            fields = parse_function_spec(config, args.function)
            rows = norm_rows(config, fields, _spaces_from_args(args, config))
            sys.stdout.write(_norm_json(rows) if args.format == "json" else _norm_csv(rows))
            return EXIT_OK
        return run_verify(config, args.suite, args.format)
    except PreconditionException as e:
        logger.error("precondition failed: %s", e)
        return EXIT_CONFIG_ERROR
    except (RunConfigException, ProdSpaceException) as e:
        logger.error("%s", e)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
