"""``qkmm`` command line.

Exit status: 0 on success, 2 for usage/configuration errors, 3 when a run
fails numerically or on input validation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import ConfigurationError, NumericError, QkmmError, ValidationError
from ..noise import NoiseParams
from .harness import (COMMANDS, DEFAULT_SOURCE_SETS, TASKS, ExperimentConfig, parse_sources)
from .plots import emit_plots

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("qkmm")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse already exits 2; keep the message terse
        self.print_usage(sys.stderr)
        raise SystemExit(f"qkmm: error: {message}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML or JSON file with ExperimentConfig keys")
    p.add_argument("--dims", type=_int_list, help="comma-separated dimensions, e.g. 2,4,8")
    p.add_argument("--shots", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, help="output directory (default: results)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--exact", action="store_true", default=None,
                   help="use exact probabilities instead of sampling")
    p.add_argument("--workers", type=int, help="process pool size")
    p.add_argument("--native-polarity", action="store_true", default=None,
                   help="encode zero controls as gate polarity rather than X pairs")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qkmm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="trials of one task over a dimension sweep")
    _common(run)
    run.add_argument("--task", choices=TASKS)
    run.add_argument("--noise-config", type=Path)
    run.add_argument("--sources", help="noise sources for a noisy run, e.g. T1+GATE or all")
    run.add_argument("--matrix-a", type=Path)
    run.add_argument("--matrix-b", type=Path)
    run.add_argument("--auto-normalize", action="store_true", default=None)
    run.add_argument("--bound", type=float)
    run.add_argument("--parallel-counts", type=_int_list, help="K for task mmm (first value)")

    cmp_ = sub.add_parser("compare", help="QKMM against Swap/Hadamard tests")
    _common(cmp_)
    cmp_.add_argument("--task", choices=("v2v", "v2m", "m2m"))
    cmp_.add_argument("--methods", type=_str_list)

    ns = sub.add_parser("noise-sweep", help="fidelity per noise-source subset")
    _common(ns)
    ns.add_argument("--task", choices=("v2v", "v2m", "m2m", "swap", "hadamard"))
    ns.add_argument("--noise-config", type=Path)
    ns.add_argument("--sources", help="subsets, e.g. none,T1,T2,GATE,all")
    ns.add_argument("--bound", type=float)

    mm = sub.add_parser("mmm-sweep", help="M-MM cost per product as K grows")
    _common(mm)
    mm.add_argument("--parallel-counts", type=_int_list)
    mm.add_argument("--bound", type=float)

    gc = sub.add_parser("gatecount", help="closed-form and counted gate totals")
    _common(gc)

    pl = sub.add_parser("plots", help="write plot specs for a result directory")
    pl.add_argument("result_dir", type=Path, nargs="?", default=Path("results"))
    pl.add_argument("-v", "--verbose", action="store_true")
    return parser


_DEFAULT_DIMS = {"run": (2, 4), "compare": (2, 4, 8), "noise-sweep": (2, 4),
                 "mmm-sweep": (4, 8, 16), "gatecount": (2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base: dict = {}
    if getattr(args, "config", None):
        base = ExperimentConfig.from_file(args.config).to_dict()
    base.setdefault("dims", _DEFAULT_DIMS[args.command])
    if args.command == "gatecount":
        base["task"] = "gatecount"
    elif args.command == "mmm-sweep":
        base["task"] = "mmm"
    mapping = {"dims": "dims", "shots": "shots", "trials": "trials", "seed": "seed",
               "format": "format", "exact": "exact", "workers": "workers", "task": "task",
               "bound": "bound", "methods": "methods", "parallel_counts": "parallel_counts",
               "auto_normalize": "auto_normalize"}
    for attr, key in mapping.items():
        val = getattr(args, attr, None)
        if val is not None:
            base[key] = val
    if getattr(args, "out", None) is not None:
        base["output_dir"] = str(args.out)
    if getattr(args, "native_polarity", None):
        base["explicit_x"] = False
    if getattr(args, "matrix_a", None):
        base["matrix_a"] = str(args.matrix_a)
        base["matrix_source"] = "file"
    if getattr(args, "matrix_b", None):
        base["matrix_b"] = str(args.matrix_b)

    noise_cfg = getattr(args, "noise_config", None)
    sources = getattr(args, "sources", None)
    if noise_cfg is not None:
        base["noise"] = NoiseParams.from_file(noise_cfg).to_dict()
    if args.command == "noise-sweep":
        base.setdefault("noise", None)
        if base["noise"] is None:
            base["noise"] = NoiseParams().to_dict()
        base["source_sets"] = parse_sources(sources) if sources else DEFAULT_SOURCE_SETS
    elif sources is not None:
        subsets = parse_sources(sources)
        if len(subsets) != 1:
            raise ConfigurationError("run takes one source subset, e.g. --sources T1+GATE")
        (subset,) = subsets
        noise = NoiseParams.from_dict(base["noise"]) if base.get("noise") else NoiseParams()
        base["noise"] = noise.with_sources(subset).to_dict()
    return ExperimentConfig.from_dict(base)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            if isinstance(exc.code, str):
                print(exc.code, file=sys.stderr)
            return EXIT_USAGE
        return EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "plots":
        for path in emit_plots(args.result_dir):
            print(path)
        return EXIT_OK
    try:
        config = config_from_args(args)
        log.info("config: %s", json.dumps(config.to_dict(), default=str))
        output = COMMANDS[args.command](config)
    except ConfigurationError as exc:
        print(f"qkmm: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, NumericError) as exc:
        print(f"qkmm: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QkmmError, ArithmeticError, FileNotFoundError) as exc:
        print(f"qkmm: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in output.files:
        print(path)
    log.info("summary: %s", json.dumps(output.summary["summary"], default=str)[:2000])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
