"""Command line: ``dcfcap {solve,simulate,sweep,figures} [options]``.

Exit codes: 0 success, 1 usage/config error, 2 solver failure, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .chain import ConvergenceError, DegenerateChainError
from .config import ConfigError, parse_config, keys_help
from .figures import (RECIPES, PointError, emit_csv, figure, gnuplot_script, simulate_point,
                      solve_point, sweep)

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("--out", type=Path, help="output CSV path")
    common.add_argument("--seed", type=int, help="base random seed (u64)")
    common.add_argument("--slots", type=int, help="simulated slots per run")
    common.add_argument("--replications", type=int, help="simulation replications")
    common.add_argument("--workers", type=int, help="parallel worker processes")
    common.add_argument("--sim", action="store_true", help="attach simulator columns to analytic output")
    common.add_argument("--gnuplot-script", action="store_true",
                        help="also write a gnuplot script next to the CSV")
    common.add_argument("-v", "--verbose", action="store_true")

    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="dcfcap", formatter_class=fmt, epilog=keys_help(),
                     description="Saturation throughput of 802.11b DCF with NAK-based loss "
                                 "differentiation, channel errors and Rayleigh capture.")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], formatter_class=fmt, epilog=keys_help(),
                   help="solve the analytical model at one point")
    sub.add_parser("simulate", parents=[common], formatter_class=fmt, epilog=keys_help(),
                   help="run the Monte-Carlo simulator at one point")
    sub.add_parser("sweep", parents=[common], formatter_class=fmt, epilog=keys_help(),
                   help="sweep one axis (sweep_axis/start/stop/step keys)")
    fig = sub.add_parser("figures", parents=[common], formatter_class=fmt, epilog=keys_help(),
                         help="emit the data set of a figure")
    fig.add_argument("figure", choices=sorted(RECIPES) + ["all"])
    return parser


def _overrides(args) -> list[str]:
    extra = list(args.overrides)
    for key in ("seed", "slots", "replications", "workers"):
        value = getattr(args, key)
        if value is not None:
            extra.append(f"{key}={value}")
    return extra


def _write(columns, rows, path: Path, title: str, gnuplot: bool) -> None:
    emit_csv(columns, rows, path)
    if gnuplot:
        path.with_suffix(".gp").write_text(gnuplot_script(path, columns, title), encoding="utf-8")


def _print_row(row: dict) -> None:
    for key, value in row.items():
        print(f"{key} = {value:.9g}" if isinstance(value, float) else f"{key} = {value}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
    except OSError as exc:
        print(f"dcfcap: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = parse_config(text, _overrides(args), args.mode)
    except ConfigError as exc:
        print(f"dcfcap: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.mode == "solve":
            row = solve_point(config, with_sim=args.sim)
            _print_row(row)
            if args.out:
                _write(list(row), [list(row.values())], args.out, "solve", args.gnuplot_script)
        elif args.mode == "simulate":
            row = simulate_point(config)
            _print_row(row)
            if args.out:
                _write(list(row), [list(row.values())], args.out, "simulate", args.gnuplot_script)
        elif args.mode == "sweep":
            columns, rows = sweep(config, with_sim=args.sim)
            out = args.out or Path(f"sweep_{config.sweep_axis}.csv")
            _write(columns, rows, out, f"sweep over {config.sweep_axis}", args.gnuplot_script)
        else:
            ids = sorted(RECIPES) if args.figure == "all" else [args.figure]
            for fig_id in ids:
                columns, rows = figure(fig_id, config, with_sim=args.sim)
                if args.out and len(ids) == 1:
                    out = args.out
                else:
                    out = (args.out or Path(".")) / f"{fig_id}.csv"
                _write(columns, rows, out, RECIPES[fig_id].title, args.gnuplot_script)
                print(f"{fig_id}: {len(rows)} rows -> {out}")
    except (PointError, ConvergenceError, DegenerateChainError) as exc:
        print(f"dcfcap: solver failure:\n{exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"dcfcap: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
