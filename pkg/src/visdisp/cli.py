"""Command-line entry point.

Exit codes: 0 success, 2 validation failure, 3 blow-up.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ._validation import DomainError, ValidationError
from .harness import (SweepError, compute_reference, build_grid, emit_outputs, initial_state,
                      load_config, plot_l1_vs_epsilon, read_rows_csv, run_experiment, sweep,
                      write_rows_csv)
from .models import verify_assumptions
from .solver import BlowUpError, write_snapshot_csv

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BLOWUP = 3


def _epsilons(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from err


def _output_dir(config, path_arg):
    if path_arg:
        return path_arg
    return config.output_dir or "."


def cmd_run(args) -> int:
    config = load_config(args.config)
    config = config.replace(output_dir=_output_dir(config, args.output))
    record = run_experiment(config)
    for name, value in record.as_row().items():
        print(f"{name}: {value}")
    if record.seam_warning:
        print("warning: solution reaches the periodic seam band", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    out = _output_dir(config, args.output)
    config = config.replace(output_dir=out)
    theorem = "free" if args.theorem == "free" else f"thm{args.theorem}"
    try:
        result = sweep(config, theorem, args.coupling_constant, args.epsilons,
                       exponent=args.exponent, workers=args.workers)
    except SweepError as err:
        print(f"sweep aborted: {err}", file=sys.stderr)
        raise err.cause
    paths = emit_outputs(result, {"csv", "svg"}, out)
    for row in result.rows:
        print(f"epsilon={row.epsilon:g} delta={row.delta:.3g} l1_error={row.l1_error:.6g} "
              f"tv_ratio={row.tv_ratio:.4g} regime={row.regime}")
    print(f"l1_error strictly decreasing: {result.l1_decreasing}")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_reference(args) -> int:
    config = load_config(args.config)
    grid = build_grid(config)
    u0 = initial_state(config, grid)
    ref = compute_reference(config, u0)
    out = Path(_output_dir(config, args.output)) / "reference.csv"
    write_snapshot_csv(ref, out)
    print(f"{ref.scheme} reference at t={ref.t:g} on {ref.grid.cells} cells -> {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    config = load_config(args.config)
    report = verify_assumptions(config.flux_model(), config.viscosity_model(),
                                tuple(config.assumption_range), config.assumption_samples)
    print(report.summary())
    return EXIT_OK


def cmd_plot(args) -> int:
    src = Path(args.result)
    rows = read_rows_csv(src)
    if not rows:
        raise ValidationError(f"{src} holds no rows")
    out = Path(args.output) if args.output else src.with_suffix(".svg")
    plot_l1_vs_epsilon(rows, out)
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="visdisp",
                                     description="Viscous-dispersive conservation-law experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configured experiment")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="output directory (overrides output_dir)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep epsilon along a coupling curve delta = C eps^p")
    p.add_argument("config")
    p.add_argument("--theorem", choices=["41", "42", "43", "free"], required=True)
    p.add_argument("--coupling-constant", type=float, default=0.1)
    p.add_argument("--epsilons", type=_epsilons, required=True)
    p.add_argument("--exponent", type=float, help="coupling exponent for --theorem free")
    p.add_argument("--workers", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reference", help="write the entropy-solution reference at T")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("verify-assumptions", help="sample-check the structural assumptions")
    p.add_argument("config")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="plot L1 error against epsilon from a sweep CSV")
    p.add_argument("result")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except BlowUpError as err:
        print(f"blow-up: {err}", file=sys.stderr)
        return EXIT_BLOWUP
    except (ValidationError, DomainError) as err:
        print(f"invalid input: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
