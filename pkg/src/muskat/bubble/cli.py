"""Command-line entry point: ``muskat-bubble simulate | analyze | verify``."""
import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

import inflection
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .config import RunConfig, load_config
from .diagonalization import build_transform, cs_bound, l1_operator_norm, verify_diagonalizes, verify_inverse
from .errors import BubbleError, ConfigError
from .evolution import decay_prediction, run, write_outputs
from .linear_analysis import integral_I1, integral_I2, integral_I_quadrature, linear_coefficients
from .suites import DEFAULT_N_MODES, DEFAULT_SEED, SuiteRunner, suite_names

LOG_LEVEL_ENV = "MUSKAT_LOG_LEVEL"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3

console = Console()


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="muskat-bubble", description="Rising-bubble Muskat solver in angle/length variables.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    simulate = commands.add_parser("simulate", help="run a configured simulation and write its trajectory")
    simulate.add_argument("config", help="YAML run configuration")

    analyze = commands.add_parser("analyze", help="tables of the linear mode system for the configured parameters")
    analyze.add_argument("config", help="YAML run configuration")
    tables = analyze.add_mutually_exclusive_group()
    tables.add_argument("--spectrum", action="store_true", help="a(k), b(k) and c1")
    tables.add_argument("--transform", action="store_true", help="residuals and norms of S and its inverse")
    tables.add_argument("--integrals", action="store_true", help="I1 and I2, closed form against quadrature")

    verify = commands.add_parser("verify", help="run a named acceptance suite")
    verify.add_argument("--suite", required=True, help=f"one of {', '.join(suite_names())}")
    verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    verify.add_argument("--jobs", type=int, default=1)
    verify.add_argument("--n-modes", type=int, default=DEFAULT_N_MODES,
                        help=f"band N of the suites (default {DEFAULT_N_MODES}); cheap suites cap it at 16 or 32")
    verify.add_argument("--output", help="directory for the <suite>-verify.json report")
    return parser


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = os.getenv(LOG_LEVEL_ENV, "INFO").upper()
    if verbose:
        level = "DEBUG"
    elif quiet:
        level = "WARNING"
    logging.basicConfig(level=level, format="%(message)s", datefmt="[%X]",
                        handlers=[RichHandler(console=Console(stderr=True), show_path=False)], force=True)


def cmd_simulate(config_path: str) -> int:
    config = load_config(config_path)
    outputs = config.outputs
    record = run(config.initial_state(), config.params, config.solver, snapshots=outputs.curve_snapshots)
    write_outputs(record, outputs.resolved_directory, outputs.run_name, outputs.formats, outputs.curve_snapshots)
    if record.status != "completed":
        console.print(f"[red]Run failed:[/red] {record.error}")
        return EXIT_SOLVER
    final = record.rows[-1]
    console.print(f"Completed t={final['t']:.6g}: |theta|_F121={final['norm_f121']:.3e}, L={final['length']:.12f}")
    return EXIT_OK


def spectrum_table(config: RunConfig) -> Dict:
    coeffs = linear_coefficients(config.params, config.initial.mean_angle, config.solver.n_modes)
    prediction = decay_prediction(config.params)
    return {
        "rows": coeffs.rows(),
        "c1": {"re": coeffs.c1.real, "im": coeffs.c1.imag},
        "slowest_rate": prediction.rate,
    }


def transform_table(config: RunConfig) -> Dict:
    coeffs = linear_coefficients(config.params, config.initial.mean_angle, config.solver.n_modes)
    transform = build_transform(coeffs)
    return {
        "n_modes": transform.n_modes,
        "inverse_residual": verify_inverse(transform),
        "off_diagonal_residual": verify_diagonalizes(transform, coeffs),
        "cs": cs_bound(config.params),
        "l1_s": l1_operator_norm(transform.s),
        "l1_s_inv": l1_operator_norm(transform.s_inv),
    }


def integrals_table(max_k: int = 32) -> Dict:
    rows = []
    for k in [k for k in range(-max_k, max_k + 1) if k != 0]:
        i1, i2 = integral_I_quadrature(1, k), integral_I_quadrature(2, k)
        rows.append({
            "k": k,
            "i1": integral_I1(k),
            "i1_quadrature": i1,
            "i2": integral_I2(k),
            "i2_quadrature": i2,
            "max_diff": max(abs(integral_I1(k) - i1), abs(integral_I2(k) - i2)),
        })
    return {"rows": rows, "max_diff": max(row["max_diff"] for row in rows)}


def cmd_analyze(config_path: str, spectrum: bool = False, transform: bool = False, integrals: bool = False) -> int:
    config = load_config(config_path)
    everything = not (spectrum or transform or integrals)
    result = {}
    if spectrum or everything:
        result["spectrum"] = spectrum_table(config)
    if transform or everything:
        result["transform"] = transform_table(config)
    if integrals or everything:
        result["integrals"] = integrals_table()
    text = json.dumps(result, indent=2)
    console.print_json(text)
    directory = config.outputs.resolved_directory
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{config.outputs.run_name}-analyze.json"
    path.write_text(text)
    logging.info('Wrote analysis to %s', path)
    return EXIT_OK


def cmd_verify(suite: str, seed: int = DEFAULT_SEED, jobs: int = 1, n_modes: int = DEFAULT_N_MODES,
               output: Optional[str] = None) -> int:
    if jobs < 1:
        raise ConfigError("--jobs", f"must be at least 1, got {jobs}")
    if n_modes < 16:
        raise ConfigError("--n-modes", f"must be at least 16, got {n_modes}")
    runner = SuiteRunner(seed=seed, jobs=jobs, n_modes=n_modes)
    if suite not in runner.suites:
        raise ConfigError("--suite", f"unknown suite {suite!r} (expected one of {', '.join(runner.suites)})")
    report = runner.run(suite)

    table = Table(title=f"{suite} (seed {seed}, N={n_modes})")
    for column in ("criterion", "value", "limit", "result", "detail"):
        table.add_column(column)
    for criterion in report.criteria:
        verdict = "[green]pass[/green]" if criterion.passed else "[red]FAIL[/red]"
        table.add_row(criterion.name, f"{criterion.value:.3e}", f"{criterion.limit:.3e}", verdict, criterion.detail)
    console.print(table)

    if output:
        directory = Path(output)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{inflection.parameterize(suite)}-verify.json"
        path.write_text(json.dumps(report.to_dict(), indent=2))
        logging.info('Wrote report to %s', path)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        console.print(f"[red]{e}[/red]")
        return EXIT_USAGE
    setup_logging(args.verbose, args.quiet)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config)
        if args.command == "analyze":
            return cmd_analyze(args.config, args.spectrum, args.transform, args.integrals)
        return cmd_verify(args.suite, args.seed, args.jobs, args.n_modes, args.output)
    except ConfigError as e:
        logging.error('Configuration error: %s', e)
        return EXIT_USAGE
    except BubbleError as e:
        logging.error('Solver error: %s', e)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
