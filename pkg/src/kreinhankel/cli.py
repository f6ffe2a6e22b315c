"""
The ``khl`` command line.

Reports go to stdout (or ``--out``), logs go to stderr. Exit status is 0 on success, 2 on a
configuration error and 3 on a numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

import coloredlogs

from kreinhankel.config import SEED_ENV, Command, OutputFormat, RunConfig, resolve_seed
from kreinhankel.eigensolve import DEFAULT_MAX_SWEEPS, DEFAULT_TOL
from kreinhankel.errors import ConfigError, KreinHankelException
from kreinhankel.hankel import parity_check
from kreinhankel.operators import OperatorKind
from kreinhankel.quadrature import make_grid
from kreinhankel.report import ReportEnvelope, converter, dump_envelope, write_csv
from kreinhankel.spectra import ac_decay_probe, fill_metrics, fill_scan
from kreinhankel.ssf import crosscheck_kernel, hs_divergence_scan, trace_trials
from kreinhankel.structs import GridRuleKind, SpectrumReport
from kreinhankel.utils import stringify_object

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"

#: A command result: the payload, and the CSV header and rows if the command writes CSV.
Result = Tuple[Any, Optional[Sequence[str]], Optional[List[Sequence[Any]]]]


def _version() -> str:
    try:
        from importlib.metadata import PackageNotFoundError, version
    except ImportError:  # pragma: no cover
        return "0.0.0"

    try:
        return version("kreinhankel")
    except PackageNotFoundError:
        return "0.0.0"


def _float_list(raw: str) -> List[float]:
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {raw!r}") from None


def _int_list(raw: str) -> List[int]:
    try:
        return [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {raw!r}") from None


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--operator", choices=[k.value for k in OperatorKind], help="Operator family.")
    common.add_argument("--p", type=float, help="Hilbert shift p.")
    common.add_argument("--mu", type=float, help="Spectral threshold mu, in (0, 1).")
    common.add_argument(
        "--L", dest="lengths", type=_float_list, default=[], help="Truncation length(s), comma separated."
    )
    common.add_argument("--N", dest="size", type=int, help="Section or grid size.")
    common.add_argument("--rule", choices=[k.value for k in GridRuleKind], help="Quadrature rule.")
    common.add_argument("--sizes", type=_int_list, default=[], help="Section sizes, comma separated.")
    common.add_argument("--seed", type=int, help=f"Random seed. Falls back to ${SEED_ENV}, then 0.")
    common.add_argument("--trials", type=int, default=100, help="Number of random trials.")
    common.add_argument("--degree", type=int, default=5, help="Degree of the random test polynomial.")
    common.add_argument("--dim", type=int, default=20, help="Dimension of random trial matrices.")
    common.add_argument("--probe", type=int, default=0, help="Probe basis index for ac-probe.")
    common.add_argument("--nodes-per-unit", type=float, help="Grid density for divergence scans.")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="Eigensolver tolerance.")
    common.add_argument("--max-sweeps", type=int, default=DEFAULT_MAX_SWEEPS, help="Eigensolver sweep cap.")
    common.add_argument("--guard", type=float, help="Minimum threshold distance from the spectrum.")
    common.add_argument("--jobs", type=int, default=1, help="Worker threads; 1 runs serially.")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], help="Output format.")
    common.add_argument("--out", help="Output file. Defaults to stdout.")
    common.add_argument("--timing", action="store_true", help="Record wall clock timing in JSON.")

    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings only.")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="khl", description="Finite-section spectral lab for Krein's rank one example."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    common = _common_flags()
    helps = {
        Command.SPECTRUM: "Diagonalize one operator section.",
        Command.PARITY_CHECK: "Split the Hankel section into its parity blocks.",
        Command.SSF_DEMO: "Check the trace formula on seeded rank one trials.",
        Command.DIVERGENCE: "Scan the Frobenius norm of K_mu against the truncation length.",
        Command.CROSSCHECK: "Compare E1 - E0 against the kernel k_mu(x + y).",
        Command.FILL_SCAN: "Track how section spectra fill the operator's window.",
        Command.AC_PROBE: "Track spectral measure atoms of a probe vector.",
    }
    for command, text in helps.items():
        subparsers.add_parser(command.value, parents=[common], help=text, description=text)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    :raises ConfigError: If the flags do not describe a valid run.
    """
    return RunConfig(
        command=args.command,
        operator=args.operator,
        p=args.p,
        mu=args.mu,
        lengths=args.lengths,
        size=args.size,
        rule=args.rule,
        sizes=args.sizes,
        seed=resolve_seed(args.seed),
        trials=args.trials,
        degree=args.degree,
        dim=args.dim,
        probe=args.probe,
        nodes_per_unit=args.nodes_per_unit,
        tol=args.tol,
        max_sweeps=args.max_sweeps,
        guard=args.guard,
        jobs=args.jobs,
        format=args.format,
        out=args.out,
        timing=args.timing,
    )


def cmd_spectrum(config: RunConfig) -> Result:
    operator = config.build_operator()
    dec = config.solver.decompose(operator.build(config.size))
    fill = fill_metrics(dec, *operator.window())
    report = SpectrumReport(
        operator=operator.label,
        size=dec.n,
        eigenvalues=dec.eigenvalues,
        fill=fill,
        residual=dec.residual,
        orth_defect=dec.orth_defect,
    )
    rows = [(i, value) for i, value in enumerate(report.eigenvalues)]
    return report, ("index", "eigenvalue"), rows


def cmd_parity_check(config: RunConfig) -> Result:
    return parity_check(config.size, config.solver), None, None


def cmd_ssf_demo(config: RunConfig) -> Result:
    suite = trace_trials(
        config.dim, config.trials, config.seed, config.degree, solver=config.solver, jobs=config.jobs
    )
    logger.info(f"{len(suite.reports)} trace formula trials, max abs_diff {suite.max_abs_diff:.3e}")
    return suite, None, None


def cmd_divergence(config: RunConfig) -> Result:
    scan = hs_divergence_scan(
        config.mu,
        config.lengths,
        config.nodes_per_unit,
        rule=config.grid_rule(),
        jobs=config.jobs,
    )
    logger.info(f"Divergence slope {scan.slope:.6f}, expected {scan.expected_slope:.6f}")
    rows = [(x, math.log(x), value) for x, value in zip(scan.lengths, scan.frob_sq)]
    return scan, ("L", "ln_L", "frob_sq"), rows


def cmd_crosscheck(config: RunConfig) -> Result:
    grid = make_grid(config.length, config.size, config.grid_rule())
    report = crosscheck_kernel(config.mu, grid, guard=config.guard, solver=config.solver)
    logger.info(f"Crosscheck max discrepancy {report.max_discrepancy:.3e}")
    return report, None, None


def cmd_fill_scan(config: RunConfig) -> Result:
    operator = config.build_operator()
    a, b = operator.window()
    scan = fill_scan(operator, config.sizes, a, b, solver=config.solver, jobs=config.jobs)
    rows = [
        (n, r.min_eig, r.max_eig, r.max_gap, r.count_outside)
        for n, r in zip(config.sizes, scan.reports)
    ]
    return scan, ("N", "min_eig", "max_eig", "max_gap", "count_outside"), rows


def cmd_ac_probe(config: RunConfig) -> Result:
    operator = config.build_operator()
    report = ac_decay_probe(
        operator, config.sizes, config.probe, solver=config.solver, jobs=config.jobs
    )
    ratios = (None,) + report.decay_ratios
    rows = list(zip(report.sizes, report.max_atom, ratios))
    return report, ("N", "max_atom", "decay_ratio"), rows


COMMANDS = {
    Command.SPECTRUM: cmd_spectrum,
    Command.PARITY_CHECK: cmd_parity_check,
    Command.SSF_DEMO: cmd_ssf_demo,
    Command.DIVERGENCE: cmd_divergence,
    Command.CROSSCHECK: cmd_crosscheck,
    Command.FILL_SCAN: cmd_fill_scan,
    Command.AC_PROBE: cmd_ac_probe,
}


def run(config: RunConfig) -> str:
    """
    Runs one configured command.

    :return: The rendered report.
    """
    logger.debug(f"Running {config.command.value}:\n{stringify_object(config)}")

    started = time.perf_counter()
    payload, header, rows = COMMANDS[config.command](config)
    elapsed = time.perf_counter() - started

    if config.output_format == OutputFormat.CSV:
        return write_csv(header, rows)

    envelope = ReportEnvelope(
        version=_version(),
        command=config.command.value,
        config=converter.unstructure(config),
        payload=payload,
        timing={"seconds": elapsed} if config.timing else None,
    )
    return dump_envelope(envelope)


def _install_logging(args: argparse.Namespace):
    level = "INFO"
    if args.verbose:
        level = "DEBUG"
    elif args.quiet:
        level = "WARNING"

    coloredlogs.install(level=level, fmt=LOG_FORMAT, stream=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _install_logging(args)

    try:
        config = config_from_args(args)
        text = run(config)
    except ConfigError as e:
        print(f"khl: error: {e.message}", file=sys.stderr)
        return EXIT_CONFIG
    except KreinHankelException as e:
        print(f"khl: error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    if config.out is None:
        sys.stdout.write(text)
    else:
        Path(config.out).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {config.out}")

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
