"""
Run configuration for the command line. Everything is validated up front, so a bad flag
combination never reaches the numerics.
"""
from __future__ import annotations

import enum
import logging
import os
from typing import Optional, Tuple

import attr

from kreinhankel.eigensolve import DEFAULT_MAX_SWEEPS, DEFAULT_TOL, SolverSettings
from kreinhankel.errors import ConfigError, KreinHankelException
from kreinhankel.operators import Operator, OperatorKind
from kreinhankel.quadrature import DEFAULT_ORDER
from kreinhankel.ssf import MAX_PHI_DEGREE
from kreinhankel.structs import GridRule, GridRuleKind

logger = logging.getLogger(__name__)

__all__ = ("SEED_ENV", "CLI_SHIFTS", "Command", "OutputFormat", "RunConfig", "resolve_seed")

#: The environment variable consulted when no seed is given on the command line.
SEED_ENV = "KHL_SEED"

#: The Hilbert shifts the command line accepts.
CLI_SHIFTS = (0.0, 0.5, -0.5)


class Command(str, enum.Enum):
    """
    Enumeration of the subcommands.
    """

    SPECTRUM = "spectrum"
    PARITY_CHECK = "parity-check"
    SSF_DEMO = "ssf-demo"
    DIVERGENCE = "divergence"
    CROSSCHECK = "crosscheck"
    FILL_SCAN = "fill-scan"
    AC_PROBE = "ac-probe"

    @property
    def writes_csv(self) -> bool:
        return self in (
            Command.SPECTRUM,
            Command.DIVERGENCE,
            Command.FILL_SCAN,
            Command.AC_PROBE,
        )


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


def resolve_seed(flag: Optional[int]) -> int:
    """
    :return: The seed flag if given, else ``$KHL_SEED``, else 0.
    """
    if flag is not None:
        return flag

    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0

    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _enum_converter(kind):
    def convert(value):
        if value is None or isinstance(value, kind):
            return value

        try:
            return kind(value)
        except ValueError:
            choices = ", ".join(v.value for v in kind)
            raise ConfigError(f"invalid choice {value!r} (choose from {choices})") from None

    return convert


def _at_least(bound):
    def check(instance, attribute, value):
        if value is not None and value < bound:
            raise ConfigError(f"--{attribute.name.replace('_', '-')} must be at least {bound}, got {value}")

    return check


def _positive(instance, attribute, value):
    if value is not None and not value > 0:
        raise ConfigError(f"--{attribute.name.replace('_', '-')} must be positive, got {value}")


@attr.s(frozen=True, slots=True, kw_only=True)
class RunConfig(object):
    """
    A validated command line run. Field names follow the flags.
    """

    #: The subcommand.
    command: Command = attr.ib(converter=_enum_converter(Command))

    #: The operator family, for ``spectrum``, ``fill-scan`` and ``ac-probe``.
    operator: Optional[OperatorKind] = attr.ib(default=None, converter=_enum_converter(OperatorKind))

    #: The Hilbert shift.
    p: Optional[float] = attr.ib(default=None)

    #: The spectral threshold.
    mu: Optional[float] = attr.ib(default=None)

    #: Truncation lengths. ``divergence`` scans all of them; other commands take exactly one.
    lengths: Tuple[float, ...] = attr.ib(default=(), converter=tuple)

    #: The section or grid size.
    size: Optional[int] = attr.ib(default=None, validator=_at_least(1))

    #: The grid rule; ``None`` picks midpoint for ``divergence`` and Gauss-Legendre elsewhere.
    rule: Optional[GridRuleKind] = attr.ib(default=None, converter=_enum_converter(GridRuleKind))

    #: Section sizes, for the size scans.
    sizes: Tuple[int, ...] = attr.ib(default=(), converter=tuple)

    #: The seed for random trials.
    seed: int = attr.ib(default=0, validator=_at_least(0))

    #: The number of random trials.
    trials: int = attr.ib(default=100, validator=_at_least(1))

    #: The degree of the random polynomial in each trial.
    degree: int = attr.ib(default=5)

    #: The dimension of the random trial matrices.
    dim: int = attr.ib(default=20, validator=_at_least(2))

    #: The probe basis index.
    probe: int = attr.ib(default=0, validator=_at_least(0))

    #: The Frobenius scan density.
    nodes_per_unit: Optional[float] = attr.ib(default=None, validator=_positive)

    #: The eigensolver tolerance.
    tol: float = attr.ib(default=DEFAULT_TOL, validator=_positive)

    #: The eigensolver sweep cap.
    max_sweeps: int = attr.ib(default=DEFAULT_MAX_SWEEPS, validator=_at_least(1))

    #: The spectral projection guard; ``None`` uses the default.
    guard: Optional[float] = attr.ib(default=None, validator=_positive)

    #: The maximum number of worker threads.
    jobs: int = attr.ib(default=1, validator=_at_least(1))

    #: The output format; ``None`` picks CSV where the command supports it.
    format: Optional[OutputFormat] = attr.ib(default=None, converter=_enum_converter(OutputFormat))

    #: Where to write the report; ``None`` is stdout.
    out: Optional[str] = attr.ib(default=None)

    #: If wall clock timing is recorded in JSON reports.
    timing: bool = attr.ib(default=False)

    def __attrs_post_init__(self):
        if self.format == OutputFormat.CSV and not self.command.writes_csv:
            raise ConfigError(f"{self.command.value} only writes json")

        if not 0 <= self.degree <= MAX_PHI_DEGREE:
            raise ConfigError(f"--degree must lie in [0, {MAX_PHI_DEGREE}], got {self.degree}")

        if any(x <= 0 for x in self.lengths):
            raise ConfigError(f"--L values must be positive, got {list(self.lengths)}")

        if any(n < 1 for n in self.sizes):
            raise ConfigError(f"--sizes must all be at least 1, got {list(self.sizes)}")

        check = getattr(self, f"_check_{self.command.name.lower()}")
        check()

    def _require(self, *names: str):
        for name in names:
            value = getattr(self, name)
            if value is None or value == ():
                flag = {"lengths": "L", "size": "N"}.get(name, name.replace("_", "-"))
                raise ConfigError(f"{self.command.value} needs --{flag}")

    def _require_single_length(self):
        if len(self.lengths) != 1:
            raise ConfigError(f"{self.command.value} takes a single --L, got {list(self.lengths)}")

    def _check_mu(self):
        if not 0.0 < self.mu < 1.0:
            raise ConfigError(f"--mu must lie in (0, 1), got {self.mu}")

    def _check_spectrum(self):
        self._require("operator", "size")
        self.build_operator()
        self._check_grid_size(self.size)

    def _check_parity_check(self):
        self._require("size")

    def _check_ssf_demo(self):
        pass

    def _check_divergence(self):
        self._require("mu", "lengths")
        self._check_mu()
        if len(self.lengths) < 3:
            raise ConfigError(f"divergence needs at least 3 --L values, got {len(self.lengths)}")

        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ConfigError(f"--L values must be strictly increasing, got {list(self.lengths)}")

    def _check_crosscheck(self):
        self._require("mu", "lengths", "size")
        self._check_mu()
        self._require_single_length()
        self._check_grid_size(self.size)

    def _check_fill_scan(self):
        self._require("operator", "sizes")
        self.build_operator()
        for n in self.sizes:
            self._check_grid_size(n)

    def _check_ac_probe(self):
        self._check_fill_scan()
        if len(self.sizes) < 3:
            raise ConfigError(f"ac-probe needs at least 3 --sizes, got {len(self.sizes)}")

        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ConfigError(f"--sizes must be strictly increasing, got {list(self.sizes)}")

        if self.probe >= self.sizes[0]:
            raise ConfigError(f"--probe {self.probe} is outside the smallest section {self.sizes[0]}")

    def _check_grid_size(self, size: int):
        needs_grid = self.command == Command.CROSSCHECK or (
            self.operator is not None and self.operator.needs_grid
        )
        if not needs_grid:
            return

        if size < 2:
            raise ConfigError(f"a grid needs at least 2 nodes, got {size}")

        rule = self.grid_rule()
        if rule.kind == GridRuleKind.GAUSS_LEGENDRE and size % rule.order:
            raise ConfigError(f"--N {size} is not a multiple of the Gauss-Legendre order {rule.order}")

    @property
    def length(self) -> Optional[float]:
        return self.lengths[0] if self.lengths else None

    @property
    def output_format(self) -> OutputFormat:
        if self.format is not None:
            return self.format

        return OutputFormat.CSV if self.command.writes_csv else OutputFormat.JSON

    @property
    def solver(self) -> SolverSettings:
        return SolverSettings(tol=self.tol, max_sweeps=self.max_sweeps)

    def grid_rule(self) -> GridRule:
        kind = self.rule
        if kind is None:
            kind = GridRuleKind.MIDPOINT if self.command == Command.DIVERGENCE else GridRuleKind.GAUSS_LEGENDRE

        if kind == GridRuleKind.MIDPOINT:
            return GridRule.midpoint()

        return GridRule.gauss_legendre(order=DEFAULT_ORDER)

    def build_operator(self) -> Operator:
        """
        :return: The selected operator.
        :raises ConfigError: If its parameters are missing or out of range.
        """
        if self.operator is None:
            raise ConfigError(f"{self.command.value} needs --operator")

        if self.operator.needs_grid:
            self._require_single_length()

        if self.operator.needs_shift and self.p is not None and self.p not in CLI_SHIFTS:
            shifts = ", ".join(f"{p:g}" for p in CLI_SHIFTS)
            raise ConfigError(f"--p must be one of {shifts}, got {self.p:g}")

        try:
            return Operator(
                kind=self.operator,
                p=self.p if self.operator.needs_shift else None,
                mu=self.mu if self.operator.needs_mu else None,
                length=self.length if self.operator.needs_grid else None,
                rule=self.grid_rule(),
                solver=self.solver,
                guard=self.guard,
            )
        except KreinHankelException as e:
            raise ConfigError(e.message) from e


# the config is echoed into reports through cattrs, which needs the real field types
attr.resolve_types(RunConfig)
