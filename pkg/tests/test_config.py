import pytest

from kreinhankel.config import SEED_ENV, Command, OutputFormat, RunConfig, resolve_seed
from kreinhankel.errors import ConfigError
from kreinhankel.operators import OperatorKind
from kreinhankel.report import converter
from kreinhankel.structs import GridRuleKind


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert resolve_seed(None) == 0
    assert resolve_seed(5) == 5

    monkeypatch.setenv(SEED_ENV, "42")
    assert resolve_seed(None) == 42
    assert resolve_seed(7) == 7

    monkeypatch.setenv(SEED_ENV, "forty-two")
    with pytest.raises(ConfigError):
        resolve_seed(None)


def test_defaults():
    config = RunConfig(command="ssf-demo")
    assert config.command == Command.SSF_DEMO
    assert config.trials == 100
    assert config.degree == 5
    assert config.dim == 20
    assert config.output_format == OutputFormat.JSON
    assert config.solver.tol == 1e-12


def test_csv_default():
    config = RunConfig(command="spectrum", operator="hankel-symbol", size=4)
    assert config.operator == OperatorKind.HANKEL_SYMBOL
    assert config.output_format == OutputFormat.CSV


def test_grid_rule_defaults():
    divergence = RunConfig(command="divergence", mu=0.5, lengths=[10, 20, 40])
    assert divergence.grid_rule().kind == GridRuleKind.MIDPOINT

    crosscheck = RunConfig(command="crosscheck", mu=0.5, lengths=[40], size=400)
    assert crosscheck.grid_rule().kind == GridRuleKind.GAUSS_LEGENDRE
    assert crosscheck.length == 40.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(command="frobnicate"),
        dict(command="spectrum", size=4),
        dict(command="spectrum", operator="hilbert", size=4),
        dict(command="spectrum", operator="kmu", mu=0.5, size=4),
        dict(command="spectrum", operator="kmu", mu=0.5, lengths=[10.0], size=12),
        dict(command="spectrum", operator="kmu", mu=1.5, lengths=[10.0], size=16),
        dict(command="spectrum", operator="nonsense", size=4),
        dict(command="spectrum", operator="hilbert", p=0.3, size=4),
        dict(command="fill-scan", operator="hilbert-alt", p=1.0, sizes=[4, 8]),
        dict(command="parity-check"),
        dict(command="parity-check", size=4, format="csv"),
        dict(command="ssf-demo", trials=0),
        dict(command="ssf-demo", degree=9),
        dict(command="ssf-demo", dim=1),
        dict(command="ssf-demo", seed=-1),
        dict(command="ssf-demo", jobs=0),
        dict(command="divergence", mu=0.5, lengths=[10, 20]),
        dict(command="divergence", mu=0.5, lengths=[10, 30, 20]),
        dict(command="divergence", mu=0.0, lengths=[10, 20, 30]),
        dict(command="divergence", mu=0.5, lengths=[-1, 20, 30]),
        dict(command="crosscheck", mu=0.5, lengths=[40, 80], size=400),
        dict(command="crosscheck", mu=0.5, lengths=[40], size=401),
        dict(command="fill-scan", operator="hankel-symbol"),
        dict(command="ac-probe", operator="hankel-symbol", sizes=[8, 16]),
        dict(command="ac-probe", operator="hankel-symbol", sizes=[8, 16, 12]),
        dict(command="ac-probe", operator="hankel-symbol", sizes=[8, 16, 32], probe=8),
        dict(command="spectrum", operator="a0", lengths=[10.0], size=16, tol=0.0),
    ],
)
def test_invalid(kwargs):
    with pytest.raises(ConfigError):
        RunConfig(**kwargs)


def test_build_operator():
    config = RunConfig(command="spectrum", operator="hilbert", p=0.0, size=2, mu=0.3)
    op = config.build_operator()
    assert op.kind == OperatorKind.HILBERT
    assert op.mu is None
    assert op.label == "hilbert(p=0)"


def test_unstructure():
    config = RunConfig(command="fill-scan", operator="hankel-symbol", sizes=[8, 16])
    data = converter.unstructure(config)
    assert data["command"] == "fill-scan"
    assert data["operator"] == "hankel-symbol"
    assert list(data["sizes"]) == [8, 16]
    assert data["format"] is None
