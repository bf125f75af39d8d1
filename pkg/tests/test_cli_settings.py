import numpy as np
import pytest

from src.cli.settings import ExperimentConfig, load_experiment, parse_budgets, parse_overrides
from src.rates import RateParams, c_star


def test_parse_overrides_accepts_both_flag_forms():
    overrides = parse_overrides(["--rho", "0.9", "--k=5", "--grad-norm0", "0.2"])

    assert overrides == {"rho": "0.9", "k": "5", "grad_norm0": "0.2"}


@pytest.mark.parametrize(
    "tokens, message",
    [
        (["--bogus", "1"], "--bogus: unknown key"),
        (["--rho"], "--rho: missing value"),
        (["rho", "0.9"], "unexpected argument 'rho'"),
    ],
)
def test_parse_overrides_errors(tokens, message):
    with pytest.raises(ValueError, match=message):
        parse_overrides(tokens)


def test_load_experiment_defaults():
    config = load_experiment()

    assert config == ExperimentConfig()
    assert config.rho == (0.9,)
    assert config.k == (5,)
    assert config.family == "cubic_perturbed_quadratic"


def test_load_experiment_reads_file_and_overrides(tmp_path):
    path = tmp_path / "fig3.conf"
    path.write_text(
        "# slow-contraction setup\n"
        "rho = 0.999\n"
        "k = 3, 5\n"
        "C = 1e2, 1e3\n"
        "\n"
        "eta = 1e-2   # Hessian Lipschitz constant\n"
        "unconstrained = yes\n",
        encoding="utf-8",
    )

    config = load_experiment(path, {"eta": "0.5", "seed": "3"})

    assert config.rho == (0.999,)
    assert config.k == (3, 5)
    assert config.C == "1e2, 1e3"
    assert config.eta == 0.5
    assert config.seed == 3
    assert config.unconstrained is True


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("rho = 1.5", "invalid value for rho"),
        ("k = zero", "invalid value for k"),
        ("colour = red", "unknown key 'colour'"),
        ("rho 0.9", "expected 'key = value'"),
        ("family = rosenbrock", "invalid value for family"),
        ("alpha = nan", "invalid value for alpha"),
        ("unconstrained = maybe", "invalid value for unconstrained"),
    ],
)
def test_load_experiment_reports_file_line(tmp_path, line, fragment):
    path = tmp_path / "bad.conf"
    path.write_text(f"# header\nk = 3\n{line}\n", encoding="utf-8")

    with pytest.raises(ValueError) as excinfo:
        load_experiment(path)

    message = str(excinfo.value)
    assert message.startswith(f"{path}:3:")
    assert fragment in message


def test_load_experiment_reports_flag_origin():
    with pytest.raises(ValueError, match=r"^--N: invalid value for N"):
        load_experiment(None, {"N": "0"})


def test_load_experiment_rejects_unknown_override():
    with pytest.raises(ValueError, match="--bogus: unknown key"):
        load_experiment(None, {"bogus": "1"})


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rho": ()},
        {"rho": (0.9, 1.0)},
        {"k": (0,)},
        {"M": 0},
        {"family": "rosenbrock"},
        {"seed": -1},
        {"n": 0},
        {"tol": 0.0},
        {"L": -1.0},
        {"eta": -1e-3},
        {"grad_norm0": -0.1},
    ],
)
def test_experiment_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_single_pair_and_knot_count():
    config = ExperimentConfig(rho=(0.99,), k=(4,), M=2)

    assert config.single() == RateParams(0.99, 4)
    assert config.knot_count(4) == 2
    assert ExperimentConfig().knot_count(5) == 5
    with pytest.raises(ValueError):
        ExperimentConfig(k=(3, 5)).single()


def test_operator_params():
    params = ExperimentConfig(n=20, mu=0.1, L=2.0, eta=0.3).operator_params()

    assert params == {"n": 20, "mu": 0.1, "L": 2.0, "eta": 0.3, "lam": 0.1}
    assert ExperimentConfig(gamma=0.4).operator_params()["gamma"] == 0.4


def test_parse_budgets_list_and_cstar():
    params = RateParams(0.9, 3)

    assert parse_budgets("1, 2.5", params) == [1.0, 2.5]
    assert parse_budgets("cstar", params) == [c_star(params)]
    assert parse_budgets("CSTAR*2", params) == [pytest.approx(2 * c_star(params))]


def test_parse_budgets_sweeps():
    params = RateParams(0.9, 3)

    log_sweep = parse_budgets("1:cstar*1.05:5:log", params)
    assert len(log_sweep) == 5
    assert log_sweep[0] == pytest.approx(1.0)
    assert log_sweep[-1] == pytest.approx(1.05 * c_star(params))
    assert np.allclose(np.diff(np.log(log_sweep)), np.log(1.05 * c_star(params)) / 4)
    assert parse_budgets("1:3:3:lin", params) == [1.0, 2.0, 3.0]


@pytest.mark.parametrize("spec", ["1:2:3", "1:2:0:log", "1:2:3:cubic", "0:2:3:log", "1:two:3:lin"])
def test_parse_budgets_errors(spec):
    with pytest.raises(ValueError):
        parse_budgets(spec, RateParams(0.9, 3))
