import pytest

from muskat.bubble.config import (
    OUTPUT_DIR_ENV,
    InitialCondition,
    OutputConfig,
    dataclass_from_mapping,
    load_config,
    parse_config,
)
from muskat.bubble.errors import ConfigError
from muskat.bubble.evolution import SolverConfig
from muskat.bubble.geometry import constraint_residual

VALID_YAML = """
params: {a_mu: 0.3, a_sigma: 1.0, a_rho: 1.0, radius: 1.0}
initial:
  modes: [[2, 0.03, 0.0], [-3, 0.0, 0.01]]
  mean_angle: 0.1
  base_point: [0.0, 1.0]
solver: {n_modes: 16, t_end: 0.1, record_every: 5}
outputs: {directory: results, formats: [csv], name: Rising Bubble}
"""


@pytest.fixture
def minimal():
    """Smallest valid configuration."""
    return {"params": {"a_mu": 0.0, "a_sigma": 1.0, "a_rho": 1.0, "radius": 1.0}}


class TestParseConfig:
    """Test suite for parse_config."""

    def test_defaults(self, minimal):
        config = parse_config(minimal)
        assert config.solver == SolverConfig()
        assert config.initial.modes == []
        assert config.outputs.formats == ["csv", "json"]
        assert config.params.a_rho == 1.0

    def test_fluid_section(self):
        config = parse_config({"fluid": {"mu1": 1.0, "mu2": 3.0, "rho1": 2.0, "rho2": 1.0,
                                         "sigma": 2.0, "kappa": 0.5, "g": 9.0, "radius": 1.0}})
        assert config.params.a_mu == pytest.approx(0.5)

    @pytest.mark.parametrize("data", [
        {},
        {"params": {"a_mu": 0.0, "a_sigma": 1.0, "a_rho": 1.0, "radius": 1.0},
         "fluid": {"mu1": 1.0, "mu2": 1.0, "rho1": 1.0, "rho2": 1.0, "sigma": 1.0, "kappa": 1.0, "g": 1.0, "radius": 1.0}},
    ])
    def test_params_and_fluid_exclusive(self, data):
        with pytest.raises(ConfigError) as error:
            parse_config(data)
        assert error.value.field == "params"

    @pytest.mark.parametrize("section, values, field", [
        ("solver", {"n_modes": "many"}, "solver.n_modes"),
        ("solver", {"dt": -1.0}, "solver.dt"),
        ("solver", {"stepper": "rk4"}, "solver.stepper"),
        ("initial", {"solve_first_modes": "yes"}, "initial.solve_first_modes"),
        ("initial", {"modes": [[2, "a", 0.0]]}, "initial.modes[0][1]"),
        ("outputs", {"formats": ["csv", "hdf5"]}, "outputs.formats"),
        ("outputs", {"name": "%%%"}, "outputs.name"),
    ])
    def test_bad_field_is_named(self, minimal, section, values, field):
        with pytest.raises(ConfigError) as error:
            parse_config(minimal | {section: values})
        assert error.value.field == field

    def test_missing_required_key(self):
        with pytest.raises(ConfigError) as error:
            parse_config({"params": {"a_mu": 0.0, "a_sigma": 1.0, "a_rho": 1.0}})
        assert error.value.field == "params.radius"

    def test_physical_validation(self):
        with pytest.raises(ConfigError) as error:
            parse_config({"params": {"a_mu": 3.0, "a_sigma": 1.0, "a_rho": 1.0, "radius": 1.0}})
        assert error.value.field == "params"
        assert "a_mu" in str(error.value)

    def test_unknown_section(self, minimal):
        with pytest.raises(ConfigError) as error:
            parse_config(minimal | {"plots": {}})
        assert error.value.field == "plots"

    def test_mode_beyond_band(self, minimal):
        with pytest.raises(ConfigError) as error:
            parse_config(minimal | {"initial": {"modes": [[20, 0.1, 0.0]]}, "solver": {"n_modes": 16}})
        assert error.value.field == "initial.modes"

    def test_not_a_mapping(self):
        with pytest.raises(ConfigError):
            parse_config([1, 2, 3])


class TestInitialCondition:
    """Test suite for InitialCondition."""

    def test_mode_map_keeps_signed_keys(self):
        modes = InitialCondition(modes=[[2, 0.05, 0.0], [-3, 0.0, 0.01]]).mode_map()
        assert modes == {2: 0.05, -3: 0.01j}

    def test_fractional_frequency(self):
        with pytest.raises(ConfigError):
            InitialCondition(modes=[[2.5, 0.1, 0.0]]).mode_map()

    def test_wrong_row_length(self):
        with pytest.raises(ConfigError):
            InitialCondition(modes=[[2, 0.1]]).mode_map()


class TestOutputConfig:
    """Test suite for OutputConfig."""

    def test_run_name(self):
        assert OutputConfig(name="Rising Bubble, A_mu=0.3").run_name == "rising-bubble-a_mu-0-3"

    def test_directory_override(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
        assert OutputConfig(directory="results").resolved_directory == tmp_path

    def test_directory_default(self, monkeypatch):
        monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
        assert str(OutputConfig(directory="results").resolved_directory) == "results"


class TestLoadConfig:
    """Test suite for load_config."""

    def test_valid_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(VALID_YAML)
        config = load_config(path)
        assert config.outputs.run_name == "rising-bubble"
        state = config.initial_state()
        assert state.theta.coeff(2) == 0.03
        assert state.theta.coeff(3) == pytest.approx(-0.01j)
        assert state.base_point == 1j
        assert state.mean_angle == 0.1
        assert abs(constraint_residual(state)) < 1e-12

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("params: {a_mu: [0.3\n")
        with pytest.raises(ConfigError) as error:
            load_config(path)
        assert "invalid YAML" in str(error.value)

    def test_dataclass_from_mapping_requires_dataclass(self):
        with pytest.raises(ValueError):
            dataclass_from_mapping(dict, {}, "x")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
