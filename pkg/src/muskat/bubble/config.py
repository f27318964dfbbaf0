"""YAML run configuration mapped onto dataclasses.

A configuration file has the sections ``params`` (dimensionless groups) or ``fluid`` (raw
fluid constants, converted with derive_params), ``initial``, ``solver`` and ``outputs``::

    params: {a_mu: 0.3, a_sigma: 1.0, a_rho: 1.0, radius: 1.0}
    initial:
      modes: [[2, 0.05, 0.0]]      # k, Re θ̂(k), Im θ̂(k)
      mean_angle: 0.0              # radians
      base_point: [0.0, 0.0]       # z(0), length units
      solve_first_modes: true
    solver: {n_modes: 64, t_end: 2.0, record_every: 10}
    outputs: {directory: results, formats: [csv, json], curve_snapshots: false, name: Rising Bubble}
"""
import os
from dataclasses import MISSING, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union, get_args, get_origin, get_type_hints

import inflection
import yaml

from .errors import ConfigError
from .evolution import SolverConfig
from .geometry import BubbleState, FluidConstants, PhysicalParams, initial_state

OUTPUT_DIR_ENV = "MUSKAT_OUTPUT_DIR"
OUTPUT_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class InitialCondition:
    """Initial angle modes and placement of the bubble.

    Attributes:
        modes: Rows [k, re, im] giving θ̂(k); negative k is folded onto −k by conjugation.
        mean_angle: ϑ̂(0) in radians.
        base_point: [x, y] of z(0) in length units.
        solve_first_modes: Replace θ̂(±1) by the values that close the curve.
    """
    modes: List[List[float]] = field(default_factory=list)
    mean_angle: float = 0.0
    base_point: List[float] = field(default_factory=lambda: [0.0, 0.0])
    solve_first_modes: bool = True

    def mode_map(self) -> Dict[int, complex]:
        result = {}
        for index, row in enumerate(self.modes):
            if len(row) != 3:
                raise ConfigError(f"initial.modes[{index}]", f"expected [k, re, im], got {row}")
            k, re, im = row
            if int(k) != k:
                raise ConfigError(f"initial.modes[{index}]", f"frequency must be an integer, got {k}")
            result[int(k)] = complex(float(re), float(im))
        return result


@dataclass(frozen=True)
class OutputConfig:
    """Where and what a simulation writes.

    Attributes:
        directory: Output directory; MUSKAT_OUTPUT_DIR overrides it.
        formats: Trajectory formats, any of csv and json.
        curve_snapshots: Also write the interface points at every record time.
        name: Run name; normalised to a file-name slug that prefixes every file.
    """
    directory: str = "results"
    formats: List[str] = field(default_factory=lambda: list(OUTPUT_FORMATS))
    curve_snapshots: bool = False
    name: str = "run"

    def __post_init__(self):
        unknown = [entry for entry in self.formats if entry not in OUTPUT_FORMATS]
        if unknown:
            raise ConfigError("outputs.formats", f"unknown format(s) {', '.join(unknown)}")
        if not inflection.parameterize(self.name):
            raise ConfigError("outputs.name", f"{self.name!r} leaves no usable file name")

    @property
    def run_name(self) -> str:
        return inflection.parameterize(self.name)

    @property
    def resolved_directory(self) -> Path:
        return Path(os.getenv(OUTPUT_DIR_ENV) or self.directory)


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    initial: InitialCondition
    solver: SolverConfig
    outputs: OutputConfig

    def __post_init__(self):
        for k in self.initial.mode_map():
            if abs(k) > self.solver.n_modes:
                raise ConfigError("initial.modes", f"mode {k} exceeds solver.n_modes={self.solver.n_modes}")

    def initial_state(self) -> BubbleState:
        x, y = self.initial.base_point
        return initial_state(
            self.initial.mode_map(),
            self.params,
            self.solver.n_modes,
            mean_angle=self.initial.mean_angle,
            base_point=complex(x, y),
            solve_first_modes=self.initial.solve_first_modes,
        )


def _unwrap_optional(field_type: Any) -> Any:
    if get_origin(field_type) is Union:
        args = [arg for arg in get_args(field_type) if arg is not type(None)]
        if len(args) == 1:
            return args[0]
    return field_type


def _coerce(value: Any, field_type: Any, path: str) -> Any:
    if value is None:
        if get_origin(field_type) is Union and type(None) in get_args(field_type):
            return None
        raise ConfigError(path, "must not be null")
    field_type = _unwrap_optional(field_type)
    if field_type is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true or false, got {value!r}")
        return value
    if field_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if field_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if field_type is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    if get_origin(field_type) in (list, List):
        if not isinstance(value, list):
            raise ConfigError(path, f"expected a list, got {value!r}")
        (item_type,) = get_args(field_type) or (Any,)
        return [_coerce(item, item_type, f"{path}[{index}]") for index, item in enumerate(value)]
    return value


def dataclass_from_mapping(cls: type, data: Any, path: str) -> Any:
    """Build dataclass ``cls`` from a mapping, naming the offending field on any mismatch.

    Raises:
        ConfigError: On unknown keys, missing required keys, wrong value types or values the
            dataclass itself rejects.
    """
    if not is_dataclass(cls):
        raise ValueError(f"{cls} is not a dataclass")
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError(path, f"expected a mapping, got {type(data).__name__}")
    hints = get_type_hints(cls)
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}", f"unknown key (expected one of {', '.join(known)})")
    kwargs = {}
    for name, entry in known.items():
        if name not in data:
            if entry.default is MISSING and entry.default_factory is MISSING:
                raise ConfigError(f"{path}.{name}", "missing required key")
            continue
        kwargs[name] = _coerce(data[name], hints[name], f"{path}.{name}")
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(path, str(e)) from e


def parse_config(data: Any) -> RunConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("<root>", "configuration must be a mapping of sections")
    unknown = sorted(set(data) - {"params", "fluid", "initial", "solver", "outputs"})
    if unknown:
        raise ConfigError(unknown[0], "unknown section")
    if ("params" in data) == ("fluid" in data):
        raise ConfigError("params", "give exactly one of the sections params and fluid")
    if "params" in data:
        params = dataclass_from_mapping(PhysicalParams, data["params"], "params")
    else:
        fluid = dataclass_from_mapping(FluidConstants, data["fluid"], "fluid")
        try:
            params = fluid.to_params()
        except ValueError as e:
            raise ConfigError("fluid", str(e)) from e
    return RunConfig(
        params=params,
        initial=dataclass_from_mapping(InitialCondition, data.get("initial"), "initial"),
        solver=dataclass_from_mapping(SolverConfig, data.get("solver"), "solver"),
        outputs=dataclass_from_mapping(OutputConfig, data.get("outputs"), "outputs"),
    )


def load_config(path) -> RunConfig:
    """Read and validate a YAML run configuration.

    Raises:
        ConfigError: If the file is unreadable, not YAML, or fails validation.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(str(path), f"cannot read configuration: {e.strerror or e}") from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(str(path), f"invalid YAML: {e}") from e
    return parse_config(data)
