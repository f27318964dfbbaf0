"""Time integration of the bubble in angle/length variables, trajectory records and their files."""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .constraint_solver import project_first_modes
from .contour_operators import ContourKernel, VelocitySplit, VorticityField, solve_vorticity, velocities
from .diagonalization import cs_bound
from .errors import BubbleError, ConfigError
from .geometry import (
    BubbleState,
    PhysicalParams,
    constraint_residual,
    curve_snapshot,
    enclosed_area,
    length_from_theta,
)
from .spectral_core import AnalyticWeight, SpectralField, convolve, derivative, wiener_norm

IMEX_MODES = ("integrating_factor", "backward_euler_diag")

CSV_COLUMNS = [
    "t", "norm_f01", "norm_f121", "norm_f121_nu", "length", "mean_angle",
    "base_re", "base_im", "area", "constraint_res", "omega_iters",
]


@dataclass(frozen=True)
class SolverConfig:
    """Discretization and iteration settings of a run.

    Attributes:
        n_modes: Retained band N (the cut-off J_N), at least 8.
        dt: Time step; None picks min(0.5R³/(A_σN), 0.1R/(|A_ρ|N)).
        t_end: Final time.
        omega_tol: F^{0,1} tolerance of the vorticity fixed point.
        omega_max_iter: Sweep budget of the vorticity fixed point.
        imex_mode: ``integrating_factor`` (second order) or ``backward_euler_diag`` (first order).
        record_every: Steps between trajectory rows.
        nu0: Scale of the analytic weight ν(t) = ν₀t/(1+t) used by norm_f121_nu.
        project_constraint: Re-solve θ̂(±1) from the closed-curve constraint after every step.
        warm_start: Start each vorticity solve from the previous solution.
    """
    n_modes: int = 128
    dt: Optional[float] = None
    t_end: float = 1.0
    omega_tol: float = 1e-12
    omega_max_iter: int = 200
    imex_mode: str = "integrating_factor"
    record_every: int = 10
    nu0: float = 0.0
    project_constraint: bool = False
    warm_start: bool = True

    def __post_init__(self):
        if self.n_modes < 8:
            raise ConfigError("solver.n_modes", f"must be at least 8, got {self.n_modes}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("solver.dt", f"must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ConfigError("solver.t_end", f"must be nonnegative, got {self.t_end}")
        if self.imex_mode not in IMEX_MODES:
            raise ConfigError("solver.imex_mode", f"must be one of {', '.join(IMEX_MODES)}, got {self.imex_mode!r}")
        if self.record_every < 1:
            raise ConfigError("solver.record_every", f"must be at least 1, got {self.record_every}")
        if self.omega_tol <= 0 or self.omega_max_iter < 1:
            raise ConfigError("solver.omega_tol", "tolerance and sweep budget must be positive")
        if self.nu0 < 0:
            raise ConfigError("solver.nu0", f"must be nonnegative, got {self.nu0}")

    def resolved_dt(self, params: PhysicalParams) -> float:
        if self.dt is not None:
            return self.dt
        radius, n = params.radius, self.n_modes
        return min(0.5 * radius ** 3 / (params.a_sigma * n), 0.1 * radius / (abs(params.a_rho) * n + 1e-12))


@dataclass(frozen=True)
class RhsResult:
    """Time derivatives of the state plus the vorticity and velocities they came from."""
    dtheta: SpectralField
    dmean_angle: float
    dbase_point: complex
    vorticity: VorticityField
    velocity: VelocitySplit


def full_rhs(state: BubbleState, params: PhysicalParams, config: Optional[SolverConfig] = None,
             warm_start: Optional[VorticityField] = None) -> RhsResult:
    """ϑ_t = (2π/L)(U_α + T(1+θ_α)) split into its mean-free part and its mean, plus dz(0)/dt.

    Raises:
        ConvergenceError: If the vorticity fixed point does not converge.
        AdmissibilityError: If the curve nearly self-intersects.
    """
    config = config or SolverConfig(n_modes=max(state.n_modes, 8))
    kernel = ContourKernel(state)
    vorticity = solve_vorticity(state, params, config.omega_tol, config.omega_max_iter,
                                initial=warm_start, kernel=kernel)
    velocity = velocities(state, vorticity, params, kernel)
    stretch = derivative(state.theta) + 1.0
    angle_rate = (2.0 * np.pi / state.length) * (
        derivative(velocity.u) + convolve(velocity.t_tan, stretch, state.n_modes)
    )
    tangent = np.exp(1j * (state.mean_angle + kernel.theta_samples[kernel.grid_size // 2]))
    dbase_point = velocity.u_at_zero * 1j * tangent + velocity.t_at_zero * tangent
    return RhsResult(
        dtheta=angle_rate.mean_free(),
        dmean_angle=angle_rate.mean,
        dbase_point=complex(dbase_point),
        vorticity=vorticity,
        velocity=velocity,
    )


class IntegratingFactor:
    """Exact per-mode propagators of the frozen-L surface-tension term −A_σ(2π/L)³k(k²−1)."""

    def __init__(self, params: PhysicalParams, length: float, n_modes: int, dt: float):
        k = np.arange(n_modes + 1, dtype=float)
        self.lin_op = params.a_sigma * (2.0 * np.pi / length) ** 3 * k * (k ** 2 - 1)
        self.dt = dt
        self.exp_lin_full = np.exp(-dt * self.lin_op)
        self.exp_lin_half = np.exp(-0.5 * dt * self.lin_op)

    def nonlinear(self, rhs: SpectralField, theta: SpectralField) -> SpectralField:
        """The explicit remainder: full RHS with the frozen diagonal term added back."""
        return SpectralField(rhs.positive + self.lin_op * theta.positive)

    def propagate(self, theta: SpectralField, half: bool = False) -> SpectralField:
        factor = self.exp_lin_half if half else self.exp_lin_full
        return SpectralField(theta.positive * factor)


@dataclass
class StepResult:
    state: BubbleState
    vorticity: VorticityField
    omega_iters: int


def _advance(state: BubbleState, params: PhysicalParams, config: SolverConfig, dt: float,
             warm_start: Optional[VorticityField] = None) -> StepResult:
    factor = IntegratingFactor(params, state.length, state.n_modes, dt)
    first = full_rhs(state, params, config, warm_start)
    iterations = first.vorticity.iterations
    nonlinear0 = factor.nonlinear(first.dtheta, state.theta)
    if config.imex_mode == "backward_euler_diag":
        theta = SpectralField((state.theta.positive + dt * nonlinear0.positive) / (1.0 + dt * factor.lin_op))
        mean_angle = state.mean_angle + dt * first.dmean_angle
        base_point = state.base_point + dt * first.dbase_point
        vorticity = first.vorticity
    else:
        theta_mid = factor.propagate(state.theta + (0.5 * dt) * nonlinear0, half=True)
        middle = BubbleState(
            mean_angle=state.mean_angle + 0.5 * dt * first.dmean_angle,
            theta=theta_mid,
            length=length_from_theta(theta_mid, state.mean_angle, params.radius),
            base_point=state.base_point + 0.5 * dt * first.dbase_point,
            time=state.time + 0.5 * dt,
        )
        second = full_rhs(middle, params, config, first.vorticity if config.warm_start else None)
        iterations += second.vorticity.iterations
        nonlinear1 = factor.nonlinear(second.dtheta, theta_mid)
        theta = factor.propagate(state.theta) + dt * factor.propagate(nonlinear1, half=True)
        mean_angle = state.mean_angle + dt * second.dmean_angle
        base_point = state.base_point + dt * second.dbase_point
        vorticity = second.vorticity
    if config.project_constraint:
        theta = project_first_modes(theta)
    advanced = BubbleState(
        mean_angle=mean_angle,
        theta=theta,
        length=length_from_theta(theta, mean_angle, params.radius),
        base_point=base_point,
        time=state.time + dt,
    )
    return StepResult(advanced, vorticity, iterations)


def step(state: BubbleState, params: PhysicalParams, config: SolverConfig,
         dt: Optional[float] = None) -> BubbleState:
    """One IMEX step: stiff diagonal term exact (or backward Euler), everything else explicit.

    L is frozen inside the step for the implicit part and recomputed from θ afterwards, so the
    enclosed area stays πR².
    """
    return _advance(state, params, config, dt or config.resolved_dt(params)).state


@dataclass
class TrajectoryRecord:
    """Recorded diagnostics of a run, one row per record point.

    Attributes:
        rows: Dicts keyed by CSV_COLUMNS, in increasing time.
        thetas: θ at each record point, kept in memory for derived series.
        snapshots: Curve snapshots {t, points} when requested.
        status: ``completed`` or ``failed``.
        error: Message of the error that stopped a failed run.
        final_state: Last state reached.
        nu0: Analytic weight scale used for norm_f121_nu.
    """
    rows: List[Dict] = field(default_factory=list)
    thetas: List[SpectralField] = field(default_factory=list)
    snapshots: List[Dict] = field(default_factory=list)
    status: str = "completed"
    error: Optional[str] = None
    final_state: Optional[BubbleState] = None
    nu0: float = 0.0

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows])

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=CSV_COLUMNS)

    def to_dict(self) -> Dict:
        return {"status": self.status, "error": self.error, "nu0": self.nu0, "rows": self.rows}


def record_row(state: BubbleState, params: PhysicalParams, nu0: float = 0.0, omega_iters: int = 0) -> Dict:
    weight = AnalyticWeight(nu0=nu0, t=state.time)
    return {
        "t": state.time,
        "norm_f01": wiener_norm(state.theta),
        "norm_f121": wiener_norm(state.theta, 0.5),
        "norm_f121_nu": wiener_norm(state.theta, 0.5, weight),
        "length": state.length,
        "mean_angle": state.mean_angle,
        "base_re": state.base_point.real,
        "base_im": state.base_point.imag,
        "area": enclosed_area(state),
        "constraint_res": abs(constraint_residual(state)),
        "omega_iters": int(omega_iters),
    }


def run(initial: BubbleState, params: PhysicalParams, config: SolverConfig,
        snapshots: bool = False) -> TrajectoryRecord:
    """Step from ``initial`` to t_end, recording every ``record_every`` steps and at the end.

    A solver error stops the run; the rows recorded so far are kept and the record is marked
    ``failed`` with the error message.
    """
    record = TrajectoryRecord(nu0=config.nu0)
    dt = config.resolved_dt(params)
    n_steps = max(1, math.ceil(config.t_end / dt - 1e-9)) if config.t_end > 0 else 0
    if n_steps:
        dt = config.t_end / n_steps
    logging.info('Running %d steps of dt=%.3e to t=%.4g (N=%d, %s)',
                 n_steps, dt, config.t_end, initial.n_modes, config.imex_mode)

    def keep(state: BubbleState, iterations: int) -> None:
        record.rows.append(record_row(state, params, config.nu0, iterations))
        record.thetas.append(state.theta)
        if snapshots:
            record.snapshots.append(curve_snapshot(state))

    state = initial
    keep(state, 0)
    vorticity = None
    try:
        for index in range(1, n_steps + 1):
            result = _advance(state, params, config, dt, vorticity if config.warm_start else None)
            state = result.state.replace(time=initial.time + index * dt)
            vorticity = result.vorticity
            if index % config.record_every == 0 or index == n_steps:
                keep(state, result.omega_iters)
                logging.debug('t=%.4f |theta|_F121=%.3e L=%.12f', state.time,
                              record.rows[-1]["norm_f121"], state.length)
    except BubbleError as e:
        logging.error('Run stopped at t=%.4f: %s', state.time, e)
        record.status = "failed"
        record.error = str(e)
    record.final_state = state
    return record


@dataclass(frozen=True)
class DecayFit:
    rate: float
    r_squared: float


def fit_decay(record: TrajectoryRecord, window: Tuple[float, float], column: str = "norm_f121") -> DecayFit:
    """Least-squares rate λ of ‖θ‖ ≈ C e^{−λt} over the record points inside ``window``.

    Raises:
        ValueError: If the window holds fewer than two points or a nonpositive norm.
    """
    t_a, t_b = window
    times = record.times
    values = record.column(column)
    inside = (times >= t_a) & (times <= t_b)
    if np.count_nonzero(inside) < 2:
        raise ValueError(f"window [{t_a}, {t_b}] holds fewer than two record points")
    if np.any(values[inside] <= 0):
        raise ValueError(f"window [{t_a}, {t_b}] contains nonpositive norms")
    x, y = times[inside], np.log(values[inside])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sum((y - (slope * x + intercept)) ** 2))
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if total == 0 else min(1.0, max(0.0, 1.0 - residual / total))
    return DecayFit(rate=float(-slope), r_squared=r_squared)


def analytic_norm_series(record: TrajectoryRecord, nu0: Optional[float] = None) -> np.ndarray:
    """‖θ(t)‖_{F^{1/2,1}_ν} at each record point with ν(t) = ν₀t/(1+t)."""
    nu0 = record.nu0 if nu0 is None else nu0
    return np.array([
        wiener_norm(theta, 0.5, AnalyticWeight(nu0=nu0, t=row["t"]))
        for theta, row in zip(record.thetas, record.rows)
    ])


def mean_velocity(record: TrajectoryRecord, t_from: float) -> complex:
    """Average velocity of the tracked point z(0) over the record points with t ≥ t_from."""
    times = record.times
    inside = np.nonzero(times >= t_from)[0]
    if inside.size < 2:
        raise ValueError(f"need two record points after t={t_from}")
    first, last = inside[0], inside[-1]
    displacement = complex(record.rows[last]["base_re"] - record.rows[first]["base_re"],
                           record.rows[last]["base_im"] - record.rows[first]["base_im"])
    return displacement / (times[last] - times[first])


@dataclass(frozen=True)
class DecayPrediction:
    rate: float
    cs: float


def decay_prediction(params: PhysicalParams) -> DecayPrediction:
    """Slowest linear decay rate a(2) = 6A_σ/R³ and the transform bound C_S."""
    return DecayPrediction(rate=6.0 * params.a_sigma / params.radius ** 3, cs=cs_bound(params))


def write_outputs(record: TrajectoryRecord, directory, name: str,
                  formats: Sequence[str] = ("csv", "json"), curve_snapshots: bool = False) -> Dict[str, Path]:
    """Write the trajectory (CSV and/or JSON), the final state and optional curve snapshots.

    Returns:
        Map from output kind to the written path.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = {}
    if "csv" in formats:
        path = directory / f"{name}-trajectory.csv"
        record.to_frame().to_csv(path, index=False, float_format="%.17g")
        written["csv"] = path
    if "json" in formats:
        path = directory / f"{name}-trajectory.json"
        path.write_text(json.dumps(record.to_dict(), indent=2, sort_keys=True))
        written["json"] = path
    if record.final_state is not None:
        path = directory / f"{name}-final-state.json"
        path.write_text(json.dumps(record.final_state.to_dict(), indent=2, sort_keys=True))
        written["final_state"] = path
    if curve_snapshots:
        path = directory / f"{name}-curves.json"
        path.write_text(json.dumps(record.snapshots))
        written["curves"] = path
    for kind, path in written.items():
        logging.info('Wrote %s to %s', kind, path)
    return written


def load_record(path) -> TrajectoryRecord:
    """Read a trajectory CSV written by write_outputs."""
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [column for column in CSV_COLUMNS if column not in frame.columns]
    if missing:
        raise ValueError(f"{path} lacks columns {', '.join(missing)}")
    rows = frame[CSV_COLUMNS].to_dict("records")
    for row in rows:
        row["omega_iters"] = int(row["omega_iters"])
    return TrajectoryRecord(rows=rows)


def load_state(path) -> BubbleState:
    return BubbleState.from_dict(json.loads(Path(path).read_text()))
