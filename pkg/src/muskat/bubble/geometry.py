"""Physical parameters, the bubble state and the curve quantities derived from it.

The interface is z(α) = z(0) + (L/2π)∫₀^α e^{i(η+ϑ̂(0)+θ(η))} dη, α ∈ [−π, π), so |z_α| = L/2π
is constant and θ is the mean-free deviation of the tangent angle from α.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Mapping, Optional

import numpy as np

from .errors import AdmissibilityError
from .spectral_core import (
    ComplexSpectrum,
    SpectralField,
    derivative,
    grid,
    inverse_transform,
    wiener_norm,
)

# ‖θ‖_{F^{0,1}} below this keeps (π/2)(e^{2m}−1) < 1, so the length denominator stays positive
LENGTH_SIZE_GUARD = 0.5 * math.log(1.0 + 2.0 / math.pi)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensionless groups of the two-fluid problem.

    Attributes:
        a_mu: Viscosity contrast (μ₂−μ₁)/(μ₂+μ₁), in [−1, 1].
        a_sigma: Surface tension group κσ/(μ₂+μ₁) (length³/time), positive.
        a_rho: Gravity group gκ(ρ₂−ρ₁)/(μ₂+μ₁) (length/time).
        radius: Radius R of the circle with the same area (length), positive.
    """
    a_mu: float
    a_sigma: float
    a_rho: float
    radius: float

    def __post_init__(self):
        if not -1.0 <= self.a_mu <= 1.0:
            raise ValueError(f"a_mu must lie in [-1, 1], got {self.a_mu}")
        if self.a_sigma <= 0:
            raise ValueError(f"a_sigma must be positive, got {self.a_sigma}")
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def gravity_ratio(self) -> float:
        """x = |A_ρ|R²/A_σ, the single group the transform bounds depend on."""
        return abs(self.a_rho) * self.radius ** 2 / self.a_sigma

    def to_dict(self) -> Dict[str, float]:
        return {"a_mu": self.a_mu, "a_sigma": self.a_sigma, "a_rho": self.a_rho, "radius": self.radius}


@dataclass(frozen=True)
class FluidConstants:
    """Raw fluid constants; index 1 is the outer fluid and 2 the bubble."""
    mu1: float
    mu2: float
    rho1: float
    rho2: float
    sigma: float
    kappa: float
    g: float
    radius: float

    def to_params(self) -> PhysicalParams:
        return derive_params(
            self.mu1, self.mu2, self.rho1, self.rho2, self.sigma, self.kappa, self.g, self.radius
        )


def derive_params(mu1, mu2, rho1, rho2, sigma, kappa, g, radius) -> PhysicalParams:
    """Dimensionless groups from the fluid constants.

    Raises:
        ValueError: If μ₁+μ₂, σ, κ or the radius is not positive.
    """
    viscosity = mu1 + mu2
    if viscosity <= 0:
        raise ValueError(f"mu1 + mu2 must be positive, got {viscosity}")
    if sigma <= 0 or kappa <= 0:
        raise ValueError(f"sigma and kappa must be positive, got sigma={sigma}, kappa={kappa}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return PhysicalParams(
        a_mu=(mu2 - mu1) / viscosity,
        a_sigma=kappa * sigma / viscosity,
        a_rho=g * kappa * (rho2 - rho1) / viscosity,
        radius=radius,
    )


@dataclass(frozen=True)
class BubbleState:
    """Snapshot of the interface in tangent-angle / length variables.

    Attributes:
        mean_angle: ϑ̂(0), the mean tangent angle (radians).
        theta: Mean-free angle perturbation θ.
        length: Curve length L.
        base_point: z(0), the point tracked at α = 0.
        time: Simulation time.
    """
    mean_angle: float
    theta: SpectralField
    length: float
    base_point: complex = 0j
    time: float = 0.0

    def __post_init__(self):
        if abs(self.theta.mean) > 0.0:
            raise ValueError(f"theta must be mean free, got mean {self.theta.mean}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def n_modes(self) -> int:
        return self.theta.n_modes

    @property
    def grid_size(self) -> int:
        """Default quadrature grid: 2M points with M = 2N."""
        return 4 * self.theta.n_modes

    def replace(self, **changes) -> "BubbleState":
        return replace(self, **changes)

    def to_dict(self) -> Dict:
        return {
            "mean_angle": self.mean_angle,
            "length": self.length,
            "base_point": [self.base_point.real, self.base_point.imag],
            "time": self.time,
            "theta": self.theta.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "BubbleState":
        re, im = data["base_point"]
        return cls(
            mean_angle=float(data["mean_angle"]),
            theta=SpectralField.from_dict(data["theta"]),
            length=float(data["length"]),
            base_point=complex(re, im),
            time=float(data.get("time", 0.0)),
        )


def phase_spectrum(theta: SpectralField, grid_size: Optional[int] = None) -> ComplexSpectrum:
    """Coefficients of e^{i(α+θ(α))} resolved on a grid of ``grid_size`` points."""
    grid_size = grid_size or 4 * theta.n_modes
    alpha = grid(grid_size)
    return ComplexSpectrum.from_samples(np.exp(1j * (alpha + inverse_transform(theta, grid_size))))


def length_from_theta(theta: SpectralField, mean_angle: float, radius: float,
                      grid_size: Optional[int] = None) -> float:
    """Length of the curve with angle θ enclosing the area πR².

    The double integral Im ∬ e^{i(α−η)}(e^{i(θ(α)−θ(η))} − 1) dη dα is factored into
    single integrals of p = e^{i(α+θ)} and its conjugate, evaluated exactly on the
    Fourier coefficients of p. ``mean_angle`` does not enter the result.

    Raises:
        AdmissibilityError: If the denominator 1 + (1/2π)Im(…) is not positive.
    """
    p = phase_spectrum(theta, grid_size)
    k = p.wavenumbers
    c = p.coeffs
    q = np.conj(c[::-1])  # coefficients of conj(p): q̂(k) = conj(p̂(−k))
    n = p.n_modes
    nonzero = k != 0
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    # ∫ p(α) q̂(0) α dα
    moment = q[n] * np.sum(-2j * np.pi * sign[nonzero] * c[nonzero] / k[nonzero])
    # Σ_{k≠0} q̂(k)/(ik) ∫ p(α)(e^{ikα} − 1) dα
    oscillating = np.sum(q[nonzero] / (1j * k[nonzero]) * 2.0 * np.pi * (c[::-1][nonzero] - c[n]))
    double_integral = moment + oscillating - 2j * np.pi
    denominator = 1.0 + double_integral.imag / (2.0 * np.pi)
    if denominator <= 0:
        raise AdmissibilityError(
            f"length denominator {denominator:.3e} is not positive; the curve is too far "
            f"from a circle (|theta|_F01={wiener_norm(theta):.4f}, guard {LENGTH_SIZE_GUARD:.4f})"
        )
    return 2.0 * np.pi * radius / math.sqrt(denominator)


@dataclass(frozen=True)
class LengthEnvelope:
    """Bounds lower ≤ L ≤ upper and the constants (√(1+e) − 1)/m, ((1+e)^{3/2} − 1)/m with e = (π/2)(e^{2m}−1)."""
    lower: float
    upper: float
    c_sqrt: float
    c_three_halves: float


def length_envelope(m: float, radius: float) -> LengthEnvelope:
    """Two-sided bound on L for ‖θ‖_{F^{0,1}} = m, with the length-perturbation constants.

    Raises:
        AdmissibilityError: If m ≥ ½log(1+2/π).
    """
    if m < 0:
        raise ValueError(f"norm must be nonnegative, got {m}")
    if m >= LENGTH_SIZE_GUARD:
        raise AdmissibilityError(f"|theta|_F01={m:.4f} exceeds the length guard {LENGTH_SIZE_GUARD:.4f}")
    excess = 0.5 * math.pi * math.expm1(2.0 * m)
    lower = 2.0 * math.pi * radius / math.sqrt(1.0 + excess)
    upper = 2.0 * math.pi * radius / math.sqrt(1.0 - excess)
    if m == 0:
        return LengthEnvelope(lower, upper, 0.5 * math.pi, 1.5 * math.pi)
    c_sqrt = (math.sqrt(1.0 + excess) - 1.0) / m
    c_three_halves = ((1.0 + excess) ** 1.5 - 1.0) / m
    return LengthEnvelope(lower, upper, c_sqrt, c_three_halves)


def admissibility_margin(theta: SpectralField) -> float:
    return LENGTH_SIZE_GUARD - wiener_norm(theta)


def reconstruct_curve(state: BubbleState, grid_size: Optional[int] = None) -> np.ndarray:
    """Points z(α_j) of the interface on the grid, anchored at z(0) = base_point."""
    grid_size = grid_size or state.grid_size
    p = phase_spectrum(state.theta, grid_size)
    scale = state.length / (2.0 * np.pi) * np.exp(1j * state.mean_angle)
    return state.base_point + scale * p.antiderivative_samples(grid_size)


def enclosed_area(state: BubbleState, grid_size: Optional[int] = None) -> float:
    """V = ½ Im ∮ conj(z) z_α dα on the reconstructed curve."""
    grid_size = grid_size or state.grid_size
    alpha = grid(grid_size)
    z = reconstruct_curve(state, grid_size)
    angle = alpha + state.mean_angle + inverse_transform(state.theta, grid_size)
    z_alpha = state.length / (2.0 * np.pi) * np.exp(1j * angle)
    return float(0.5 * 2.0 * np.pi * np.mean(np.conj(z) * z_alpha).imag)


def curvature(state: BubbleState) -> SpectralField:
    """K(α) = (2π/L)(1 + θ_α(α)); the constant 2π/L sits in the zero mode."""
    scale = 2.0 * np.pi / state.length
    return (scale * derivative(state.theta)).with_mean(scale)


def constraint_residual(state: BubbleState, grid_size: Optional[int] = None) -> complex:
    """(1/2π)∫ e^{i(α+ϑ̂(0)+θ(α))} dα; zero exactly when the curve closes."""
    p = phase_spectrum(state.theta, grid_size or state.grid_size)
    return complex(np.exp(1j * state.mean_angle) * p.coeff(0))


def curve_snapshot(state: BubbleState, grid_size: Optional[int] = None) -> Dict:
    z = reconstruct_curve(state, grid_size)
    return {"t": state.time, "points": [[float(p.real), float(p.imag)] for p in z]}


def initial_state(modes: Mapping[int, complex], params: PhysicalParams, n_modes: int,
                  mean_angle: float = 0.0, base_point: complex = 0j,
                  solve_first_modes: bool = True, time: float = 0.0) -> BubbleState:
    """Admissible state from a sparse set of angle modes.

    Args:
        modes: {k: θ̂(k)}; negative keys are folded onto k by conjugation, k = 0 is dropped.
        params: Physical parameters; only the radius is used.
        n_modes: Band N of the state.
        mean_angle: ϑ̂(0).
        base_point: z(0).
        solve_first_modes: Replace θ̂(±1) by the values that close the curve.
        time: Initial time.

    Returns:
        BubbleState with L chosen so the enclosed area is πR².
    """
    from .constraint_solver import project_first_modes

    theta = SpectralField.from_modes(modes, n_modes).mean_free()
    if solve_first_modes:
        theta = project_first_modes(theta)
    length = length_from_theta(theta, mean_angle, params.radius)
    logging.debug('Initial state: |theta|_F01=%.3e, L=%.12f', wiener_norm(theta), length)
    return BubbleState(mean_angle=mean_angle, theta=theta, length=length,
                       base_point=complex(base_point), time=time)


def circle_state(params: PhysicalParams, n_modes: int, mean_angle: float = 0.0,
                 base_point: complex = 0j) -> BubbleState:
    return BubbleState(mean_angle=mean_angle, theta=SpectralField.zeros(n_modes),
                       length=2.0 * np.pi * params.radius, base_point=complex(base_point))


def centroid(state: BubbleState, grid_size: Optional[int] = None) -> complex:
    """Area centroid (i/4V)∮ z² conj(z_α) dα of the enclosed region."""
    grid_size = grid_size or state.grid_size
    alpha = grid(grid_size)
    z = reconstruct_curve(state, grid_size)
    angle = alpha + state.mean_angle + inverse_transform(state.theta, grid_size)
    z_alpha = state.length / (2.0 * np.pi) * np.exp(1j * angle)
    moment = 0.25j * 2.0 * np.pi * np.mean(z ** 2 * np.conj(z_alpha))
    return complex(moment / enclosed_area(state, grid_size))
