"""Nonlocal velocity machinery on the interface.

The Birkhoff–Rott integral is evaluated in physical space with the alternating-point
trapezoidal rule: on the grid of G = 4N points, the value at α_j only sums over the points
α_l with l − j odd, each with weight 2h = 4π/G. Chords are taken in lifted form

    z(α_j) − z(α_l) = (L/2π) e^{iϑ̂(0)} [Q(α_j) − Q(α_l) + p̂(0)·wrap(α_j − α_l)],

with p = e^{i(α+θ)} and Q the periodic part of its primitive, which coincides with the plain
chord on closed curves and stays meaningful when the first modes do not close the curve.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import sici

from .errors import AdmissibilityError, ConvergenceError
from .geometry import BubbleState, PhysicalParams, phase_spectrum
from .spectral_core import (
    ComplexSpectrum,
    SpectralField,
    convolve,
    derivative,
    evaluate,
    forward_transform,
    grid,
    hilbert,
    inverse_transform,
    mean_free_antiderivative,
    wiener_norm,
)

# |z(α)−z(β)| relative to the circle chord below which the curve is treated as self-intersecting
CHORD_ARC_THRESHOLD = 1e-3

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(32)


@dataclass(frozen=True)
class VorticityField:
    """Vortex-sheet strength ω with ω̂(0) = 0, plus how the fixed point was reached."""
    omega: SpectralField
    iterations: int = 0
    residual: float = 0.0

    def __post_init__(self):
        if self.omega.mean != 0.0:
            raise ValueError(f"vorticity must be mean free, got mean {self.omega.mean}")


@dataclass(frozen=True)
class VelocitySplit:
    """Normal velocity U and tangential velocity T; T carries T̂(0) in its zero mode."""
    u: SpectralField
    t_tan: SpectralField
    u_at_zero: float
    t_at_zero: float


class ContourKernel:
    """Discrete Birkhoff–Rott operator of one state, built once and applied many times."""

    def __init__(self, state: BubbleState, grid_size: Optional[int] = None):
        self.state = state
        self.grid_size = grid_size or state.grid_size
        if self.grid_size % 4:
            raise ValueError(f"grid size must be a multiple of 4, got {self.grid_size}")

    @cached_property
    def alpha(self) -> np.ndarray:
        return grid(self.grid_size)

    @cached_property
    def theta_samples(self) -> np.ndarray:
        return inverse_transform(self.state.theta, self.grid_size)

    @cached_property
    def tangent(self) -> np.ndarray:
        """τ(α_j) = e^{i(α_j + ϑ̂(0) + θ(α_j))}."""
        return np.exp(1j * (self.alpha + self.state.mean_angle + self.theta_samples))

    @cached_property
    def kernel(self) -> np.ndarray:
        """K with conj(BR)(α_j) = Σ_l K_jl ω(α_l)."""
        size = self.grid_size
        state = self.state
        p = phase_spectrum(state.theta, size)
        mean_term = p.coeff(0)
        periodic = p.antiderivative_samples(size) - mean_term * self.alpha
        index = np.arange(size)
        offset = index[:, None] - index[None, :]
        odd = (offset % 2) == 1
        wrapped = np.mod(2.0 * np.pi * offset / size + np.pi, 2.0 * np.pi) - np.pi
        scale = state.length / (2.0 * np.pi)
        chord = scale * np.exp(1j * state.mean_angle) * (
            periodic[:, None] - periodic[None, :] + mean_term * wrapped
        )
        circle_chord = scale * np.abs(2.0 * np.sin(0.5 * wrapped[odd]))
        closest = np.min(np.abs(chord[odd]) / circle_chord)
        if closest < CHORD_ARC_THRESHOLD:
            raise AdmissibilityError(
                f"chord-arc ratio {closest:.2e} below {CHORD_ARC_THRESHOLD:.0e}; the curve "
                f"nearly intersects itself"
            )
        kernel = np.zeros((size, size), dtype=complex)
        kernel[odd] = (2.0 / size) / (1j * chord[odd])
        return kernel

    def conj_br(self, omega: SpectralField) -> np.ndarray:
        return self.kernel @ inverse_transform(omega, self.grid_size)

    def normal_samples(self, omega: SpectralField) -> np.ndarray:
        return (self.conj_br(omega) * 1j * self.tangent).real

    def tangential_samples(self, omega: SpectralField) -> np.ndarray:
        return -(self.conj_br(omega) * self.tangent).real


def birkhoff_rott(state: BubbleState, w: VorticityField, kernel: Optional[ContourKernel] = None) -> ComplexSpectrum:
    """Coefficients of conj(BR)(ω) = (1/2πi) pv∫ ω(β)/(z(α)−z(β)) dβ.

    Raises:
        AdmissibilityError: If the curve comes within the chord-arc threshold of touching itself.
    """
    kernel = kernel or ContourKernel(state)
    return ComplexSpectrum.from_samples(kernel.conj_br(w.omega))


def normal_velocity(state: BubbleState, w: VorticityField, kernel: Optional[ContourKernel] = None) -> SpectralField:
    """U = Re(conj(BR)(ω)·i e^{i(α+ϑ)})."""
    kernel = kernel or ContourKernel(state)
    return forward_transform(kernel.normal_samples(w.omega), state.n_modes)


def d_operator(state: BubbleState, w: VorticityField, kernel: Optional[ContourKernel] = None) -> SpectralField:
    """D(ω) = −Re(conj(BR)(ω)·e^{i(α+ϑ)})."""
    kernel = kernel or ContourKernel(state)
    return forward_transform(kernel.tangential_samples(w.omega), state.n_modes)


def vorticity_forcing(state: BubbleState, params: PhysicalParams, kernel: ContourKernel) -> SpectralField:
    """2A_σ(2π/L)θ_αα − 2A_ρ(L/2π)sin(α+ϑ), the ω-independent part of the vorticity identity."""
    scale = state.length / (2.0 * np.pi)
    gravity = forward_transform(np.imag(kernel.tangent), state.n_modes)
    forcing = (2.0 * params.a_sigma / scale) * derivative(state.theta, 2) - (2.0 * params.a_rho * scale) * gravity
    return forcing.mean_free()


def solve_vorticity(state: BubbleState, params: PhysicalParams, tol: float = 1e-12, max_iter: int = 200,
                    initial: Optional[VorticityField] = None,
                    kernel: Optional[ContourKernel] = None) -> VorticityField:
    """Picard iteration for ω = 2A_μ(L/2π)D(ω) + 2A_σ(2π/L)θ_αα − 2A_ρ(L/2π)sin(α+ϑ).

    Args:
        state: Admissible state.
        params: Physical parameters.
        tol: Stop once ‖ω^{m+1} − ω^m‖_{F^{0,1}} < tol.
        max_iter: Sweep budget.
        initial: Warm start; defaults to the forcing terms.
        kernel: Prebuilt Birkhoff–Rott operator of ``state``.

    Returns:
        VorticityField with the number of sweeps and the last increment.

    Raises:
        ConvergenceError: If the increments do not fall below ``tol``.
    """
    kernel = kernel or ContourKernel(state)
    forcing = vorticity_forcing(state, params, kernel)
    if params.a_mu == 0:
        return VorticityField(forcing, 0, 0.0)
    coupling = 2.0 * params.a_mu * state.length / (2.0 * np.pi)
    omega = initial.omega.resized(state.n_modes) if initial is not None else forcing
    increment = math.inf
    for iteration in range(1, max_iter + 1):
        tangential = forward_transform(kernel.tangential_samples(omega), state.n_modes)
        updated = (coupling * tangential + forcing).mean_free()
        increment = wiener_norm(updated - omega)
        omega = updated
        if increment < tol:
            logging.debug('Vorticity converged in %d sweeps, increment %.3e', iteration, increment)
            return VorticityField(omega, iteration, increment)
    raise ConvergenceError(
        f"vorticity iteration did not converge in {max_iter} sweeps (last increment {increment:.3e}); "
        f"the state is outside the contractive regime",
        iterations=max_iter,
        increment=increment,
    )


def tangential_velocity(state: BubbleState, u: SpectralField, params: PhysicalParams) -> SpectralField:
    """T = ∫₀^α(1+θ_α)U − (α/2π)∫(1+θ_α)U + T(0), with the frame choice T(0) = A_ρ sin ϑ̂(0)."""
    stretch = derivative(state.theta) + 1.0
    transport = mean_free_antiderivative(convolve(stretch, u, state.n_modes))
    return transport + params.a_rho * math.sin(state.mean_angle)


def velocities(state: BubbleState, w: VorticityField, params: PhysicalParams,
               kernel: Optional[ContourKernel] = None) -> VelocitySplit:
    kernel = kernel or ContourKernel(state)
    normal = kernel.normal_samples(w.omega)
    u = forward_transform(normal, state.n_modes)
    return VelocitySplit(
        u=u,
        t_tan=tangential_velocity(state, u, params),
        u_at_zero=float(normal[kernel.grid_size // 2]),
        t_at_zero=params.a_rho * math.sin(state.mean_angle),
    )


def omega_zero(state: BubbleState, params: PhysicalParams) -> VorticityField:
    """ω₀ = −A_ρ(L/π) sin(α + ϑ̂(0)), the vorticity of the rising circle."""
    positive = np.zeros(state.n_modes + 1, dtype=complex)
    positive[1] = 1j * params.a_rho * state.length / (2.0 * np.pi) * np.exp(1j * state.mean_angle)
    return VorticityField(SpectralField(positive))


def _r_small_angle(beta: float) -> float:
    # β/sin²(β/2) − 4/β, with its series where the difference cancels
    if beta < 1e-2:
        return beta / 3.0 + beta ** 3 / 60.0
    return beta / math.sin(0.5 * beta) ** 2 - 4.0 / beta


@lru_cache(maxsize=None)
def _multiplier_k1_minus_one(k: int) -> float:
    if k == 0:
        return 0.0
    if k < 0:
        return -_multiplier_k1_minus_one(-k)
    remainder, error = quad(_r_small_angle, 0.0, np.pi, weight='sin', wvar=k, epsabs=1e-12, limit=400)
    if not math.isfinite(remainder) or error > 1e-8 * max(1.0, abs(remainder)):
        raise ConvergenceError(f"quadrature for I({k}, -1) did not converge (error {error:.2e})")
    sine_integral, _ = sici(k * np.pi)
    return -(4.0 * sine_integral + remainder) / (2.0 * np.pi)


def r_multiplier(k: int, k1: int) -> float:
    """I(k, k₁), the Fourier multiplier with R̂(f)(k) = Σ_{k₁} f̂(k−k₁)θ̂(k₁)I(k, k₁).

    For k₁ ≥ 0 it averages ±1 over the k₁+1 frequencies k−k₁..k (+1 where m ≤ 0); for k₁ ≤ −2
    over the −1−k₁ frequencies k+1..k−1−k₁. The k₁ = −1 entry is the regular integral
    −(1/2π)∫₀^π β sin(kβ)/sin²(β/2) dβ, split as 4 Si(kπ) plus a smooth quadrature.
    """
    k, k1 = int(k), int(k1)
    if k1 == -1:
        return _multiplier_k1_minus_one(k)
    if k1 >= 0:
        count = k1 + 1
        low, high = k - k1, k
    else:
        count = -1 - k1
        low, high = k + 1, k + count
    nonpositive = max(0, min(high, 0) - low + 1)
    return (2 * nonpositive - count) / count


@lru_cache(maxsize=32)
def _multiplier_table(n_out: int, n_theta: int) -> np.ndarray:
    table = np.array([
        [r_multiplier(k, k1) for k1 in range(-n_theta, n_theta + 1)]
        for k in range(-n_out, n_out + 1)
    ])
    table.setflags(write=False)
    return table


def apply_r(state: BubbleState, f: SpectralField) -> ComplexSpectrum:
    """R(f) through its multiplier form, over the full band N_f + N_θ of the product."""
    theta = state.theta
    n_theta, n_out = theta.n_modes, f.n_modes + theta.n_modes
    table = _multiplier_table(n_out, n_theta)
    padded = f.resized(n_out + n_theta).coeffs
    centre = n_out + n_theta
    k = np.arange(-n_out, n_out + 1)
    result = np.zeros(2 * n_out + 1, dtype=complex)
    for column, k1 in enumerate(range(-n_theta, n_theta + 1)):
        weight = theta.coeff(k1)
        if weight == 0:
            continue
        result += weight * table[:, column] * padded[centre + k - k1]
    return ComplexSpectrum(result)


def apply_r_quadrature(theta: SpectralField, f: SpectralField, alpha: float) -> complex:
    """R(f)(α) by direct principal-value quadrature of its integral form.

    R(f)(α) = (i/π) pv∫ f(α−β)·(−e^{iβ}/sinc²(β/2π))·S(α,β) dβ/β with
    S(α,β) = ∫₀¹ e^{i(s−1)β} θ(α+(s−1)β) ds, evaluated by 32-point Gauss–Legendre in s.
    """
    nodes = 0.5 * (_GAUSS_NODES + 1.0)
    weights = 0.5 * _GAUSS_WEIGHTS

    def integrand(beta: float) -> complex:
        shifted = (nodes - 1.0) * beta
        inner = np.sum(weights * np.exp(1j * shifted) * evaluate(theta, alpha + shifted))
        kernel = -np.exp(1j * beta) / np.sinc(beta / (2.0 * np.pi)) ** 2
        return evaluate(f, [alpha - beta])[0] * kernel * inner

    real, _ = quad(lambda b: integrand(b).real, -np.pi, np.pi, weight='cauchy', wvar=0.0, epsabs=1e-13, limit=400)
    imag, _ = quad(lambda b: integrand(b).imag, -np.pi, np.pi, weight='cauchy', wvar=0.0, epsabs=1e-13, limit=400)
    return 1j / np.pi * complex(real, imag)


def u_decomposition_remainder(state: BubbleState, w: VorticityField,
                              kernel: Optional[ContourKernel] = None) -> SpectralField:
    """U − (π/L)(Hω + Re R(ω)), the part of the normal velocity quadratic in θ."""
    u = normal_velocity(state, w, kernel)
    r_real = apply_r(state, w.omega).real_part().resized(state.n_modes)
    return u - (np.pi / state.length) * (hilbert(w.omega) + r_real)
