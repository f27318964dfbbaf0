"""The linearized mode system about the rising circle and the checks that tie it to the full RHS."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceError
from .geometry import BubbleState, PhysicalParams
from .spectral_core import SpectralField

# (3/2)(3/4 − log 2), the weight of the θ̂(1) → θ̂(2) coupling
ANOMALY_FACTOR = 1.5 * (0.75 - math.log(2.0))
ANOMALY_BAND = 64


@dataclass(frozen=True, eq=False)
class LinearCoefficients:
    """Rates of the linear system y_t(k) = −a(k)y(k) + b(k)y(k+1) (+ c₁y(1) at k = 2).

    Arrays are indexed by the frequency k; entry 0 is unused and zero.
    """
    a: np.ndarray
    b: np.ndarray
    c1: complex
    n_modes: int

    def rows(self) -> List[Dict]:
        return [
            {"k": k, "a": float(self.a[k]), "b_re": float(self.b[k].real), "b_im": float(self.b[k].imag)}
            for k in range(1, self.n_modes + 1)
        ]


def _coupling_weight(k: np.ndarray) -> np.ndarray:
    return (k ** 2 - 1) * (k + 1) / (k * (k + 2))


def linear_coefficients(params: PhysicalParams, mean_angle: float, n_modes: int) -> LinearCoefficients:
    if n_modes < 2:
        raise ValueError(f"the linear system needs at least two modes, got {n_modes}")
    k = np.arange(1, n_modes + 1, dtype=float)
    radius = params.radius
    a = np.zeros(n_modes + 1)
    a[1:] = params.a_sigma / radius ** 3 * k * (k ** 2 - 1)
    b = np.zeros(n_modes + 1, dtype=complex)
    b[1:] = -(1.0 + params.a_mu) * params.a_rho / radius * _coupling_weight(k) * np.exp(-1j * mean_angle)
    c1 = (1.0 - params.a_mu) * params.a_rho / radius * ANOMALY_FACTOR * np.exp(1j * mean_angle)
    return LinearCoefficients(a=a, b=b, c1=complex(c1), n_modes=n_modes)


def linear_matrix(coeffs: LinearCoefficients, n_modes: Optional[int] = None) -> np.ndarray:
    """Truncated matrix of the mode system on k = 1..N (row/column k−1 for frequency k)."""
    n = n_modes or coeffs.n_modes
    if n > coeffs.n_modes:
        raise ValueError(f"coefficients only cover {coeffs.n_modes} modes, asked for {n}")
    matrix = np.diag(-coeffs.a[1:n + 1]).astype(complex)
    matrix[np.arange(n - 1), np.arange(1, n)] = coeffs.b[1:n]
    matrix[1, 0] = coeffs.c1
    return matrix


def linearized_rhs_hat(theta_hat: SpectralField, params: PhysicalParams, mean_angle: float,
                       length: float) -> SpectralField:
    """Time derivative of θ̂ under the linearized system, (2π/L) times the Fourier-side operator.

    For k ≥ 1 the row reads −A_σ(2π/L)³k(k²−1)θ̂(k) − (2π/L)(1+A_μ)A_ρ·(k²−1)(k+1)/(k(k+2))·e^{−iϑ̂(0)}θ̂(k+1),
    and row 2 also receives (2π/L)(1−A_μ)A_ρ(3/2)(3/4−log 2)e^{iϑ̂(0)}θ̂(1). Negative rows follow by
    conjugation and the zero row vanishes.
    """
    n = theta_hat.n_modes
    scale = 2.0 * np.pi / length
    padded = theta_hat.resized(n + 1).positive
    k = np.arange(1, n + 1, dtype=float)
    positive = np.zeros(n + 1, dtype=complex)
    positive[1:] = (
        -params.a_sigma * scale ** 3 * k * (k ** 2 - 1) * padded[1:n + 1]
        - scale * (1.0 + params.a_mu) * params.a_rho * _coupling_weight(k) * np.exp(-1j * mean_angle) * padded[2:n + 2]
    )
    if n >= 2:
        positive[2] += scale * (1.0 - params.a_mu) * params.a_rho * ANOMALY_FACTOR * np.exp(1j * mean_angle) * padded[1]
    return SpectralField(positive)


def _check_frequency(k: int) -> None:
    if k == 0:
        raise ValueError("the integrals I1 and I2 are not defined at k = 0")


def integral_I1(k: int) -> float:
    _check_frequency(k)
    if k == 2:
        return math.pi * (0.5 - math.log(4.0))
    if k >= 1:
        return -math.pi
    return -k * math.pi / (2 - k)


def integral_I2(k: int) -> float:
    _check_frequency(k)
    if k == 2:
        return math.pi * (math.log(4.0) - 1.5)
    if k >= 1:
        return 0.0
    return 2.0 * math.pi / (2 - k)


def _sinc(n: int, beta: float) -> float:
    return float(np.sinc(n * beta / (2.0 * np.pi)))


def integral_I_quadrature(which: int, k: int) -> float:
    """I₁(k) or I₂(k) by quadrature of their defining integrals.

    The s-integral of β cos(βs)/(4 sin²(β/2)) against the trigonometric factors is done in
    closed form, which leaves an even, smooth integrand in β written with sinc functions
    (the sin⁻²(β/2) singularity cancels against sinc(β/2π)⁻²). That integrand is integrated
    adaptively over [0, π] and doubled.

    Raises:
        ValueError: If ``which`` is not 1 or 2, or k = 0.
        ConvergenceError: If the adaptive quadrature misses its tolerance.
    """
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which}")
    _check_frequency(k)
    sign = 1.0 if which == 1 else -1.0

    def integrand(beta: float) -> float:
        diagonal = k * _sinc(k, beta) ** 2
        cross = (k + 2) * _sinc(k + 2, beta) * _sinc(k - 2, beta)
        return -0.25 * (diagonal + sign * cross) / _sinc(1, beta) ** 2

    value, error = quad(integrand, 0.0, np.pi, epsabs=1e-14, epsrel=1e-13, limit=400)
    if error > 1e-10:
        raise ConvergenceError(f"quadrature of I{which}({k}) did not converge (error {error:.2e})")
    return 2.0 * value


def catalan_constant(terms: int = 20000) -> float:
    """Σ (−1)ⁿ/(2n+1)², as the mean of two consecutive partial sums of the alternating series."""
    n = np.arange(terms + 1, dtype=float)
    series = np.where(n % 2 == 0, 1.0, -1.0) / (2.0 * n + 1.0) ** 2
    upper = math.fsum(series[::-1])
    lower = math.fsum(series[-2::-1])
    return 0.5 * (upper + lower)


def cr_constant() -> float:
    """C_R = 1 + (4/π)·V·√(1+π²/4), the bound on |I(k, −1)|."""
    return 1.0 + 4.0 / math.pi * catalan_constant() * math.sqrt(1.0 + math.pi ** 2 / 4.0)


@dataclass
class LinearizationReport:
    """Amplitude sweep comparing RHS(ε)/ε with the linear operator.

    Attributes:
        mode: Excited frequency k; θ = ε·2cos(kα).
        rows: One {k, eps, err, fitted_slope} row per amplitude.
        fitted_slope: Least-squares slope of log err against log ε.
        anomaly_expected: (2π/L)(1−A_μ)A_ρ(3/2)(3/4−log 2)e^{iϑ̂(0)}, set when mode = 1.
        anomaly_measured: Row-2 response per unit θ̂(1) at the smallest ε, set when mode = 1. The
            mode-1 curve does not close, so the quadrature error decays like N⁻²; the value is
            extrapolated from bands B and 2B, B = max(n_modes, 64).
    """
    mode: int
    rows: List[Dict] = field(default_factory=list)
    fitted_slope: float = math.nan
    anomaly_expected: Optional[complex] = None
    anomaly_measured: Optional[complex] = None

    @property
    def max_ratio(self) -> float:
        """max err/ε, the constant C in err ≤ C·ε."""
        return max(row["err"] / row["eps"] for row in self.rows)


def verify_linearization(params: PhysicalParams, mean_angle: float, mode: int,
                         eps_list: Iterable[float] = (1e-2, 1e-3, 1e-4), n_modes: int = 32,
                         omega_tol: float = 1e-13) -> LinearizationReport:
    """Compare the full nonlinear RHS at θ = ε·2cos(kα), L = 2πR, with the linearized system.

    The error is the largest coefficient deviation of RHS(ε)/ε from the linear operator
    applied to 2cos(kα), so it is O(ε) with slope one on a log-log fit.
    """
    from .evolution import full_rhs, SolverConfig

    if not 1 <= mode <= n_modes - 1:
        raise ValueError(f"mode must lie in 1..{n_modes - 1}, got {mode}")
    length = 2.0 * np.pi * params.radius
    unit = SpectralField.from_modes({mode: 1.0}, n_modes)
    linear = linearized_rhs_hat(unit, params, mean_angle, length)
    config = SolverConfig(n_modes=n_modes, omega_tol=omega_tol)
    report = LinearizationReport(mode=mode)
    response = None
    for eps in sorted(eps_list, reverse=True):
        state = BubbleState(mean_angle=mean_angle, theta=eps * unit, length=length)
        rhs = full_rhs(state, params, config)
        response = (1.0 / eps) * rhs.dtheta
        err = float(np.max(np.abs((response - linear).coeffs)))
        report.rows.append({"k": mode, "eps": eps, "err": err})
        logging.debug('Linearization k=%d eps=%.1e err=%.3e', mode, eps, err)
    eps_values = np.array([row["eps"] for row in report.rows])
    errors = np.array([row["err"] for row in report.rows])
    if len(report.rows) >= 2 and np.all(errors > 0):
        report.fitted_slope = float(np.polyfit(np.log(eps_values), np.log(errors), 1)[0])
    for row in report.rows:
        row["fitted_slope"] = report.fitted_slope
    if mode == 1 and response is not None:
        report.anomaly_expected = linear.coeff(2)
        eps = min(row["eps"] for row in report.rows)
        band = max(n_modes, ANOMALY_BAND)
        coarse = _row_two_response(params, mean_angle, eps, band, omega_tol)
        fine = _row_two_response(params, mean_angle, eps, 2 * band, omega_tol)
        report.anomaly_measured = (4.0 * fine - coarse) / 3.0
        logging.debug('Anomaly at N=%d: %s, at N=%d: %s', band, coarse, 2 * band, fine)
    return report


def _row_two_response(params: PhysicalParams, mean_angle: float, eps: float, n_modes: int,
                       omega_tol: float) -> complex:
    from .evolution import full_rhs, SolverConfig

    theta = SpectralField.from_modes({1: eps}, n_modes)
    state = BubbleState(mean_angle=mean_angle, theta=theta, length=2.0 * np.pi * params.radius)
    rhs = full_rhs(state, params, SolverConfig(n_modes=n_modes, omega_tol=omega_tol))
    return complex(rhs.dtheta.coeff(2)) / eps


def sine_response_entries(theta: SpectralField, mean_angle: float, k: int) -> Tuple[complex, complex]:
    """Fourier coefficients (Im R(f)^(k), Re R(f)^(k)) for f = sin(α + ϑ̂(0)) and k ≥ 1.

    These are the entries through which R feeds the gravity forcing into the linear system;
    I₁ and I₂ carry the k = 2 weights.
    """
    if k < 1:
        raise ValueError(f"entries are tabulated for k >= 1, got {k}")
    up = np.exp(1j * mean_angle) / (2.0 * np.pi) * theta.coeff(k - 1)
    down = np.exp(-1j * mean_angle) / (2.0 * np.pi) * theta.coeff(k + 1)
    lower_weight = integral_I1(2) if k == 2 else -np.pi
    imag_entry = down * (-k * np.pi / (2 + k)) - up * lower_weight
    real_entry = 1j * down * (2.0 * np.pi / (2 + k))
    if k == 2:
        real_entry -= 1j * up * integral_I2(2)
    return complex(imag_entry), complex(real_entry)
