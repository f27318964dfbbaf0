"""Upper-triangular change of basis y = S⁻¹θ̂ that turns the mode system into y_t(k) = −a(k)y(k)."""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import iv

from .geometry import PhysicalParams
from .linear_analysis import LinearCoefficients, linear_matrix
from .spectral_core import AnalyticWeight, SpectralField, wiener_norm

# beyond this many superdiagonal steps, products are accumulated as log-magnitude and phase
_LOG_PRODUCT_DISTANCE = 40


@dataclass(frozen=True, eq=False)
class TriangularTransform:
    """S and S⁻¹ on the modes k = 1..N; row/column k−1 holds frequency k."""
    n_modes: int
    s_inv: np.ndarray
    s: np.ndarray


def _running_products(ratios: np.ndarray) -> np.ndarray:
    if ratios.size == 0:
        return ratios
    products = np.cumprod(ratios)
    if ratios.size > _LOG_PRODUCT_DISTANCE:
        with np.errstate(divide='ignore'):
            log_magnitude = np.cumsum(np.log(np.abs(ratios)))
        phase = np.cumsum(np.angle(ratios))
        far = slice(_LOG_PRODUCT_DISTANCE, None)
        products[far] = np.exp(log_magnitude[far] + 1j * phase[far])
    return products


def build_transform(coeffs: LinearCoefficients, n_modes: Optional[int] = None) -> TriangularTransform:
    """Entries of S⁻¹ and S from the products of b(m)/(a(·)−a(·)).

    S⁻¹_{k,j} = (−1)^{j−k} ∏_{l=1}^{j−k} b(k−1+l)/(a(k)−a(k+l)) and
    S_{k,j} = ∏_{l=1}^{j−k} b(k−1+l)/(a(k−1+l)−a(j)) for j ≥ k ≥ 2; the first row is e₁ and
    the only entries below the diagonal are S⁻¹_{2,1} = −c₁/a(2), S_{2,1} = c₁/a(2).

    Raises:
        ValueError: If a(2) = 0 or fewer than two modes are requested.
    """
    n = n_modes or coeffs.n_modes
    if n < 2 or n > coeffs.n_modes:
        raise ValueError(f"n_modes must lie in 2..{coeffs.n_modes}, got {n}")
    a, b = coeffs.a, coeffs.b
    if a[2] == 0:
        raise ValueError("a(2) vanishes; surface tension must be positive")
    s_inv = np.eye(n, dtype=complex)
    s = np.eye(n, dtype=complex)
    for k in range(2, n + 1):
        j = np.arange(k + 1, n + 1)
        # step to column j multiplies by −b(j−1)/(a(k)−a(j))
        s_inv[k - 1, k:] = _running_products(-b[j - 1] / (a[k] - a[j]))
    for j in range(3, n + 1):
        k = np.arange(j - 1, 1, -1)
        # step to row k multiplies by b(k)/(a(k)−a(j))
        s[k - 1, j - 1] = _running_products(b[k] / (a[k] - a[j]))
    s_inv[1, 0] = -coeffs.c1 / a[2]
    s[1, 0] = coeffs.c1 / a[2]
    logging.debug('Built triangular transform on %d modes', n)
    return TriangularTransform(n_modes=n, s_inv=s_inv, s=s)


def interior_size(n_modes: int) -> int:
    """Columns kept by the residual checks; the last max(4, N/16) carry truncation effects."""
    return n_modes - max(4, n_modes // 16)


def verify_inverse(t: TriangularTransform) -> float:
    """max |S·S⁻¹ − I| over the interior block."""
    m = interior_size(t.n_modes)
    residual = t.s @ t.s_inv - np.eye(t.n_modes)
    return float(np.max(np.abs(residual[:m, :m])))


def conjugated_matrix(t: TriangularTransform, coeffs: LinearCoefficients, n_modes: Optional[int] = None) -> np.ndarray:
    """S⁻¹MS on the first ``n_modes`` modes."""
    n = n_modes or t.n_modes
    return t.s_inv[:n, :n] @ linear_matrix(coeffs, n) @ t.s[:n, :n]


def verify_diagonalizes(t: TriangularTransform, coeffs: LinearCoefficients, n_modes: Optional[int] = None) -> float:
    """Largest off-diagonal |S⁻¹MS| over the interior block; the diagonal should read −a(k)."""
    n = n_modes or t.n_modes
    conjugated = conjugated_matrix(t, coeffs, n)
    m = interior_size(n)
    block = conjugated[:m, :m]
    return float(np.max(np.abs(block - np.diag(np.diag(block)))))


def l1_operator_norm(matrix: np.ndarray) -> float:
    """Operator norm on ℓ¹: the largest column sum of absolute values."""
    return float(np.max(np.sum(np.abs(matrix), axis=0)))


def bessel_i3(z: float) -> float:
    """Modified Bessel function of the first kind I₃(z), z ≥ 0."""
    if z < 0:
        raise ValueError(f"bessel_i3 needs z >= 0, got {z}")
    return float(iv(3, z))


def cs_bound(params: PhysicalParams) -> float:
    """C_S = max{1 + ¼(1−A_μ)x(3/4−log 2), 6·I₃(2√y)/y^{3/2}} with x = |A_ρ|R²/A_σ, y = (1+A_μ)x."""
    x = params.gravity_ratio
    first = 1.0 + 0.25 * (1.0 - params.a_mu) * x * (0.75 - math.log(2.0))
    y = (1.0 + params.a_mu) * x
    second = 1.0 if y == 0 else 6.0 * bessel_i3(2.0 * math.sqrt(y)) / y ** 1.5
    return max(first, second)


def entry_decay_bound(params: PhysicalParams, j: int) -> float:
    """((1+A_μ)x)^j·6/(j!(j+3)!), the bound on |S⁻¹_{k,k+j}| and |S_{k,k+j}|."""
    if j < 0:
        raise ValueError(f"distance must be nonnegative, got {j}")
    y = (1.0 + params.a_mu) * params.gravity_ratio
    return y ** j * 6.0 / (math.factorial(j) * math.factorial(j + 3))


def to_diagonal(t: TriangularTransform, theta: SpectralField) -> np.ndarray:
    """y(k) = (S⁻¹θ̂)(k) for k = 1..N."""
    return t.s_inv @ theta.resized(t.n_modes).positive[1:]


def from_diagonal(t: TriangularTransform, y: np.ndarray) -> SpectralField:
    positive = np.zeros(t.n_modes + 1, dtype=complex)
    positive[1:] = t.s @ np.asarray(y, dtype=complex)
    return SpectralField(positive)


@dataclass(frozen=True)
class EquivalenceCheck:
    norm_theta: float
    norm_y: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.norm_y <= self.bound * self.norm_theta and self.norm_theta <= self.bound * self.norm_y


def equivalence_check(t: TriangularTransform, theta: SpectralField, params: PhysicalParams,
                      weight: Optional[AnalyticWeight] = None, s: float = 0.0) -> EquivalenceCheck:
    """Compare ‖θ‖ and ‖S⁻¹θ‖ in F^{s,1}_ν restricted to k ≥ 1 against C_S."""
    theta = theta.resized(t.n_modes).mean_free()
    positive = np.zeros(t.n_modes + 1, dtype=complex)
    positive[1:] = to_diagonal(t, theta)
    return EquivalenceCheck(
        norm_theta=wiener_norm(theta, s, weight),
        norm_y=wiener_norm(SpectralField(positive), s, weight),
        bound=cs_bound(params),
    )
