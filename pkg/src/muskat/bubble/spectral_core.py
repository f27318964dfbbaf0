"""Fourier representation of 2π-periodic fields on [−π, π).

Conventions used throughout the package:

* grid points are α_j = −π + 2πj/G for j = 0..G−1 (G is the grid size, always even);
* Fourier coefficients are f̂(k) = (1/2π)∫ f(α) e^{−ikα} dα, approximated by
  (1/G) Σ_j f(α_j) e^{−ikα_j};
* a field with ``n_modes = N`` carries the frequencies k = −N..N.
"""
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence

import numpy as np


def grid(grid_size: int) -> np.ndarray:
    """Uniform grid α_j = −π + 2πj/G on [−π, π)."""
    if grid_size <= 0 or grid_size % 2:
        raise ValueError(f"grid size must be a positive even integer, got {grid_size}")
    return -np.pi + 2.0 * np.pi * np.arange(grid_size) / grid_size


def _alternating_sign(k: np.ndarray) -> np.ndarray:
    # e^{ikπ} for the grid offset −π
    return np.where(k % 2 == 0, 1.0, -1.0)


def _check_grid(grid_size: int, n_modes: int) -> None:
    if grid_size < 2 * n_modes + 1:
        raise ValueError(
            f"grid of {grid_size} points is too coarse for {n_modes} modes "
            f"(needs at least {2 * n_modes + 1})"
        )


class SpectralField:
    """Fourier coefficients of a real 2π-periodic function.

    Only the frequencies k ≥ 0 are stored authoritatively; the negative ones are
    mirrored as conj(f̂(k)) on construction, so the reality invariant holds structurally.
    Instances are immutable.

    Attributes:
        n_modes: Largest retained frequency N.
    """

    __slots__ = ("_positive", "_full")

    def __init__(self, positive):
        positive = np.array(positive, dtype=complex).reshape(-1)
        if positive.size == 0:
            raise ValueError("a spectral field needs at least the zero mode")
        positive[0] = positive[0].real
        positive.setflags(write=False)
        full = np.concatenate([np.conj(positive[:0:-1]), positive])
        full.setflags(write=False)
        self._positive = positive
        self._full = full

    @classmethod
    def zeros(cls, n_modes: int) -> "SpectralField":
        return cls(np.zeros(n_modes + 1, dtype=complex))

    @classmethod
    def constant(cls, value: float, n_modes: int) -> "SpectralField":
        positive = np.zeros(n_modes + 1, dtype=complex)
        positive[0] = value
        return cls(positive)

    @classmethod
    def from_modes(cls, modes: Mapping[int, complex], n_modes: int) -> "SpectralField":
        """Build a field from a sparse {k: f̂(k)} map.

        Negative keys are conjugated onto their positive partner; if both k and −k are
        given, k wins.
        """
        positive = np.zeros(n_modes + 1, dtype=complex)
        for k, value in sorted(modes.items(), key=lambda item: item[0] >= 0):
            if abs(k) > n_modes:
                raise ValueError(f"mode {k} exceeds n_modes={n_modes}")
            positive[abs(k)] = value if k >= 0 else np.conj(value)
        return cls(positive)

    @property
    def n_modes(self) -> int:
        return self._positive.size - 1

    @property
    def positive(self) -> np.ndarray:
        """Read-only view of f̂(k) for k = 0..N."""
        return self._positive

    @property
    def coeffs(self) -> np.ndarray:
        """Read-only dense array of f̂(k) for k = −N..N (index k + N)."""
        return self._full

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(-self.n_modes, self.n_modes + 1)

    @property
    def mean(self) -> float:
        return float(self._positive[0].real)

    def coeff(self, k: int) -> complex:
        if abs(k) > self.n_modes:
            return 0j
        return complex(self._full[k + self.n_modes])

    def resized(self, n_modes: int) -> "SpectralField":
        """Zero-pad or cut the field to ``n_modes``."""
        positive = np.zeros(n_modes + 1, dtype=complex)
        keep = min(n_modes, self.n_modes) + 1
        positive[:keep] = self._positive[:keep]
        return SpectralField(positive)

    def with_mean(self, value: float) -> "SpectralField":
        positive = self._positive.copy()
        positive[0] = value
        return SpectralField(positive)

    def mean_free(self) -> "SpectralField":
        return self.with_mean(0.0)

    def _aligned(self, other: "SpectralField"):
        n = max(self.n_modes, other.n_modes)
        return self.resized(n).positive, other.resized(n).positive

    def __add__(self, other):
        if isinstance(other, SpectralField):
            a, b = self._aligned(other)
            return SpectralField(a + b)
        if np.isscalar(other):
            return self.with_mean(self.mean + float(other))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, SpectralField):
            a, b = self._aligned(other)
            return SpectralField(a - b)
        if np.isscalar(other):
            return self.with_mean(self.mean - float(other))
        return NotImplemented

    def __neg__(self):
        return SpectralField(-self._positive)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField) or not np.isscalar(scalar) or np.iscomplexobj(scalar):
            return NotImplemented
        return SpectralField(self._positive * float(scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"SpectralField(n_modes={self.n_modes})"

    def to_dict(self) -> Dict:
        return {
            "n_modes": self.n_modes,
            "re": [float(c.real) for c in self._positive],
            "im": [float(c.imag) for c in self._positive],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SpectralField":
        n_modes = int(data["n_modes"])
        re, im = list(data["re"]), list(data["im"])
        if len(re) != n_modes + 1 or len(im) != n_modes + 1:
            raise ValueError(
                f"expected {n_modes + 1} coefficients for n_modes={n_modes}, "
                f"got re={len(re)} im={len(im)}"
            )
        return cls(np.asarray(re) + 1j * np.asarray(im))


class ComplexSpectrum:
    """Fourier coefficients of a complex-valued periodic function over k = −N..N.

    Used for quantities such as e^{i(α+θ)} or conj(BR) that carry no reality symmetry.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs):
        coeffs = np.array(coeffs, dtype=complex).reshape(-1)
        if coeffs.size % 2 == 0:
            raise ValueError("a complex spectrum stores an odd number of coefficients (k = −N..N)")
        coeffs.setflags(write=False)
        self._coeffs = coeffs

    @classmethod
    def from_samples(cls, samples, n_modes: Optional[int] = None) -> "ComplexSpectrum":
        samples = np.asarray(samples, dtype=complex)
        size = samples.size
        if n_modes is None:
            n_modes = size // 2 - 1
        _check_grid(size, n_modes)
        spectrum = np.fft.fft(samples) / size
        k = np.arange(-n_modes, n_modes + 1)
        return cls(_alternating_sign(k) * spectrum[k % size])

    @property
    def n_modes(self) -> int:
        return self._coeffs.size // 2

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(-self.n_modes, self.n_modes + 1)

    def coeff(self, k: int) -> complex:
        if abs(k) > self.n_modes:
            return 0j
        return complex(self._coeffs[k + self.n_modes])

    def samples(self, grid_size: int) -> np.ndarray:
        _check_grid(grid_size, self.n_modes)
        k = self.wavenumbers
        spectrum = np.zeros(grid_size, dtype=complex)
        spectrum[k % grid_size] = _alternating_sign(k) * self._coeffs
        return grid_size * np.fft.ifft(spectrum)

    def real_part(self) -> SpectralField:
        n = self.n_modes
        pos, neg = self._coeffs[n:], self._coeffs[n::-1]
        return SpectralField(0.5 * (pos + np.conj(neg)))

    def imag_part(self) -> SpectralField:
        n = self.n_modes
        pos, neg = self._coeffs[n:], self._coeffs[n::-1]
        return SpectralField((pos - np.conj(neg)) / 2j)

    def evaluate(self, points) -> np.ndarray:
        """Σ_k c_k e^{ikx} at arbitrary points."""
        points = np.asarray(points, dtype=float)
        phases = np.exp(1j * np.multiply.outer(points, self.wavenumbers))
        return phases @ self._coeffs

    def antiderivative_samples(self, grid_size: int) -> np.ndarray:
        """Samples of the lifted primitive ∫₀^α on the grid.

        The primitive is c₀α + Σ_{k≠0} c_k (e^{ikα} − 1)/(ik); it is periodic only when c₀ = 0.
        """
        k = self.wavenumbers
        periodic = np.zeros_like(self._coeffs)
        nonzero = k != 0
        periodic[nonzero] = self._coeffs[nonzero] / (1j * k[nonzero])
        values = ComplexSpectrum(periodic).samples(grid_size) - periodic.sum()
        return values + self.coeff(0) * grid(grid_size)

    def __repr__(self) -> str:
        return f"ComplexSpectrum(n_modes={self.n_modes})"


@dataclass(frozen=True)
class AnalyticWeight:
    """Time-dependent analytic weight e^{ν(t)|k|} with ν(t) = ν₀ t/(1+t)."""
    nu0: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if self.nu0 < 0 or self.t < 0:
            raise ValueError(f"analytic weight needs nu0 >= 0 and t >= 0, got nu0={self.nu0}, t={self.t}")

    @property
    def nu(self) -> float:
        return analytic_nu(self)


def analytic_nu(weight: AnalyticWeight) -> float:
    return weight.nu0 * weight.t / (1.0 + weight.t)


def forward_transform(samples, n_modes: Optional[int] = None) -> SpectralField:
    """Fourier coefficients of real grid samples.

    Args:
        samples: Real values on the grid of ``grid(len(samples))``.
        n_modes: Number of retained modes N; defaults to the largest alias-free choice.

    Returns:
        SpectralField with f̂(k) = (1/G) Σ_j samples_j e^{−ikα_j} for |k| ≤ N.

    Raises:
        ValueError: If the grid holds fewer than 2N+1 points.
    """
    samples = np.asarray(samples, dtype=float)
    size = samples.size
    if n_modes is None:
        n_modes = (size - 1) // 2
    _check_grid(size, n_modes)
    spectrum = np.fft.rfft(samples) / size
    k = np.arange(n_modes + 1)
    return SpectralField(_alternating_sign(k) * spectrum[: n_modes + 1])


def inverse_transform(field: SpectralField, grid_size: int) -> np.ndarray:
    """Evaluate a field on the grid of ``grid_size`` points.

    Raises:
        ValueError: If the grid holds fewer than 2N+1 points.
    """
    _check_grid(grid_size, field.n_modes)
    k = np.arange(field.n_modes + 1)
    half = np.zeros(grid_size // 2 + 1, dtype=complex)
    half[: field.n_modes + 1] = _alternating_sign(k) * field.positive
    return np.fft.irfft(half * grid_size, n=grid_size)


def hilbert(field: SpectralField) -> SpectralField:
    """Periodic Hilbert transform, multiplier −i·sgn(k)."""
    positive = -1j * field.positive
    positive[0] = 0.0
    return SpectralField(positive)


def lambda_pow(field: SpectralField, s: float) -> SpectralField:
    """Fractional derivative Λ^s, multiplier |k|^s."""
    if s < 0:
        raise ValueError(f"lambda_pow needs s >= 0, got {s}")
    k = np.arange(field.n_modes + 1, dtype=float)
    return SpectralField(field.positive * k ** s)


def derivative(field: SpectralField, order: int = 1) -> SpectralField:
    if order < 1:
        raise ValueError(f"derivative order must be positive, got {order}")
    k = np.arange(field.n_modes + 1)
    return SpectralField(field.positive * (1j * k) ** order)


def mean_free_antiderivative(field: SpectralField) -> SpectralField:
    """α ↦ ∫₀^α f − (α/2π)∫f, the primitive of the mean-free part vanishing at α = 0."""
    k = np.arange(1, field.n_modes + 1)
    positive = np.zeros(field.n_modes + 1, dtype=complex)
    positive[1:] = -1j * field.positive[1:] / k
    # Σ_{j≠0} (i/j) f̂(j) folds to a real sum over j ≥ 1
    positive[0] = -2.0 * math.fsum((field.positive[1:].imag / k)[::-1])
    return SpectralField(positive)


def wiener_norm(field: SpectralField, s: float = 0.0, weight: Optional[AnalyticWeight] = None) -> float:
    """Weighted Wiener-algebra norm Σ_{k≠0} e^{ν|k|}|k|^s|f̂(k)|.

    The k = 0 term is included when s = 0. Terms are accumulated from the highest
    frequency down with exactly rounded summation, so the value does not depend on
    the platform's summation order.

    Args:
        field: Field to measure.
        s: Sobolev-type exponent, s ≥ 0.
        weight: Optional analytic weight; ν = 0 when omitted.

    Returns:
        The norm as a float.
    """
    if s < 0:
        raise ValueError(f"wiener_norm needs s >= 0, got {s}")
    nu = analytic_nu(weight) if weight is not None else 0.0
    k = np.arange(field.n_modes, 0, -1, dtype=float)
    magnitudes = np.abs(field.positive[:0:-1])
    terms = 2.0 * np.exp(nu * k) * k ** s * magnitudes
    total = math.fsum(terms)
    if s == 0:
        total = math.fsum([total, abs(field.positive[0])])
    return total


def truncate(field: SpectralField, n_cut: int) -> SpectralField:
    """High-frequency cut-off 1_{|k| ≤ n_cut} f̂(k); the band of the field is kept."""
    if n_cut < 0:
        raise ValueError(f"cut-off must be nonnegative, got {n_cut}")
    positive = field.positive.copy()
    positive[n_cut + 1:] = 0.0
    return SpectralField(positive)


def convolve(f: SpectralField, g: SpectralField, n_modes: Optional[int] = None) -> SpectralField:
    """Coefficients of the pointwise product f·g.

    The product is formed on a grid large enough to hold every frequency up to
    N_f + N_g, so its spectrum is exact before ``truncate`` cuts it to ``n_modes``
    (default max(N_f, N_g)).
    """
    if n_modes is None:
        n_modes = max(f.n_modes, g.n_modes)
    size = 2 * (f.n_modes + g.n_modes + 1)
    size = max(size, 2 * n_modes + 2)
    product = inverse_transform(f, size) * inverse_transform(g, size)
    return truncate(forward_transform(product), n_modes).resized(n_modes)


def multiply(factors: Sequence[SpectralField]) -> SpectralField:
    """Untruncated product of several fields, on the band Σ N_j."""
    if not factors:
        raise ValueError("multiply needs at least one factor")
    result = factors[0]
    for factor in factors[1:]:
        result = convolve(result, factor, result.n_modes + factor.n_modes)
    return result


def product_factor(n: int, s: float) -> float:
    """b(n, s): 1 for 0 ≤ s ≤ 1 and n^{s−1} for s > 1."""
    if s < 0:
        raise ValueError(f"product_factor needs s >= 0, got {s}")
    return 1.0 if s <= 1 else float(n) ** (s - 1)



def product_bound(factors: Sequence[SpectralField], s: float = 0.0,
                  weight: Optional[AnalyticWeight] = None) -> float:
    """Right-hand side of the Wiener-algebra product inequality for g₁⋯gₙ.

    For s = 0 this is Π‖g_j‖_{F^{0,1}_ν}; for s > 0 it is
    b(n, s)·Σ_j ‖g_j‖_{Ḟ^{s,1}_ν}·Π_{k≠j}‖g_k‖_{F^{0,1}_ν}.
    """
    plain = [wiener_norm(g, 0.0, weight) for g in factors]
    if s == 0:
        return math.prod(plain)
    terms = []
    for j, g in enumerate(factors):
        terms.append(wiener_norm(g, s, weight) * math.prod(plain[:j] + plain[j + 1:]))
    return product_factor(len(factors), s) * math.fsum(terms)


def evaluate(field: SpectralField, points) -> np.ndarray:
    """Values of a field at arbitrary points, by direct summation of its Fourier series."""
    return ComplexSpectrum(field.coeffs).evaluate(points).real
