"""Recovery of the first modes θ̂(±1) from the closed-curve constraint.

With θ̂(1) = x₁ + i x₂ the first modes contribute 2(x₁cos α − x₂ sin α) to the angle, and the
curve closes exactly when g(u, x) = (∫cos ψ, ∫sin ψ) vanishes for ψ = α + 2(x₁cos α − x₂ sin α) + u.
D_x g(0, 0)·y = 2π(y₂, y₁), so the frozen-Jacobian iterate is x ← x − (g₂, g₁)/2π.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import AdmissibilityError, ConvergenceError
from .spectral_core import SpectralField, grid, inverse_transform, wiener_norm

RADIUS_LIMIT = 0.5 * math.log(1.25)


def ci_constant(r: float) -> float:
    """C_I(r) = (1/r)·2e^r(e^r−1)/(1 − 4(e^{2r}−1)), increasing on (0, ½log(5/4)).

    Raises:
        AdmissibilityError: If r lies outside (0, ½log(5/4)).
    """
    if not 0 < r < RADIUS_LIMIT:
        raise AdmissibilityError(f"r={r} outside (0, {RADIUS_LIMIT:.6f})")
    return 2.0 * math.exp(r) * math.expm1(r) / (r * (1.0 - 4.0 * math.expm1(2.0 * r)))


@dataclass(frozen=True)
class ConstraintProblem:
    """Higher modes u = θ̃ and the radius r of the ball the solution is sought in.

    Attributes:
        theta_tilde: Angle with θ̃̂(0) = θ̃̂(±1) = 0.
        radius_r: r with ‖θ̃‖_{F^{0,1}} < r < ½log(5/4).
    """
    theta_tilde: SpectralField
    radius_r: float

    def __post_init__(self):
        if self.theta_tilde.coeff(0) != 0 or self.theta_tilde.coeff(1) != 0:
            raise ValueError("theta_tilde must not carry the modes 0 and ±1")
        if not 0 < self.radius_r < RADIUS_LIMIT:
            raise AdmissibilityError(f"r={self.radius_r} outside (0, {RADIUS_LIMIT:.6f})")
        norm = wiener_norm(self.theta_tilde)
        if norm >= self.radius_r:
            raise AdmissibilityError(
                f"|theta_tilde|_F01={norm:.6f} is not below r={self.radius_r:.6f}"
            )

    @classmethod
    def for_theta(cls, theta: SpectralField, radius_r: Optional[float] = None) -> "ConstraintProblem":
        """Strip modes 0 and ±1 from ``theta``; r defaults to the midpoint of (‖θ̃‖, ½log(5/4))."""
        positive = theta.positive.copy()
        positive[: min(2, positive.size)] = 0.0
        theta_tilde = SpectralField(positive)
        if radius_r is None:
            norm = wiener_norm(theta_tilde)
            if norm >= RADIUS_LIMIT:
                raise AdmissibilityError(
                    f"|theta_tilde|_F01={norm:.6f} exceeds the solvable radius {RADIUS_LIMIT:.6f}"
                )
            radius_r = 0.5 * (norm + RADIUS_LIMIT)
        return cls(theta_tilde, radius_r)

    @property
    def bound(self) -> float:
        """C_I(r)·r·Σ_{|k|≥2}|θ̂(k)|, the admissible size of |θ̂(1)| + |θ̂(−1)|."""
        return ci_constant(self.radius_r) * self.radius_r * wiener_norm(self.theta_tilde)


@dataclass(frozen=True)
class FirstModesSolution:
    x: Tuple[float, float]
    iterations: int
    residual: float
    increments: List[float] = field(default_factory=list)

    @property
    def theta_hat_one(self) -> complex:
        return complex(self.x[0], self.x[1])


def _quadrature_size(u: SpectralField) -> int:
    return max(4 * u.n_modes, 16)


def g_map(u: SpectralField, x: Tuple[float, float], grid_size: Optional[int] = None) -> Tuple[float, float]:
    """(∫cos ψ dα, ∫sin ψ dα) by the trapezoidal rule on the periodic grid."""
    grid_size = grid_size or _quadrature_size(u)
    alpha = grid(grid_size)
    psi = alpha + 2.0 * (x[0] * np.cos(alpha) - x[1] * np.sin(alpha)) + inverse_transform(u, grid_size)
    weight = 2.0 * np.pi / grid_size
    return float(weight * np.sum(np.cos(psi))), float(weight * np.sum(np.sin(psi)))


def iterate_first_modes(problem: ConstraintProblem, tol: float = 1e-13, max_iter: int = 100,
                        grid_size: Optional[int] = None) -> FirstModesSolution:
    """Frozen-Jacobian contraction for x = (Re θ̂(1), Im θ̂(1)) starting from x = 0.

    Raises:
        ConvergenceError: If |g| stays above ``tol`` after ``max_iter`` sweeps.
    """
    u = problem.theta_tilde
    grid_size = grid_size or _quadrature_size(u)
    x1, x2 = 0.0, 0.0
    increments = []
    g1, g2 = g_map(u, (x1, x2), grid_size)
    for iteration in range(max_iter + 1):
        residual = math.hypot(g1, g2)
        if residual < tol:
            logging.debug('First modes converged after %d sweeps, |g|=%.3e', iteration, residual)
            return FirstModesSolution((x1, x2), iteration, residual, increments)
        if iteration == max_iter:
            break
        dx1, dx2 = g2 / (2.0 * np.pi), g1 / (2.0 * np.pi)
        x1, x2 = x1 - dx1, x2 - dx2
        increments.append(math.hypot(dx1, dx2))
        g1, g2 = g_map(u, (x1, x2), grid_size)
    raise ConvergenceError(
        f"first-mode contraction did not reach |g| < {tol:.1e} in {max_iter} sweeps "
        f"(|g|={residual:.3e}); the higher modes are too large",
        iterations=max_iter,
        increment=increments[-1] if increments else math.nan,
    )


def solve_first_modes(problem: ConstraintProblem, tol: float = 1e-13, max_iter: int = 100,
                      grid_size: Optional[int] = None) -> Tuple[float, float]:
    """(Re θ̂(1), Im θ̂(1)) closing the curve whose higher modes are ``problem.theta_tilde``."""
    return iterate_first_modes(problem, tol, max_iter, grid_size).x


def assemble_theta(theta_tilde: SpectralField, x: Tuple[float, float]) -> SpectralField:
    positive = theta_tilde.positive.copy()
    positive[1] = complex(x[0], x[1])
    return SpectralField(positive)


def project_first_modes(theta: SpectralField, tol: float = 1e-13, max_iter: int = 100) -> SpectralField:
    """Replace θ̂(±1) of ``theta`` by the values that close the curve."""
    problem = ConstraintProblem.for_theta(theta)
    x = solve_first_modes(problem, tol, max_iter)
    return assemble_theta(problem.theta_tilde, x)
