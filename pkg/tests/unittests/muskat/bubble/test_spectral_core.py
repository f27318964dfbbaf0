import math

import numpy as np
import pytest

from muskat.bubble.spectral_core import (
    AnalyticWeight,
    ComplexSpectrum,
    SpectralField,
    analytic_nu,
    convolve,
    derivative,
    evaluate,
    forward_transform,
    grid,
    hilbert,
    inverse_transform,
    lambda_pow,
    mean_free_antiderivative,
    multiply,
    product_bound,
    product_factor,
    truncate,
    wiener_norm,
)


@pytest.fixture
def random_field():
    """Random field on the band 12 with a mean and decaying coefficients."""
    rng = np.random.default_rng(7)
    k = np.arange(13)
    return SpectralField((rng.standard_normal(13) + 1j * rng.standard_normal(13)) * np.exp(-0.4 * k))


class TestGrid:
    """Test suite for the periodic grid."""

    def test_points(self):
        """The grid starts at −π and is uniform."""
        np.testing.assert_allclose(grid(4), [-np.pi, -np.pi / 2, 0.0, np.pi / 2])

    @pytest.mark.parametrize("size", [0, 3, -4])
    def test_rejects_odd_or_empty(self, size):
        """Odd or nonpositive sizes are refused."""
        with pytest.raises(ValueError):
            grid(size)


class TestSpectralField:
    """Test suite for SpectralField."""

    def test_negative_modes_mirror_positive(self):
        """A negative key is stored as the conjugate of its positive partner."""
        field = SpectralField.from_modes({-2: 1j}, 3)
        assert field.coeff(2) == -1j
        assert field.coeff(-2) == 1j
        assert field.coeff(7) == 0

    def test_zero_mode_is_real(self):
        """The zero mode drops its imaginary part."""
        field = SpectralField([1.0 + 2.0j, 0.5])
        assert field.coeff(0) == 1.0

    def test_arithmetic(self):
        """Fields of different bands add after zero padding; scalars shift the mean."""
        a = SpectralField.from_modes({1: 1.0}, 1)
        b = SpectralField.from_modes({3: 2.0}, 3)
        total = a + b + 0.5
        assert total.n_modes == 3
        assert total.coeff(1) == 1.0
        assert total.coeff(3) == 2.0
        assert total.mean == 0.5
        assert (2.0 * a).coeff(1) == 2.0
        assert (-a).coeff(-1) == -1.0

    def test_complex_scaling_is_refused(self):
        """A complex factor would break the reality symmetry."""
        with pytest.raises(TypeError):
            SpectralField.from_modes({1: 1.0}, 2) * 1j

    def test_mode_outside_band(self):
        """Keys beyond n_modes are rejected."""
        with pytest.raises(ValueError):
            SpectralField.from_modes({5: 1.0}, 4)

    def test_resized(self):
        """Cutting drops the high modes and padding adds zeros."""
        field = SpectralField.from_modes({1: 1.0, 3: 1.0}, 3)
        assert field.resized(2).coeff(3) == 0
        assert field.resized(6).coeff(3) == 1.0
        assert field.resized(6).n_modes == 6

    def test_dict_round_trip(self):
        """to_dict and from_dict agree."""
        field = SpectralField.from_modes({0: 0.25, 2: 0.1 - 0.3j}, 4)
        restored = SpectralField.from_dict(field.to_dict())
        np.testing.assert_array_equal(restored.coeffs, field.coeffs)

    def test_from_dict_length_mismatch(self):
        """A coefficient list of the wrong length is refused."""
        with pytest.raises(ValueError):
            SpectralField.from_dict({"n_modes": 2, "re": [0.0, 1.0], "im": [0.0, 0.0, 0.0]})


class TestTransforms:
    """Test suite for the grid transforms."""

    def test_forward_cosine(self):
        """2cos(2α) has f̂(±2) = 1."""
        alpha = grid(16)
        field = forward_transform(2.0 * np.cos(2.0 * alpha), 4)
        assert field.coeff(2) == pytest.approx(1.0, abs=1e-14)
        assert field.coeff(1) == pytest.approx(0.0, abs=1e-14)
        assert field.mean == pytest.approx(0.0, abs=1e-14)

    def test_inverse_recovers_samples(self):
        """Band-limited samples come back unchanged."""
        alpha = grid(32)
        samples = 0.3 + np.sin(alpha) - 0.2 * np.cos(5.0 * alpha + 0.4)
        field = forward_transform(samples, 8)
        np.testing.assert_allclose(inverse_transform(field, 32), samples, atol=1e-14)

    def test_grid_too_coarse(self):
        """A grid must hold at least 2N+1 points."""
        with pytest.raises(ValueError):
            inverse_transform(SpectralField.zeros(8), 16)

    def test_evaluate_at_points(self):
        """Direct summation agrees with the closed form."""
        field = SpectralField.from_modes({1: 1.0}, 3)
        np.testing.assert_allclose(evaluate(field, [0.0, np.pi, 0.5]), [2.0, -2.0, 2.0 * np.cos(0.5)], atol=1e-14)

    def test_random_round_trip(self, random_field):
        """Grid values match direct summation and transform back to the same coefficients."""
        samples = inverse_transform(random_field, 40)
        np.testing.assert_allclose(samples, evaluate(random_field, grid(40)), atol=1e-12)
        back = forward_transform(samples, random_field.n_modes)
        assert np.max(np.abs(back.coeffs - random_field.coeffs)) < 1e-12


class TestMultipliers:
    """Test suite for Fourier multipliers."""

    def test_hilbert_of_cosine_is_sine(self):
        """H cos = sin, and the mean is removed."""
        field = SpectralField.from_modes({0: 3.0, 1: 0.5}, 2)
        alpha = grid(8)
        np.testing.assert_allclose(inverse_transform(hilbert(field), 8), np.sin(alpha), atol=1e-14)

    def test_lambda_pow(self):
        """Λ multiplies mode k by |k|^s."""
        field = SpectralField.from_modes({3: 1.0}, 4)
        assert lambda_pow(field, 1.0).coeff(3) == pytest.approx(3.0)
        assert lambda_pow(field, 2.0).coeff(-3) == pytest.approx(9.0)
        with pytest.raises(ValueError):
            lambda_pow(field, -1.0)

    def test_derivative(self):
        """d/dα of 2cos α is −2 sin α."""
        field = SpectralField.from_modes({1: 1.0}, 2)
        alpha = grid(8)
        np.testing.assert_allclose(inverse_transform(derivative(field), 8), -2.0 * np.sin(alpha), atol=1e-14)
        with pytest.raises(ValueError):
            derivative(field, 0)

    def test_lambda_cubed_through_hilbert(self, random_field):
        """Λ³θ = −∂_α H(θ_αα)."""
        composed = -derivative(hilbert(derivative(random_field, 2)))
        np.testing.assert_allclose(lambda_pow(random_field, 3.0).coeffs, composed.coeffs, atol=1e-10)

    def test_derivative_against_finite_differences(self, random_field):
        """Centered differences converge to the spectral derivative at second order."""
        points = np.array([-2.1, 0.3, 1.9])
        exact = evaluate(derivative(random_field), points)
        errors = []
        for h in (1e-2, 5e-3):
            centered = (evaluate(random_field, points + h) - evaluate(random_field, points - h)) / (2.0 * h)
            errors.append(np.max(np.abs(centered - exact)))
        assert 3.5 < errors[0] / errors[1] < 4.5

    def test_mean_free_antiderivative_vanishes_at_zero(self):
        """The primitive of −2 sin α that vanishes at 0 is 2cos α − 2."""
        field = SpectralField.from_modes({0: 5.0, 1: 1j}, 3)
        primitive = mean_free_antiderivative(field)
        assert primitive.coeff(1) == pytest.approx(1.0)
        assert primitive.mean == pytest.approx(-2.0)
        assert evaluate(primitive, [0.0])[0] == pytest.approx(0.0, abs=1e-14)

    def test_truncate(self):
        """Modes above the cut are zeroed; the band stays."""
        field = SpectralField.from_modes({1: 1.0, 2: 1.0, 3: 1.0}, 3)
        cut = truncate(field, 1)
        assert cut.n_modes == 3
        assert cut.coeff(2) == 0
        assert cut.coeff(1) == 1.0


class TestWienerNorm:
    """Test suite for wiener_norm."""

    @pytest.fixture
    def field(self):
        """0.5 + 2cos α − sin 2α."""
        return SpectralField.from_modes({0: 0.5, 1: 1.0, 2: 0.5j}, 2)

    def test_plain(self, field):
        """s = 0 includes the zero mode."""
        assert wiener_norm(field) == pytest.approx(3.5)

    def test_sobolev_weight(self, field):
        """s > 0 skips the zero mode and weighs |k|^s."""
        assert wiener_norm(field, 1.0) == pytest.approx(4.0)

    def test_analytic_weight(self, field):
        """e^{ν|k|} with ν = ν₀t/(1+t)."""
        weight = AnalyticWeight(nu0=1.0, t=1.0)
        assert weight.nu == pytest.approx(0.5)
        assert analytic_nu(AnalyticWeight(nu0=0.05, t=3.0)) == pytest.approx(0.0375)
        expected = 0.5 + 2.0 * math.exp(0.5) + math.exp(1.0)
        assert wiener_norm(field, 0.0, weight) == pytest.approx(expected)

    def test_embedding(self, random_field):
        """For mean-free f the norm grows with s."""
        f = random_field.mean_free()
        norms = [wiener_norm(f, s) for s in (0.0, 0.5, 1.0, 1.5, 2.0)]
        assert all(a <= b for a, b in zip(norms, norms[1:]))

    @pytest.mark.parametrize("s1, s2, sigma", [(0.0, 2.0, 0.25), (0.5, 3.0, 0.5), (1.0, 1.5, 0.8)])
    def test_interpolation(self, random_field, s1, s2, sigma):
        """‖f‖_s ≤ ‖f‖_{s₁}^{1−σ}‖f‖_{s₂}^σ at s = (1−σ)s₁ + σs₂."""
        f = random_field.mean_free()
        weight = AnalyticWeight(nu0=0.3, t=2.0)
        s = (1.0 - sigma) * s1 + sigma * s2
        bound = wiener_norm(f, s1, weight) ** (1.0 - sigma) * wiener_norm(f, s2, weight) ** sigma
        assert wiener_norm(f, s, weight) <= bound * (1.0 + 1e-12)

    def test_invalid_arguments(self, field):
        """Negative exponents and weights are refused."""
        with pytest.raises(ValueError):
            wiener_norm(field, -0.5)
        with pytest.raises(ValueError):
            AnalyticWeight(nu0=-1.0)


class TestConvolve:
    """Test suite for convolve."""

    def test_square_of_cosine(self):
        """cos²α = ½ + ½cos 2α."""
        field = SpectralField.from_modes({1: 0.5}, 1)
        product = convolve(field, field, 2)
        assert product.mean == pytest.approx(0.5)
        assert product.coeff(2) == pytest.approx(0.25)
        assert product.coeff(1) == pytest.approx(0.0, abs=1e-15)

    def test_default_band_truncates(self):
        """Without an output band the product is cut to the larger input band."""
        field = SpectralField.from_modes({1: 0.5}, 1)
        assert convolve(field, field).n_modes == 1

    def test_multiply_keeps_every_frequency(self):
        """(2cos α)³ = 2cos 3α + 6cos α, on the band 3."""
        g = SpectralField.from_modes({1: 1.0}, 1)
        cube = multiply([g, g, g])
        assert cube.n_modes == 3
        assert cube.coeff(3) == pytest.approx(1.0)
        assert cube.coeff(1) == pytest.approx(3.0)
        assert abs(cube.mean) < 1e-15

    def test_product_bound_values(self):
        """For g = 2cos α: Π‖g‖ = 4 and, at s = 2, b(2, 2)·2·(2·2) = 16."""
        g = SpectralField.from_modes({1: 1.0}, 1)
        assert product_bound([g, g]) == pytest.approx(4.0)
        assert product_bound([g, g], 2.0) == pytest.approx(16.0)
        assert wiener_norm(multiply([g, g])) == pytest.approx(4.0)

    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 2.5])
    def test_product_inequality(self, n, s):
        """The weighted norm of a product of random fields stays under its bound."""
        rng = np.random.default_rng(100 * n + int(10 * s))
        weight = AnalyticWeight(nu0=0.2, t=1.0)
        for _ in range(5):
            factors = [
                SpectralField((rng.standard_normal(6) + 1j * rng.standard_normal(6)) * np.exp(-np.arange(6)))
                for _ in range(n)
            ]
            assert wiener_norm(multiply(factors), s, weight) <= product_bound(factors, s, weight) * (1.0 + 1e-12)

    def test_product_factor(self):
        """b(n, s) is 1 up to s = 1 and n^{s−1} beyond."""
        assert product_factor(4, 0.5) == 1.0
        assert product_factor(4, 3.0) == pytest.approx(16.0)


class TestComplexSpectrum:
    """Test suite for ComplexSpectrum."""

    def test_from_samples_of_tangent(self):
        """e^{iα} has a single coefficient at k = 1."""
        spectrum = ComplexSpectrum.from_samples(np.exp(1j * grid(8)))
        assert spectrum.coeff(1) == pytest.approx(1.0)
        assert abs(spectrum.coeff(-1)) < 1e-15
        np.testing.assert_allclose(spectrum.samples(8), np.exp(1j * grid(8)), atol=1e-14)

    def test_real_and_imaginary_parts(self):
        """Re e^{iα} = cos α and Im e^{iα} = sin α."""
        spectrum = ComplexSpectrum([0.0, 0.0, 1.0])
        assert spectrum.real_part().coeff(1) == pytest.approx(0.5)
        assert spectrum.imag_part().coeff(1) == pytest.approx(-0.5j)

    def test_antiderivative_of_constant(self):
        """The lifted primitive of 1 is α."""
        spectrum = ComplexSpectrum([0.0, 1.0, 0.0])
        np.testing.assert_allclose(spectrum.antiderivative_samples(8), grid(8), atol=1e-15)

    def test_evaluate(self):
        """Σ c_k e^{ikx} at arbitrary points."""
        spectrum = ComplexSpectrum([0.0, 0.0, 1.0])
        assert spectrum.evaluate([0.3])[0] == pytest.approx(np.exp(0.3j))

    def test_even_length_refused(self):
        """k = −N..N always holds an odd count."""
        with pytest.raises(ValueError):
            ComplexSpectrum([1.0, 2.0])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
