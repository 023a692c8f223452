import numpy as np
import pytest

from cransim import sample_pilot_matrix, synthesize


def rng(seed=0):
    return np.random.default_rng(seed)


class TestSamplePilotMatrix:
    def test_requested_dimensions(self):
        p = sample_pilot_matrix(81, 500, rng())
        assert p.entries.shape == (81, 500)
        assert p.n_pilots == 81
        assert p.n_rrh == 500

    def test_standard_normal_moments(self):
        p = sample_pilot_matrix(100, 500, rng(1))
        flat = p.entries.ravel()
        assert abs(flat.mean()) <= 3.0 / np.sqrt(flat.size)
        assert flat.var(ddof=1) == pytest.approx(1.0, rel=0.03)

    def test_gram_averages_to_identity_times_length(self):
        # E(P^T P) = n_pilots * I, checked entrywise over repeated draws
        g = rng(2)
        n_pilots, n = 20, 8
        acc = np.zeros((n, n))
        draws = 1000
        for _ in range(draws):
            e = sample_pilot_matrix(n_pilots, n, g).entries
            acc += e.T @ e
        acc /= draws
        target = n_pilots * np.eye(n)
        assert np.all(np.abs(acc - target) <= 0.05 * n_pilots)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            sample_pilot_matrix(0, 5, rng())
        with pytest.raises(ValueError):
            sample_pilot_matrix(5, 0, rng())


class TestSynthesize:
    def test_single_column_noiseless(self):
        p = sample_pilot_matrix(6, 1, rng(3))
        h = np.array([2.0 - 1.0j])
        sig = synthesize(p, h, 0.0, rng())
        np.testing.assert_allclose(sig.y, h[0] * p.entries[:, 0])

    def test_zero_channel_zero_noise(self):
        p = sample_pilot_matrix(4, 3, rng(4))
        sig = synthesize(p, np.zeros(3, dtype=complex), 0.0, rng())
        assert np.all(sig.y == 0)

    def test_noiseless_residual_exactly_zero(self):
        p = sample_pilot_matrix(10, 7, rng(5))
        h = rng(6).standard_normal(7) + 1j * rng(7).standard_normal(7)
        sig = synthesize(p, h, 0.0, rng())
        assert np.linalg.norm(sig.y - p.entries @ h) == 0.0

    def test_noise_variance_calibrated(self):
        p = sample_pilot_matrix(10, 2, rng(8))
        h = np.zeros(2, dtype=complex)
        g = rng(9)
        noise_var = 0.37
        samples = np.concatenate(
            [synthesize(p, h, noise_var, g).y for _ in range(10_000)]
        )
        assert np.mean(np.abs(samples) ** 2) == pytest.approx(noise_var, rel=0.03)
        # circular symmetry: equal real/imag power
        assert np.mean(samples.real**2) == pytest.approx(noise_var / 2, rel=0.05)

    def test_linear_in_channel_at_fixed_noise(self):
        p = sample_pilot_matrix(12, 5, rng(10))
        h1 = rng(11).standard_normal(5) + 1j * rng(11).standard_normal(5)
        h2 = rng(12).standard_normal(5) - 2j * rng(13).standard_normal(5)
        noise_var = 0.2
        y_sum = synthesize(p, h1 + h2, noise_var, rng(99)).y
        y1 = synthesize(p, h1, noise_var, rng(99)).y  # same noise stream
        y2 = synthesize(p, h2, 0.0, rng()).y
        np.testing.assert_allclose(y_sum, y1 + y2, rtol=1e-12, atol=1e-12)

    def test_dimension_mismatch(self):
        p = sample_pilot_matrix(4, 3, rng())
        with pytest.raises(ValueError):
            synthesize(p, np.zeros(5, dtype=complex), 0.0, rng())

    def test_negative_noise_rejected(self):
        p = sample_pilot_matrix(4, 3, rng())
        with pytest.raises(ValueError):
            synthesize(p, np.zeros(3, dtype=complex), -0.1, rng())
