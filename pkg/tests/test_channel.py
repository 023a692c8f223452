import math

import numpy as np
import pytest
from scipy import integrate

from cransim import (
    FadingModel,
    Scenario,
    SingularGeometryError,
    draw_channels,
    fading_moment,
    residual_norm_sq,
    residual_power_expected,
    sample_uniform_deployment,
    select_support,
    simulate_interference_power,
)
from cransim.geometry import Deployment, Window


def rng(seed=0):
    return np.random.default_rng(seed)


def fixed_deployment(points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return Deployment(pts, np.zeros(2), 1.0, Window.square(10_000.0))


class TestFadingMoment:
    @pytest.mark.parametrize("alpha", [2.5, 4.0, 8.0])
    def test_rayleigh_matches_quadrature(self, alpha):
        # |c|^2 ~ exponential(1): E x^(2/alpha) by adaptive quadrature
        oracle, _ = integrate.quad(
            lambda x: x ** (2.0 / alpha) * math.exp(-x), 0, np.inf
        )
        assert fading_moment(FadingModel.rayleigh(), alpha) == pytest.approx(
            oracle, rel=1e-9
        )

    def test_rayleigh_alpha_four_is_gamma_three_halves(self):
        assert fading_moment(FadingModel.rayleigh(), 4.0) == pytest.approx(
            math.gamma(1.5), rel=1e-14
        )

    def test_deterministic_is_one(self):
        for alpha in (2.5, 4.0, 17.0):
            assert fading_moment(FadingModel.deterministic(), alpha) == 1.0

    def test_lognormal_zero_spread_is_one(self):
        assert fading_moment(FadingModel.lognormal(0.0), 4.0) == 1.0

    def test_lognormal_matches_quadrature(self):
        model = FadingModel.lognormal(8.0)
        sig = 8.0 * math.log(10.0) / 20.0
        alpha = 3.5
        # amplitude exp(sig Z - sig^2); integrate |c|^(4/alpha) over the normal law
        oracle, _ = integrate.quad(
            lambda z: math.exp(
                (4.0 / alpha) * (sig * z - sig * sig) - z * z / 2.0
            )
            / math.sqrt(2 * math.pi),
            -np.inf,
            np.inf,
        )
        assert fading_moment(model, alpha) == pytest.approx(oracle, rel=1e-9)

    def test_rejects_alpha_at_most_two(self):
        with pytest.raises(ValueError):
            fading_moment(FadingModel.rayleigh(), 2.0)
        with pytest.raises(ValueError):
            fading_moment(FadingModel.rayleigh(), 1.5)

    def test_rayleigh_moment_shape_toward_one(self):
        # dips below 1 with a minimum near alpha ~ 4.3, then climbs back to 1
        grid = [2.5, 3.0, 4.0, 6.0, 8.0]
        vals = [fading_moment(FadingModel.rayleigh(), a) for a in grid]
        assert all(0.88 < v < 1.0 for v in vals)
        assert vals[0] > vals[1] > vals[2]  # decreasing left of the minimum
        assert vals[2] < vals[3] < vals[4]  # increasing right of it
        assert fading_moment(FadingModel.rayleigh(), 1000.0) == pytest.approx(
            1.0, abs=2e-3
        )

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            FadingModel("rician")


class TestFadingSamples:
    @pytest.mark.parametrize(
        "model",
        [FadingModel.rayleigh(), FadingModel.deterministic(), FadingModel.lognormal(6.0)],
    )
    def test_zero_mean_unit_power(self, model):
        c = model.sample(200_000, rng(1))
        assert abs(c.mean()) < 0.01
        assert np.mean(np.abs(c) ** 2) == pytest.approx(1.0, rel=0.02)

    @pytest.mark.parametrize(
        "model",
        [FadingModel.rayleigh(), FadingModel.deterministic(), FadingModel.lognormal(6.0)],
    )
    def test_power_samples_match_amplitude_law(self, model):
        p = model.sample_power(200_000, rng(2))
        c = model.sample(200_000, rng(3))
        assert p.mean() == pytest.approx(np.mean(np.abs(c) ** 2), rel=0.02)


class TestDrawChannels:
    def test_unit_modulus_at_distance_two(self):
        d = fixed_deployment([[2.0, 0.0]])
        ch = draw_channels(d, FadingModel.deterministic(), 4.0, rng())
        assert abs(ch.gains[0]) == pytest.approx(0.25, rel=1e-12)

    def test_distance_one_gives_raw_coefficient(self):
        d = fixed_deployment([[1.0, 0.0]])
        g = rng(4)
        ch = draw_channels(d, FadingModel.rayleigh(), 4.0, g)
        c = FadingModel.rayleigh().sample(1, rng(4))
        assert ch.gains[0] == pytest.approx(c[0])

    def test_mean_square_gain_follows_path_loss(self):
        alpha, dist = 3.0, 2.5
        d = fixed_deployment([[dist, 0.0]] * 10_000)
        ch = draw_channels(d, FadingModel.rayleigh(), alpha, rng(5))
        assert np.mean(np.abs(ch.gains) ** 2) == pytest.approx(
            dist**-alpha, rel=0.05
        )

    def test_zero_distance_raises(self):
        d = fixed_deployment([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(SingularGeometryError):
            draw_channels(d, FadingModel.rayleigh(), 4.0, rng())

    def test_exclusion_radius(self):
        d = fixed_deployment([[0.05, 0.0]])
        with pytest.raises(SingularGeometryError):
            draw_channels(d, FadingModel.rayleigh(), 4.0, rng(), exclusion_radius=0.1)

    def test_rejects_alpha_at_most_two(self):
        d = fixed_deployment([[1.0, 0.0]])
        with pytest.raises(ValueError):
            draw_channels(d, FadingModel.rayleigh(), 2.0, rng())


class TestSelectSupport:
    def test_example_moduli(self):
        support, complement = select_support([3.0, -1.0, 2.0j], 2)
        np.testing.assert_array_equal(support, [0, 2])
        np.testing.assert_array_equal(complement, [1])

    def test_tie_breaks_to_lower_index(self):
        support, _ = select_support([1.0, 1.0], 1)
        np.testing.assert_array_equal(support, [0])

    def test_full_support_leaves_empty_complement(self):
        support, complement = select_support([1.0, 2.0, 3.0], 3)
        np.testing.assert_array_equal(support, [0, 1, 2])
        assert complement.size == 0

    def test_out_of_range_s(self):
        with pytest.raises(ValueError):
            select_support([1.0, 2.0], 0)
        with pytest.raises(ValueError):
            select_support([1.0, 2.0], 3)

    def test_support_dominates_complement(self):
        g = rng(6)
        for _ in range(50):
            gains = g.standard_normal(30) + 1j * g.standard_normal(30)
            s = int(g.integers(1, 30))
            support, complement = select_support(gains, s)
            if complement.size:
                assert np.abs(gains[support]).min() >= np.abs(gains[complement]).max()

    def test_with_support_helper(self):
        d = fixed_deployment([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        ch = draw_channels(d, FadingModel.deterministic(), 4.0, rng()).with_support(2)
        np.testing.assert_array_equal(ch.support, [0, 1])
        np.testing.assert_array_equal(ch.complement, [2])


class TestResidualNormSq:
    def test_empty_complement(self):
        assert residual_norm_sq([1.0, 2.0], []) == 0.0

    def test_imaginary_entry(self):
        assert residual_norm_sq([3.0, 4.0j], [1]) == pytest.approx(16.0)

    def test_partition_identity(self):
        g = rng(7)
        gains = g.standard_normal(100) + 1j * g.standard_normal(100)
        support, complement = select_support(gains, 30)
        total = residual_norm_sq(gains, support) + residual_norm_sq(gains, complement)
        assert total == pytest.approx(float(np.sum(np.abs(gains) ** 2)), rel=1e-12)

    def test_bad_indices(self):
        with pytest.raises(ValueError):
            residual_norm_sq([1.0, 2.0], [5])

    def test_monte_carlo_matches_closed_form(self):
        # cross-module oracle: Poisson deployments vs the closed-form residual power
        mean, stderr = simulate_interference_power(
            s=10,
            alpha=4.0,
            density=1.0,
            fading=FadingModel.rayleigh(),
            samples=4000,
            master_seed=11,
            window_side=60.0,
        )
        sc = Scenario(4.0, 1.0, fading_moment(FadingModel.rayleigh(), 4.0), 0.0, 81, 10)
        expected = residual_power_expected(sc)
        assert mean == pytest.approx(expected, rel=0.05)
