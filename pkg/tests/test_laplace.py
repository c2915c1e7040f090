import math

import numpy as np
import pytest
from scipy.integrate import quad

from ldpbench import (
    InvalidParameterError,
    LaplaceParams,
    RandomStream,
    laplace_cdf,
    laplace_pdf,
    laplace_quantile,
    laplace_sample,
    laplace_variance,
)

STD = LaplaceParams(0.0, 1.0)


class TestParams:
    def test_zero_beta_is_representable(self):
        assert LaplaceParams(0.0, 0.0).beta == 0.0

    @pytest.mark.parametrize("mu,beta", [(math.nan, 1), (math.inf, 1), (0, -1), (0, math.nan), (0, math.inf)])
    def test_rejects_bad_fields(self, mu, beta):
        with pytest.raises(InvalidParameterError):
            LaplaceParams(mu, beta)

    def test_functions_reject_zero_beta(self):
        degenerate = LaplaceParams(0.0, 0.0)
        for fn in (laplace_pdf, laplace_cdf):
            with pytest.raises(InvalidParameterError):
                fn(0.0, degenerate)
        with pytest.raises(InvalidParameterError):
            laplace_quantile(0.5, degenerate)
        with pytest.raises(InvalidParameterError):
            laplace_sample(degenerate, RandomStream(0, 0))


class TestPdf:
    def test_center_value_unit_scale(self):
        assert laplace_pdf(0.0, STD) == 0.5

    def test_center_value_half_scale(self):
        assert laplace_pdf(0.0, LaplaceParams(0.0, 0.5)) == 1.0

    def test_off_center_matches_formula(self):
        # Frozen from the closed form, cross-checked against a central
        # difference of the CDF below.
        assert laplace_pdf(2.0, LaplaceParams(0.0, 2.0)) == pytest.approx(0.0919698602928606, rel=1e-12)

    def test_symmetric_and_maximal_at_mu(self):
        params = LaplaceParams(1.5, 0.7)
        xs = np.linspace(-4, 7, 301)
        dens = laplace_pdf(xs, params)
        assert np.allclose(dens, laplace_pdf(2 * params.mu - xs, params), rtol=1e-12)
        assert laplace_pdf(params.mu, params) >= dens.max()

    def test_normalizes_to_one(self):
        for mu, beta in [(0.0, 1.0), (2.0, 0.5), (-3.0, 8.0)]:
            params = LaplaceParams(mu, beta)
            total, _ = quad(
                lambda x: laplace_pdf(x, params), mu - 60 * beta, mu + 60 * beta, points=[mu], limit=200
            )
            assert abs(total - 1.0) <= 1e-9


class TestCdf:
    def test_center_is_half(self):
        assert laplace_cdf(3.25, LaplaceParams(3.25, 2.0)) == 0.5

    def test_quartile_point(self):
        assert laplace_cdf(math.log(2.0), STD) == pytest.approx(0.75, rel=1e-14)

    def test_left_tail_vanishes(self):
        assert laplace_cdf(-50.0, STD) < 1e-20

    def test_monotone_and_bounded(self):
        xs = np.linspace(-30, 30, 2001)
        cdf = laplace_cdf(xs, LaplaceParams(0.5, 2.0))
        assert np.all(np.diff(cdf) >= 0)
        assert cdf.min() >= 0.0 and cdf.max() <= 1.0

    def test_derivative_matches_pdf(self):
        params = LaplaceParams(-0.3, 1.7)
        xs = np.linspace(params.mu - 8, params.mu + 8, 1000)
        h = 1e-6
        numeric = (laplace_cdf(xs + h, params) - laplace_cdf(xs - h, params)) / (2 * h)
        assert np.max(np.abs(numeric - laplace_pdf(xs, params))) <= 1e-6


class TestQuantile:
    def test_median_is_location(self):
        assert laplace_quantile(0.5, LaplaceParams(4.2, 3.0)) == 4.2

    def test_upper_quartile(self):
        # Oracle: bisection inversion of the CDF gives ln 2 to 12 digits.
        assert laplace_quantile(0.75, STD) == pytest.approx(math.log(2.0), rel=1e-12)

    def test_lower_quartile_scaled(self):
        assert laplace_quantile(0.25, LaplaceParams(0.0, 2.0)) == pytest.approx(-2 * math.log(2.0), rel=1e-12)

    def test_round_trip_on_grid(self):
        params = LaplaceParams(1.0, 0.25)
        ps = np.arange(0.001, 1.0, 0.001)
        back = laplace_cdf(laplace_quantile(ps, params), params)
        assert np.max(np.abs(back - ps)) <= 1e-12

    def test_extreme_probabilities_stay_finite(self):
        tiny = np.nextafter(0.0, 1.0)
        huge = np.nextafter(1.0, 0.0)
        assert math.isfinite(laplace_quantile(tiny, STD))
        assert math.isfinite(laplace_quantile(huge, STD))

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.1])
    def test_rejects_out_of_domain(self, p):
        with pytest.raises(InvalidParameterError):
            laplace_quantile(p, STD)


class TestSample:
    def test_deterministic_from_fresh_streams(self):
        a = laplace_sample(STD, RandomStream(11, 3))
        b = laplace_sample(STD, RandomStream(11, 3))
        assert a == b

    def test_advances_one_draw_per_value(self):
        stream = RandomStream(11, 3)
        laplace_sample(STD, stream)
        assert stream.position == 1
        laplace_sample(STD, stream, size=10)
        assert stream.position == 11

    def test_scalar_draw_equals_first_vector_draw(self):
        scalar = laplace_sample(STD, RandomStream(5, 0))
        vector = laplace_sample(STD, RandomStream(5, 0), size=4)
        assert scalar == vector[0]

    def test_moments_at_scale_two(self):
        params = LaplaceParams(0.0, 2.0)
        x = laplace_sample(params, RandomStream(42, 0), size=10**6)
        assert abs(x.mean()) <= 0.015
        assert abs(np.abs(x).mean() - 2.0) <= 0.01  # E|Lap(0, b)| = b


class TestVariance:
    @pytest.mark.parametrize("beta,expected", [(2.0, 8.0), (0.0, 0.0), (3.0, 18.0)])
    def test_values(self, beta, expected):
        assert laplace_variance(beta) == expected

    def test_rejects_negative(self):
        with pytest.raises(InvalidParameterError):
            laplace_variance(-0.5)
