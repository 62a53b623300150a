import math

import numpy as np
import pytest

from gen2out.data import gen_ifs, uniform_line
from gen2out.depth import (
    DepthModel,
    depth_model_from_points,
    estimate_depth,
    fit_depth_model,
    fixed_cut_expected_depth,
    if_coefficients,
    linear_fit,
    simulate_fixed_cut_depth,
)

GAMMA = 0.5772156649015329


class TestEstimateDepth:
    def test_unit_slope(self):
        assert estimate_depth(DepthModel(0.0, 1.0), 1024) == 10.0

    def test_constant(self):
        assert estimate_depth(DepthModel(2.0, 0.0), 12345) == 2.0

    def test_clamped_at_zero(self):
        assert estimate_depth(DepthModel(-5.0, 1.0), 4) == 0.0

    def test_vectorised(self):
        out = estimate_depth(DepthModel(1.0, 2.0), np.array([1, 2, 4]))
        assert out.tolist() == [1.0, 3.0, 5.0]

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            estimate_depth(DepthModel(0, 1), 0)

    def test_iforest_reference_at_256(self):
        # average unsuccessful-search length in a BST of 256 keys
        reference = 2 * (math.log(255) + GAMMA) - 2 * 255 / 256
        assert estimate_depth(DepthModel.iforest(), 256) == pytest.approx(reference, rel=0.01)
        assert estimate_depth(DepthModel.iforest(), 256) == pytest.approx(10.2526, abs=1e-3)


class TestIfCoefficients:
    def test_slope(self):
        assert if_coefficients(1000)[1] == pytest.approx(1.3863, abs=1e-4)

    def test_limit(self):
        assert if_coefficients(10**12)[0] == pytest.approx(2 * GAMMA - 2, abs=1e-9)

    def test_two(self):
        assert if_coefficients(2)[0] == pytest.approx(0.15443, abs=1e-5)

    def test_needs_two(self):
        with pytest.raises(ValueError):
            if_coefficients(1)


class TestFixedCut:
    @pytest.mark.parametrize("b", [0.1, 0.5, 0.8])
    def test_base_cases(self, b):
        table = fixed_cut_expected_depth(1, b, table=True)
        assert table.tolist() == [0.0, 1.0]
        assert fixed_cut_expected_depth(0, b) == 0.0

    def test_two_points_unbiased(self):
        assert fixed_cut_expected_depth(2, 0.5) == 3.0

    def test_two_points_closed_form(self):
        # H(2)·2b(1-b) = b² + (1-b)² + 4b(1-b)
        b = 0.7
        expected = (b * b + (1 - b) ** 2 + 4 * b * (1 - b)) / (2 * b * (1 - b))
        assert fixed_cut_expected_depth(2, b) == pytest.approx(expected, rel=1e-14)

    def test_symmetry(self):
        for n in range(65):
            assert fixed_cut_expected_depth(n, 0.3) == pytest.approx(fixed_cut_expected_depth(n, 0.7), abs=1e-9)

    def test_increasing_in_n(self):
        assert np.all(np.diff(fixed_cut_expected_depth(80, 0.6, table=True)[1:]) > 0)

    def test_increasing_with_bias(self):
        for n in (4, 16, 64):
            vals = [fixed_cut_expected_depth(n, b) for b in (0.5, 0.6, 0.7, 0.8, 0.9)]
            assert np.all(np.diff(vals) > 0)

    def test_log_space_weights_continue_smoothly(self):
        t = fixed_cut_expected_depth(60, 0.5, table=True)
        assert abs((t[51] - t[50]) - (t[50] - t[49])) < 0.01

    def test_rejects_bias(self):
        with pytest.raises(ValueError):
            fixed_cut_expected_depth(4, 1.0)

    @pytest.mark.parametrize("n", [2, 8, 32])
    def test_matches_simulation(self, n):
        sim = simulate_fixed_cut_depth(n, 0.7, trials=20000, seed=n)
        assert sim == pytest.approx(fixed_cut_expected_depth(n, 0.7), rel=0.02)


class TestFit:
    def test_regression_through_identity(self):
        m = depth_model_from_points([(i, i) for i in range(3, 9)])
        assert (m.w0, m.w1) == pytest.approx((0.0, 1.0), abs=1e-12)

    def test_refit_on_predictions(self):
        m = depth_model_from_points([(8, 9.1), (9, 10.9), (10, 12.2), (11, 14.0)])
        again = depth_model_from_points([(i, m.w0 + m.w1 * i) for i in (8, 9, 10, 11)])
        assert again.w0 == pytest.approx(m.w0, abs=1e-9) and again.w1 == pytest.approx(m.w1, abs=1e-9)

    def test_linear_fit_needs_spread(self):
        with pytest.raises(ValueError):
            linear_fit([1, 1], [2, 3])

    def test_too_small(self, rng):
        with pytest.raises(ValueError, match="too few"):
            fit_depth_model(rng.random((300, 2)), i_min=8)

    def test_fit_points_and_slope(self):
        X = gen_ifs(uniform_line(), 2**12, seed=1).values
        m = fit_depth_model(X, i_min=6, seed=0)
        assert [p[0] for p in m.fit_points] == [6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0]
        assert 1.2 < m.w1 < 1.6

    def test_mode_aggregator_gives_integers(self, rng):
        m = fit_depth_model(rng.random((2**10, 2)), i_min=6, aggregator="mode", seed=0)
        assert all(float(d).is_integer() for _, d in m.fit_points)
        assert m.w1 > 0

    def test_bad_aggregator(self, rng):
        with pytest.raises(ValueError):
            fit_depth_model(rng.random((2**9, 2)), aggregator="median")

    def test_deterministic(self, rng):
        X = rng.random((2**10, 2))
        assert fit_depth_model(X, i_min=6, seed=3) == fit_depth_model(X, i_min=6, seed=3)

    def test_dict_round_trip(self):
        m = DepthModel(-1.5, 1.7, ((8.0, 12.1), (9.0, 13.8)))
        assert DepthModel.from_dict(m.to_dict()) == m
        assert DepthModel.from_dict(DepthModel.iforest().to_dict()).kind == "iforest"
