"""Tests for Gaussian series models, sampling and tail certificates."""

import json
import math

import numpy as np
import pytest

from interspace import haar, paths
from interspace.core.sampling import ReplicateSampler
from interspace.errors import ModelError
from interspace.experiments.variance import expected_max_square
from interspace.models import (
    CustomModel,
    KLBridgeModel,
    KLSineModel,
    SampleDraw,
    SchauderModel,
    TailParams,
    basis_path,
    certify,
    grid,
    h1_gram,
    make_model,
    sample_partial_sum,
    tail_profile,
    tail_variance,
)


@pytest.fixture
def sampler():
    return ReplicateSampler(seed=11, chunk_size=256)


class TestMakeModel:
    """Test model construction by kind name."""

    def test_shipped_kinds(self):
        """Test every shipped kind resolves."""
        assert isinstance(make_model("schauder-bm"), SchauderModel)
        assert isinstance(make_model("kl-sine-bm", 8), KLSineModel)
        assert make_model("kl-bridge").kind == "kl-bridge"

    def test_unknown_kind(self):
        """Test an unknown kind is rejected."""
        with pytest.raises(ModelError):
            make_model("fractional-bm")

    def test_custom_needs_file(self):
        """Test custom models require a basis file."""
        with pytest.raises(ModelError):
            make_model("custom")

    def test_basis_file_only_for_custom(self, tmp_path):
        """Test basis_file is refused for shipped kinds."""
        with pytest.raises(ModelError):
            make_model("schauder-bm", basis_file=tmp_path / "basis.json")

    def test_bad_dimension(self):
        """Test dimension must be positive."""
        with pytest.raises(ModelError):
            SchauderModel(dimension=0)

    def test_custom_from_file(self, tmp_path):
        """Test a custom basis file round trip."""
        basis_file = tmp_path / "basis.json"
        rows = [basis_path(SchauderModel(), n, 3).samples.tolist() for n in (1, 2, 3)]
        basis_file.write_text(json.dumps({"version": 1, "level": 3, "basis": rows}))
        model = make_model("custom", basis_file=basis_file)
        assert isinstance(model, CustomModel)
        assert model.dimension == 3
        coeffs = np.array([[1.0, -2.0, 0.5]])
        np.testing.assert_allclose(
            model.synthesize(coeffs, 3), SchauderModel().synthesize(coeffs, 3), atol=1e-14
        )


class TestSynthesis:
    """Test grid synthesis and evaluation."""

    def test_schauder_matches_haar(self):
        """Test the Schauder model is the Haar synthesis."""
        rng = np.random.default_rng(0)
        coeffs = rng.standard_normal((3, 16))
        np.testing.assert_allclose(
            SchauderModel().synthesize(coeffs, 5), haar.synthesize_batch(coeffs, 5)
        )

    def test_start_offset(self):
        """Test synthesis of a coefficient slice starting after index 0."""
        rng = np.random.default_rng(1)
        coeffs = rng.standard_normal((2, 16))
        model = SchauderModel()
        full = model.synthesize(coeffs, 4)
        head = model.synthesize(coeffs[:, :5], 4)
        tail = model.synthesize(coeffs[:, 5:], 4, start=5)
        np.testing.assert_allclose(head + tail, full, atol=1e-14)

    def test_truncation_drops_tail(self):
        """Test coefficients past the dimension have no effect."""
        coeffs = np.arange(1.0, 9.0)[None, :]
        truncated = SchauderModel(dimension=2).synthesize(coeffs, 3)
        np.testing.assert_allclose(truncated, SchauderModel().synthesize(coeffs[:, :2], 3))

    def test_too_shallow_level(self):
        """Test Schauder synthesis below the required level."""
        with pytest.raises(ModelError):
            SchauderModel().synthesize(np.ones((1, 9)), 3)

    def test_basis_path(self):
        """Test e_n on the grid."""
        p = basis_path(SchauderModel(), 3, 4)
        np.testing.assert_allclose(p.samples, haar.schauder_eval(3, grid(4)))
        assert paths.sup_norm(basis_path(SchauderModel(dimension=2), 3, 4)) == 0.0

    def test_sine_evaluate_matches_grid(self):
        """Test pinned-time evaluation agrees with the grid synthesis."""
        model = KLSineModel()
        coeffs = np.random.default_rng(2).standard_normal((2, 12))
        np.testing.assert_allclose(
            model.evaluate(coeffs, grid(4)), model.synthesize(coeffs, 4), atol=1e-12
        )

    def test_schauder_variance_is_t(self):
        """Test sum_n phi_n(t)^2 = t on the grid for N = 2^L."""
        level = 6
        basis = SchauderModel().basis_matrix(2**level, level)
        np.testing.assert_allclose(np.sum(basis**2, axis=0), grid(level), atol=1e-12)

    def test_kl_variances(self):
        """Test KL partial sums approach t and t(1 - t)."""
        t = grid(4)
        sine = np.sum(KLSineModel().basis_matrix(2000, 4) ** 2, axis=0)
        bridge = np.sum(KLBridgeModel().basis_matrix(2000, 4) ** 2, axis=0)
        np.testing.assert_allclose(sine, t, atol=1e-3)
        np.testing.assert_allclose(bridge, t * (1.0 - t), atol=1e-3)

    def test_marginal_variance_by_sampling(self, sampler):
        """Test Var X(t) = t by Monte Carlo within 4 standard errors."""
        level = 3
        model = SchauderModel()
        values = model.synthesize(sampler.gaussians(20_000, 2**level), level)
        variance = values.var(axis=0, ddof=1)
        se = grid(level) * math.sqrt(2.0 / values.shape[0])
        assert np.all(np.abs(variance - grid(level)) <= 4.0 * se + 1e-12)

    @pytest.mark.parametrize(
        "model, count", [(SchauderModel(), 16), (KLSineModel(), 512)], ids=["schauder", "kl-sine"]
    )
    def test_covariance_by_sampling(self, sampler, model, count):
        """Test E[X(s) X(t)] = min(s, t) by Monte Carlo within 3 standard errors."""
        times = np.array([0.25, 0.75])
        values = model.evaluate(sampler.gaussians(10_000, count), times)
        for a in range(2):
            for b in range(a, 2):
                products = values[:, a] * values[:, b]
                se = products.std(ddof=1) / math.sqrt(products.size)
                target = min(times[a], times[b])
                assert abs(products.mean() - target) <= 3.0 * se


class TestGram:
    """Test the H^1 Gram matrices."""

    @pytest.mark.parametrize("model", [SchauderModel(), KLSineModel(), KLBridgeModel()])
    def test_orthonormal(self, model):
        """Test shipped bases are orthonormal in H^1_0."""
        np.testing.assert_allclose(h1_gram(model, 16), np.eye(16), atol=1e-10)

    def test_truncated_rows_are_zero(self):
        """Test Gram rows past the dimension vanish."""
        gram = h1_gram(SchauderModel(dimension=3), 6)
        np.testing.assert_allclose(gram[:3, :3], np.eye(3), atol=1e-12)
        assert np.all(gram[3:] == 0.0)


class TestSampling:
    """Test reproducible single draws."""

    def test_same_seed_same_path(self):
        """Test a sample is a function of its seed."""
        a, xi_a = sample_partial_sum(SchauderModel(), 64, 6, seed=5)
        b, xi_b = sample_partial_sum(SchauderModel(), 64, 6, seed=5)
        np.testing.assert_array_equal(a.samples, b.samples)
        np.testing.assert_array_equal(xi_a.coeffs, xi_b.coeffs)

    def test_pinned_zero(self):
        """Test the pinned generator yields the zero path."""
        p, xi = sample_partial_sum(KLSineModel(), 32, 5, seed=5, pinned_zero=True)
        assert paths.sup_norm(p) == 0.0
        assert not np.any(xi.coeffs)

    def test_regenerate(self):
        """Test a draw regenerates bit for bit."""
        draw = SampleDraw.draw(9, 10)
        np.testing.assert_array_equal(draw.regenerate().gaussians, draw.gaussians)

    def test_bad_truncation(self):
        """Test truncation must be positive."""
        with pytest.raises(ModelError):
            sample_partial_sum(SchauderModel(), 0, 4, seed=1)


class TestTails:
    """Test tail variances and certified profiles."""

    def test_remainder_bounds(self):
        """Test analytic remainders of the shipped models."""
        expected = 2.0**-3 * (math.log(16.0) + 1.0) / 2.0
        assert SchauderModel().remainder_bound(8) == pytest.approx(expected)
        assert SchauderModel().remainder_bound(6) is None
        assert SchauderModel(dimension=4).remainder_bound(4) == 0.0
        assert KLSineModel().remainder_bound(16) is None

    def test_certify_folds_remainder(self):
        """Test the Minkowski fold of window and remainder."""
        assert certify(0.25, None) == 0.25
        assert certify(0.25, 0.0) == 0.25
        assert certify(0.25, 0.25) == pytest.approx(1.0)

    def test_one_dimensional_profile(self, sampler):
        """Test T(0) = E g^2 and T(n) = 0 past a one-term model."""
        params = TailParams(replicates=4000, level=2)
        profile = tail_profile(SchauderModel(dimension=1), params, sampler)
        assert profile.finite
        assert profile.estimate[0] == pytest.approx(1.0, abs=4.0 * profile.std_error[0])
        assert profile.certified_at(1) == 0.0
        assert profile.certified_at(50) == 0.0

    def test_profile_nonincreasing(self, sampler):
        """Test certified tails never increase with the cut."""
        params = TailParams(replicates=256, level=5)
        profile = tail_profile(SchauderModel(), params, sampler)
        assert np.all(np.diff(profile.certified) <= 0.0)
        assert profile.remainder is not None
        assert profile.certified_at(10_000) == math.inf

    def test_profile_agrees_with_direct_tail(self, sampler):
        """Test the backward pass against a direct estimate at n = 0."""
        params = TailParams(replicates=512, level=4)
        model = SchauderModel(dimension=16)
        profile = tail_profile(model, params, sampler)
        direct = tail_variance(model, 0, params, sampler)
        assert profile.estimate[0] == pytest.approx(direct.estimate, rel=1e-9)

    def test_level_block_tail(self, sampler):
        """Test T(2^k) with J_max = 2^(k+1) is 2^(-2-k) E max of 2^k squares."""
        k = 2
        params = TailParams(replicates=20_000, j_max=2 ** (k + 1), level=k + 1)
        est = tail_variance(SchauderModel(), 2**k, params, sampler)
        exact = 2.0 ** (-2 - k) * expected_max_square(2**k)
        assert abs(est.estimate - exact) <= 4.0 * est.std_error

    def test_cut_beyond_window(self, sampler):
        """Test a cut at or past J_max is rejected."""
        with pytest.raises(ModelError):
            tail_variance(SchauderModel(), 8, TailParams(replicates=8, j_max=8, level=3), sampler)
