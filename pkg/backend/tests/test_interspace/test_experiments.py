"""Tests for the Monte Carlo verification experiments, run at small sizes."""

import math

import numpy as np
import pytest

from interspace import haar, paths
from interspace.blocks import (
    BlockSchedule,
    Variant,
    build_schedule,
    dyadic_schedule,
    live_block_count,
)
from interspace.core.sampling import ReplicateSampler
from interspace.errors import CoefficientError, ExperimentError
from interspace.experiments import (
    Body,
    BodyKind,
    NormSpec,
    Subspace,
    block_variance_profile,
    borel_cantelli_check,
    ciesielski_batch,
    ciesielski_equivalence_check,
    concentration_check,
    estimate_fernique,
    line_concentration_check,
    tightness_experiment,
    verify_key_inequality,
    zn_convergence,
)
from interspace.experiments.ciesielski import closed_form_profile, equivalence_constant, pure_block
from interspace.experiments.convergence import trajectories
from interspace.experiments.fernique import analytic_moment, fernique_rho
from interspace.experiments.tightness import default_eps_grid
from interspace.experiments.variance import envelope_onset, envelope_ratio, expected_max_square
from interspace.models import SchauderModel, TailParams
from interspace.norms import block_profile_batch


def _item(report, name):
    return next(i for i in report.items if i.name == name)


@pytest.fixture
def sampler():
    return ReplicateSampler(seed=2024, chunk_size=512)


@pytest.fixture
def truncated():
    return SchauderModel(dimension=16)


@pytest.fixture
def sum_schedule(truncated, sampler):
    return build_schedule(
        truncated,
        0.3,
        Variant.SUM,
        block_count=3,
        params=TailParams(replicates=256, level=4),
        sampler=sampler,
    )


@pytest.fixture
def sup_schedule(truncated, sampler):
    return build_schedule(
        truncated,
        0.3,
        Variant.SUP,
        eta=0.1,
        block_count=3,
        params=TailParams(replicates=256, level=4),
        sampler=sampler,
    )


class TestKeyInequality:
    """Test the Markov bound on the block variables."""

    def test_passes_on_certified_schedule(self, truncated, sum_schedule, sampler):
        """Test every block frequency stays under 2^-k."""
        report = verify_key_inequality(truncated, sum_schedule, 4000, sampler, 4)
        assert report.passed
        live = live_block_count(sum_schedule, truncated)
        assert [i.name for i in report.checked_items] == [
            f"block_{k}_frequency" for k in range(1, live)
        ]
        assert len(report.tables["frequencies"]) == sum_schedule.block_count
        assert report.wall_time_s is not None

    def test_empty_blocks_are_informational(self, sampler):
        """Test blocks past the model dimension decide nothing."""
        schedule = BlockSchedule(alpha=0.3, variant=Variant.SUM, cuts=[0, 2, 4, 5, 6])
        report = verify_key_inequality(SchauderModel(dimension=4), schedule, 500, sampler, 3)
        assert [i.name for i in report.checked_items] == ["block_1_frequency"]
        for k in (2, 3):
            item = _item(report, f"block_{k}_frequency")
            assert item.passed is None
            assert item.detail["empty_block"] is True
        assert [row["empty"] for row in report.tables["frequencies"]] == [
            False,
            False,
            True,
            True,
        ]

    def test_needs_sum_variant(self, truncated, sup_schedule, sampler):
        """Test a sup-variant schedule is refused."""
        with pytest.raises(ExperimentError):
            verify_key_inequality(truncated, sup_schedule, 100, sampler, 4)

    def test_reproducible(self, truncated, sum_schedule):
        """Test reports are a function of the seed, not the worker count."""
        a = verify_key_inequality(truncated, sum_schedule, 3000, ReplicateSampler(5), 4)
        b = verify_key_inequality(
            truncated, sum_schedule, 3000, ReplicateSampler(5, workers=3), 4
        )
        assert a.to_dict() == b.to_dict()


class TestConvergence:
    """Test Z_n trajectories and the Borel-Cantelli check."""

    def test_trajectories(self):
        """Test cumulative sums and running maxima."""
        weighted = np.array([[1.0, 3.0, 2.0]])
        np.testing.assert_array_equal(trajectories(weighted, Variant.SUM), [[1.0, 4.0, 6.0]])
        np.testing.assert_array_equal(trajectories(weighted, Variant.SUP), [[1.0, 3.0, 3.0]])

    def test_sum_variant(self, truncated, sum_schedule, sampler):
        """Test monotone finite trajectories and the independence lower bound."""
        report = zn_convergence(truncated, sum_schedule, 2000, sampler, 4)
        assert report.passed
        assert _item(report, "monotone_trajectories").estimate == 0.0
        assert any(i.name.startswith("independence_lower_bound") for i in report.items)
        assert len(report.tables["trajectory"]) == sum_schedule.block_count

    def test_sup_variant_product_formula(self, sampler):
        """Test independent blocks factor the joint small-ball probability."""
        report = zn_convergence(SchauderModel(), dyadic_schedule(0.3, 4), 2000, sampler, 4)
        assert report.passed
        assert any(i.name.startswith("product_formula") for i in report.items)
        assert report.tables["tail_jump"] == []

    def test_borel_cantelli(self, truncated, sup_schedule, sampler):
        """Test exceedance frequencies against eps^-2 2^(-2k eta)."""
        report = borel_cantelli_check(truncated, sup_schedule, 1.0, 2000, sampler, 4)
        assert report.passed
        assert _item(report, "partial_sum_of_probabilities").passed

    def test_empty_tail_jumps_are_informational(self, sampler):
        """Test tail jumps over empty blocks are reported, not checked."""
        schedule = BlockSchedule(alpha=0.3, variant=Variant.SUM, cuts=[0, 2, 4, 5, 6])
        report = zn_convergence(SchauderModel(dimension=4), schedule, 500, sampler, 3)
        jumps = [i for i in report.items if i.name.startswith("tail_jump")]
        assert [i.name for i in jumps] == ["tail_jump_n1", "tail_jump_n2"]
        assert all(i.passed is None and i.estimate == 0.0 for i in jumps)
        assert all(row["empty_tail"] for row in report.tables["tail_jump"])

    def test_borel_cantelli_skips_block_zero_and_empty_blocks(self, sampler):
        """Test the partial sum starts at k = 1 and carries a Monte Carlo margin."""
        schedule = BlockSchedule(alpha=0.3, variant=Variant.SUP, eta=0.1, cuts=[0, 2, 4, 8, 9])
        report = borel_cantelli_check(SchauderModel(dimension=8), schedule, 6.0, 2000, sampler, 3)
        table = report.tables["exceedance"]
        assert table[0]["partial_sum"] == 0.0
        assert table[-1]["partial_sum"] == pytest.approx(
            sum(row["frequency"] for row in table[1:])
        )
        total = _item(report, "partial_sum_of_probabilities")
        assert total.detail["margin"] > 0.0
        assert total.bound == pytest.approx(2.0**-0.2 / (1.0 - 2.0**-0.2) / 36.0)
        assert _item(report, "block_3_exceedance").passed is None
        assert _item(report, "block_2_exceedance").passed is not None

    def test_borel_cantelli_validation(self, truncated, sum_schedule, sup_schedule, sampler):
        """Test the variant and eps are checked."""
        with pytest.raises(ExperimentError):
            borel_cantelli_check(truncated, sum_schedule, 1.0, 10, sampler, 4)
        with pytest.raises(ExperimentError):
            borel_cantelli_check(truncated, sup_schedule, 0.0, 10, sampler, 4)


class TestFernique:
    """Test exponential square moments."""

    def test_analytic_moment(self):
        """Test (1 - 2 rho s^2)^(-1/2) and its divergence."""
        assert analytic_moment(0.25, 1.0) == pytest.approx(math.sqrt(2.0))
        assert analytic_moment(0.5, 1.0) == math.inf

    def test_one_dimensional_oracle(self, sampler):
        """Test C_rho of the one-term model against the closed form."""
        one_term = SchauderModel(dimension=1)
        report = estimate_fernique(one_term, NormSpec.SUP, [0.05, 0.1, 0.2], 20_000, sampler, 4)
        assert report.passed
        assert fernique_rho(report) == 0.2
        assert [r["rho"] for r in report.tables["moments"]] == [0.05, 0.1, 0.2]
        assert _item(report, "analytic_rho_0.2").estimate < 0.05

    def test_block_norm_needs_schedule(self, sampler):
        """Test block norms without a schedule are refused."""
        with pytest.raises(ExperimentError):
            estimate_fernique(SchauderModel(), NormSpec.SUM_BLOCK, [0.1], 10, sampler, 4)

    def test_rho_grid_validation(self, sampler):
        """Test the rho grid must be positive."""
        with pytest.raises(ExperimentError):
            estimate_fernique(SchauderModel(dimension=1), NormSpec.SUP, [0.0, 0.1], 10, sampler, 4)


class TestTightness:
    """Test the large-deviation slope of scaled measures."""

    def test_default_eps_grid(self):
        """Test r / eps spans [2, 4.5]."""
        grid = default_eps_grid(2.0)
        assert len(grid) == 26
        assert 2.0 / grid[0] == pytest.approx(2.0)
        assert 2.0 / grid[-1] == pytest.approx(4.5)

    @pytest.mark.slow
    def test_one_dimensional_slope(self, sampler):
        """Test the fitted slope against Fernique and the Gaussian tail oracle."""
        report = tightness_experiment(
            SchauderModel(dimension=1),
            NormSpec.SUP,
            1.0,
            default_eps_grid(1.0),
            200_000,
            sampler,
            4,
            rho_grid=[0.05, 0.1, 0.2],
            fernique_replicates=20_000,
        )
        assert report.passed
        assert _item(report, "exponential_chebyshev").estimate == 0.0
        assert _item(report, "slope").estimate < -0.2
        assert "slope_vs_oracle" in [i.name for i in report.items]

    def test_too_few_hits(self, sampler):
        """Test the rare-event policy refuses a sparse grid."""
        one_term = SchauderModel(dimension=1)
        with pytest.raises(ExperimentError):
            tightness_experiment(one_term, NormSpec.SUP, 1.0, default_eps_grid(), 100, sampler, 4)

    def test_radius_validation(self, sampler):
        """Test the radius must be positive."""
        with pytest.raises(ExperimentError):
            tightness_experiment(
                SchauderModel(dimension=1), NormSpec.SUP, 0.0, [0.5], 10, sampler, 4
            )


class TestConcentration:
    """Test Gaussian mass of convex bodies and their sections."""

    def test_box_against_coordinate_section(self, sampler):
        """Test the section dominates and both masses match the closed form."""
        body = Body(kind=BodyKind.BOX, dim=2, half_widths=[1.0, 0.5])
        report = concentration_check(
            2, Subspace([[1.0, 0.0]]), body, 20_000, sampler, scales=[0.5, 1.0, 2.0]
        )
        assert report.passed
        assert _item(report, "box_oracle_s1").detail["analytic"] == pytest.approx(
            (2.0 * 0.8413447460685429 - 1.0) * (2.0 * 0.6914624612740131 - 1.0)
        )

    def test_symmetric_polytope(self, sampler):
        """Test a centrally symmetric polytope on an oblique line."""
        body = Body(
            kind=BodyKind.POLYTOPE,
            dim=3,
            normals=[[1.0, 1.0, 0.0], [-1.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]],
            offsets=[1.0, 1.0, 0.5, 0.5],
        )
        report = concentration_check(3, Subspace([[1.0, 2.0, 0.5]]), body, 10_000, sampler)
        assert report.passed

    def test_rejects_asymmetric_polytope(self, sampler):
        """Test a halfspace without its mirror is refused."""
        body = Body(kind=BodyKind.POLYTOPE, dim=2, normals=[[1.0, 0.0]], offsets=[1.0])
        with pytest.raises(ExperimentError):
            concentration_check(2, Subspace([[1.0, 0.0]]), body, 10, sampler)

    def test_rejects_off_centre_body(self, sampler):
        """Test a shifted body is refused."""
        body = Body(kind=BodyKind.BOX, dim=2, half_widths=[1.0, 1.0], center=[0.1, 0.0])
        with pytest.raises(ExperimentError):
            concentration_check(2, Subspace([[1.0, 0.0]]), body, 10, sampler)

    def test_dimension_and_subspace_validation(self, sampler):
        """Test dim range, body dimension and dependent spans."""
        box = Body(kind=BodyKind.BOX, dim=2, half_widths=[1.0, 1.0])
        with pytest.raises(ExperimentError):
            concentration_check(5, Subspace([[1.0] * 5]), box, 10, sampler)
        with pytest.raises(ExperimentError):
            concentration_check(3, Subspace([[1.0, 0.0, 0.0]]), box, 10, sampler)
        with pytest.raises(ExperimentError):
            concentration_check(2, Subspace([[1.0, 1.0], [2.0, 2.0]]), box, 10, sampler)

    def test_line_concentration(self, sampler):
        """Test P(||X||_i <= a) against the Gaussian mass of the line section."""
        schedule = dyadic_schedule(0.3, 4, variant=Variant.SUM)
        report = line_concentration_check(
            SchauderModel(),
            schedule,
            haar.unit_coeffs(1, size=16),
            [0.5, 1.0, 2.0, 4.0],
            5000,
            sampler,
            4,
        )
        assert report.passed
        assert len(report.tables["line"]) == 4

    def test_line_needs_nonzero_direction(self, sampler):
        """Test the zero direction is refused."""
        schedule = dyadic_schedule(0.3, 4, variant=Variant.SUM)
        with pytest.raises(ExperimentError):
            line_concentration_check(
                SchauderModel(), schedule, haar.coeff_seq(np.zeros(4)), [1.0], 10, sampler, 4
            )


class TestBlockVariance:
    """Test the Brownian block variances on the dyadic schedule."""

    def test_expected_max_square(self):
        """Test E g^2 = 1 and E max(g_1^2, g_2^2) = 1 + 2/pi."""
        assert expected_max_square(1) == pytest.approx(1.0, rel=1e-6)
        assert expected_max_square(2) == pytest.approx(1.0 + 2.0 / math.pi, rel=1e-6)

    def test_envelope_onset(self):
        """Test the onset is the first k of an unbroken run below the envelope."""
        onset = envelope_onset(0.9)
        assert envelope_ratio(onset, 0.9) <= 1.0
        if onset > 1:
            assert envelope_ratio(onset - 1, 0.9) > 1.0
        with pytest.raises(ExperimentError):
            envelope_onset(1.0)

    def test_profile(self, sampler):
        """Test path and direct estimates agree with the exact variance."""
        report = block_variance_profile([1, 2, 3], 4000, sampler, lam=0.9)
        assert report.passed
        assert [row["k"] for row in report.tables["profile"]] == [1, 2, 3]
        assert _item(report, "envelope_from_onset").passed

    def test_k_range_validation(self, sampler):
        """Test block indices start at 1."""
        with pytest.raises(ExperimentError):
            block_variance_profile([0, 1], 10, sampler)


class TestCiesielski:
    """Test the sup-block norm against Ciesielski's sequence norm."""

    def test_closed_form_profile(self):
        """Test closed-form block norms against path-computed ones."""
        coeffs = np.random.default_rng(8).standard_normal((5, 16))
        schedule = dyadic_schedule(0.3, 4)
        np.testing.assert_allclose(
            closed_form_profile(coeffs, 4),
            block_profile_batch(coeffs, schedule, SchauderModel(), 4),
            atol=1e-12,
        )

    def test_pure_block(self):
        """Test detection of single-level vectors."""
        assert pure_block(haar.coeff_seq([0.0, 0.0, 0.0, 0.0, 1.0, 2.0])) == 2
        assert pure_block(haar.coeff_seq([0.0, 0.0, 1.0, 0.0, 1.0])) is None
        assert pure_block(haar.coeff_seq([1.0])) is None

    def test_pure_block_ratio(self):
        """Test the ratio 2^(alpha-2) on one tent."""
        report = ciesielski_equivalence_check(haar.unit_coeffs(5), 0.3)
        assert report.passed
        assert _item(report, "pure_block_ratio").detail["ratio"] == pytest.approx(
            equivalence_constant(0.3)
        )

    def test_zero_vector(self):
        """Test both norms vanish together."""
        report = ciesielski_equivalence_check(haar.coeff_seq(np.zeros(8)), 0.3)
        assert report.passed
        assert _item(report, "zero_norms").estimate == 0.0

    def test_path_input(self):
        """Test a path is checked through its Haar coefficients."""
        tent = haar.synthesize(haar.unit_coeffs(5), 3)
        report = ciesielski_equivalence_check(tent, 0.3)
        assert report.passed
        assert report.config["path_level"] == 3
        assert report.config["coefficients"] == 8
        assert _item(report, "pure_block_ratio").detail["k"] == 2

        rng = np.random.default_rng(9)
        walk = paths.make_path(np.concatenate([[0.0], np.cumsum(rng.standard_normal(16))]))
        from_path = ciesielski_equivalence_check(walk, 0.3)
        from_coeffs = ciesielski_equivalence_check(haar.analyze(walk), 0.3)
        assert [i.estimate for i in from_path.items] == pytest.approx(
            [i.estimate for i in from_coeffs.items]
        )

    def test_batch(self, sampler):
        """Test random vectors over several blocks."""
        report = ciesielski_batch(0.3, 4, 200, sampler)
        assert report.passed
        assert report.replicates == 200

    def test_depth_validation(self, sampler):
        """Test depth must be positive."""
        with pytest.raises(CoefficientError):
            ciesielski_batch(0.3, 0, 10, sampler)
