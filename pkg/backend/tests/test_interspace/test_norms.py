"""Tests for the block norms and their comparison with the sup norm."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from interspace import haar, paths
from interspace.blocks import BlockSchedule, Variant, dyadic_schedule
from interspace.errors import BlockIndexError, CoefficientError
from interspace.haar import CoeffSeq
from interspace.models import SchauderModel
from interspace.norms import (
    block_profile,
    block_tail_bound,
    embedding_constant,
    norm_summary,
    partial_seminorm,
    rkhs_norm,
    sum_block_norm,
    sup_block_norm,
)

LEVEL = 4
MODEL = SchauderModel()
ROUNDOFF = 1e-10

finite = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False, allow_infinity=False)
coefficients = arrays(np.float64, 16, elements=finite)
# zero or clear of subnormals, so weighted block norms round without losing their margin
normal = st.one_of(
    st.just(0.0),
    st.floats(min_value=1e-6, max_value=50.0),
    st.floats(min_value=-50.0, max_value=-1e-6),
)
normal_coefficients = arrays(np.float64, 16, elements=normal)


def _sup(xi: CoeffSeq) -> float:
    return paths.sup_norm(haar.synthesize(xi, LEVEL))


@pytest.fixture
def schedule():
    return dyadic_schedule(0.3, 4)


class TestBlockValues:
    """Test block profiles on single basis functions."""

    @pytest.mark.parametrize("k,j", [(1, 1), (2, 3), (3, 8)])
    def test_single_tent(self, schedule, k, j):
        """Test one tent in Haar block k gives 2^(k alpha) 2^(-1-k/2)."""
        xi = haar.unit_coeffs(2**k + j, size=16)
        expected = 2.0 ** (k * schedule.alpha) * 2.0 ** (-1.0 - k / 2.0)
        assert sum_block_norm(xi, schedule, MODEL, LEVEL) == pytest.approx(expected)
        assert sup_block_norm(xi, schedule, MODEL, LEVEL) == pytest.approx(expected)

    def test_first_block_holds_two_functions(self, schedule):
        """Test block 0 is {1, 2} and its sup norm is that of t + 0.5 phi_2."""
        xi = haar.coeff_seq([1.0, 0.5])
        profile = block_profile(xi, schedule, MODEL, LEVEL)
        assert profile[0] == pytest.approx(1.0)
        assert not np.any(profile[1:])

    def test_embedding_constant(self):
        """Test c = sum_{k<K} 2^(-k alpha)."""
        schedule = BlockSchedule(alpha=0.5, variant=Variant.SUM, cuts=[0, 1, 2, 3])
        assert embedding_constant(schedule) == pytest.approx(1.0 + 2.0**-0.5 + 0.5)

    def test_rkhs_norm(self):
        """Test the H norm is the l^2 norm of the coefficients."""
        assert rkhs_norm(haar.coeff_seq([3.0, 4.0])) == pytest.approx(5.0)

    def test_uncovered_coefficients(self, schedule):
        """Test coefficients past n_K are refused."""
        xi = haar.unit_coeffs(20, size=32)
        with pytest.raises(CoefficientError):
            sum_block_norm(xi, schedule, MODEL, 5)


class TestComparisons:
    """Test the inequalities between the norms."""

    @settings(max_examples=60, deadline=None)
    @given(coeffs=coefficients)
    def test_sandwich(self, coeffs):
        """Test ||x|| <= sum ||Q_k x|| <= c ||x||', ||x||' <= ||x||_i and ||x|| <= ||x||_i."""
        schedule = dyadic_schedule(0.3, 4)
        xi = CoeffSeq(coeffs)
        profile = block_profile(xi, schedule, MODEL, LEVEL)
        sup = _sup(xi)
        sum_block = sum_block_norm(xi, schedule, MODEL, LEVEL)
        sup_block = sup_block_norm(xi, schedule, MODEL, LEVEL)
        slack = ROUNDOFF * max(1.0, sum_block)
        assert sup <= profile.sum() + slack
        assert profile.sum() <= embedding_constant(schedule) * sup_block + slack
        assert sup_block <= sum_block + slack
        assert sup <= sum_block + slack

    @settings(max_examples=40, deadline=None)
    @given(a=coefficients, b=coefficients)
    def test_triangle_inequality(self, a, b):
        """Test both block norms are subadditive."""
        schedule = dyadic_schedule(0.3, 4)
        x, y = CoeffSeq(a), CoeffSeq(b)
        xy = CoeffSeq(a + b)
        for norm in (sum_block_norm, sup_block_norm):
            lhs = norm(xy, schedule, MODEL, LEVEL)
            rhs = norm(x, schedule, MODEL, LEVEL) + norm(y, schedule, MODEL, LEVEL)
            assert lhs <= rhs + ROUNDOFF * max(1.0, rhs)

    @settings(max_examples=40, deadline=None)
    @given(coeffs=coefficients, scale=st.floats(min_value=-10.0, max_value=10.0))
    def test_homogeneity(self, coeffs, scale):
        """Test ||c x|| = |c| ||x||."""
        schedule = dyadic_schedule(0.3, 4)
        base = sum_block_norm(CoeffSeq(coeffs), schedule, MODEL, LEVEL)
        scaled = sum_block_norm(CoeffSeq(scale * coeffs), schedule, MODEL, LEVEL)
        assert scaled == pytest.approx(abs(scale) * base, rel=1e-9, abs=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(
        coeffs=normal_coefficients,
        variant=st.sampled_from([Variant.SUM, Variant.SUP]),
        k0=st.integers(min_value=0, max_value=3),
    )
    def test_block_tail_bound(self, coeffs, variant, k0):
        """Test the tail past block k0 is bounded by the schedule's own norm."""
        schedule = dyadic_schedule(0.3, 4, variant=variant)
        result = block_tail_bound(CoeffSeq(coeffs), schedule, k0, MODEL, LEVEL)
        assert result.tail <= result.bound

    def test_block_tail_bound_index(self, schedule):
        """Test k0 must name a block."""
        with pytest.raises(BlockIndexError):
            block_tail_bound(haar.coeff_seq([1.0]), schedule, 4, MODEL, LEVEL)


class TestSummary:
    """Test partial seminorms and the norm summary."""

    def test_partial_seminorm_reaches_full_norm(self, schedule):
        """Test the partial seminorm at K - 1 is the sum-block norm."""
        xi = CoeffSeq(np.random.default_rng(4).standard_normal(16))
        full = sum_block_norm(xi, schedule, MODEL, LEVEL)
        partial = [partial_seminorm(xi, schedule, MODEL, LEVEL, k) for k in range(4)]
        assert partial[-1] == pytest.approx(full)
        assert all(a <= b for a, b in zip(partial, partial[1:]))
        with pytest.raises(BlockIndexError):
            partial_seminorm(xi, schedule, MODEL, LEVEL, 4)

    def test_norm_summary(self, schedule):
        """Test the summary agrees with the individual norms."""
        xi = CoeffSeq(np.random.default_rng(5).standard_normal(16))
        summary = norm_summary(xi, schedule, MODEL, LEVEL, holder_alpha=0.25)
        path = haar.synthesize(xi, LEVEL)
        assert summary.sup == pytest.approx(paths.sup_norm(path))
        assert summary.h1 == pytest.approx(paths.h1_seminorm(path))
        assert summary.sum_block == pytest.approx(sum_block_norm(xi, schedule, MODEL, LEVEL))
        assert summary.sup_block == pytest.approx(sup_block_norm(xi, schedule, MODEL, LEVEL))
        data = summary.to_dict()
        assert data["holder"]["alpha"] == 0.25
        assert set(data) == {
            "sup",
            "h1",
            "rkhs",
            "holder",
            "sum_block",
            "sup_block",
            "embedding_constant",
        }

    def test_h1_matches_rkhs_for_schauder(self, schedule):
        """Test the Schauder synthesis is an isometry from l^2 onto H^1_0."""
        xi = CoeffSeq(np.random.default_rng(6).standard_normal(16))
        summary = norm_summary(xi, schedule, MODEL, LEVEL)
        assert summary.h1 == pytest.approx(summary.rkhs, rel=1e-10)
