"""Tests for the K-functional and theta norms."""

import numpy as np
import pytest

from interspace import haar, paths
from interspace.core.sampling import ReplicateSampler
from interspace.errors import ExperimentError
from interspace.experiments.kfunctional import (
    default_t_grid,
    k_functional,
    kfunctional_experiment,
    min_h1_within,
    theta_norm,
    theta_norm_experiment,
)
from interspace.models import SchauderModel

T_VALUES = [0.01, 0.3, 1.0, 2.5, 100.0]


class TestMinH1Within:
    """Test the inner bound-constrained problem."""

    def test_endpoints(self):
        """Test phi(0) = |p|_H and phi(||p||) = 0."""
        p = haar.synthesize(haar.coeff_seq([0.5, -1.0, 2.0, 0.3]), 3)
        assert min_h1_within(p, 0.0) == pytest.approx(paths.h1_seminorm(p))
        assert min_h1_within(p, paths.sup_norm(p)) == 0.0

    def test_identity(self):
        """Test the straight line (1 - s) t is optimal for t -> t."""
        p = paths.identity_path(3)
        assert min_h1_within(p, 0.25) == pytest.approx(0.75, rel=1e-6)


class TestKFunctional:
    """Test K(t, p) values and bounds."""

    @pytest.mark.parametrize("t", T_VALUES)
    def test_identity_closed_form(self, t):
        """Test K(t, id) = min(1, t)."""
        result = k_functional(paths.identity_path(3), t)
        assert result.value == pytest.approx(min(1.0, t), abs=1e-9)

    def test_zero_path(self):
        """Test K vanishes on the zero path."""
        assert k_functional(paths.zero_path(3), 1.0).value == 0.0

    def test_feasible_point_bound_and_monotone(self):
        """Test K(t) <= min(||p||, t |p|_H) and K grows with t."""
        rng = np.random.default_rng(12)
        p = haar.synthesize(haar.coeff_seq(rng.standard_normal(16)), 4)
        sup, h1 = paths.sup_norm(p), paths.h1_seminorm(p)
        values = [k_functional(p, t).value for t in T_VALUES]
        for t, value in zip(T_VALUES, values):
            assert value <= min(sup, t * h1) + 1e-9
        assert all(a <= b + 1e-3 * max(sup, 1.0) for a, b in zip(values, values[1:]))

    def test_rejects_nonpositive_t(self):
        """Test t must be positive."""
        with pytest.raises(ExperimentError):
            k_functional(paths.identity_path(2), 0.0)

    def test_to_dict(self):
        """Test KValue serialization."""
        data = k_functional(paths.identity_path(2), 0.5).to_dict()
        assert set(data) == {"t", "value", "split"}


class TestThetaNorm:
    """Test theta norms over a t grid."""

    def test_identity(self):
        """Test max_t t^-theta min(1, t) = 1 at t = 1."""
        value = theta_norm(paths.identity_path(3), 0.5, t_grid=[0.25, 0.5, 1.0, 2.0, 4.0])
        assert value == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("theta", [0.0, 1.0])
    def test_theta_range(self, theta):
        """Test theta outside (0, 1)."""
        with pytest.raises(ExperimentError):
            theta_norm(paths.identity_path(2), theta)

    def test_default_grid(self):
        """Test the default grid is geometric over 2^-20..2^20."""
        grid = default_t_grid(5)
        assert grid[0] == pytest.approx(2.0**-20)
        assert grid[-1] == pytest.approx(2.0**20)
        np.testing.assert_allclose(grid[1:] / grid[:-1], grid[1] / grid[0])


class TestExperiments:
    """Test the K-functional and theta experiments end to end."""

    def test_given_path(self):
        """Test every check passes on the identity path."""
        report = kfunctional_experiment(
            SchauderModel(),
            3,
            1,
            ReplicateSampler(seed=1),
            t_grid=default_t_grid(8),
            path=paths.identity_path(3),
        )
        assert report.passed
        assert {i.name for i in report.checked_items} == {
            "feasible_point_bound",
            "monotone_in_t",
            "concave_in_t",
        }
        assert len(report.tables["k_values"]) == 8

    def test_random_paths(self):
        """Test the feasible-point bound on sampled paths."""
        report = kfunctional_experiment(
            SchauderModel(), 3, 2, ReplicateSampler(seed=2), t_grid=default_t_grid(6)
        )
        bound = next(i for i in report.items if i.name == "feasible_point_bound")
        assert bound.passed
        assert report.replicates == 2

    def test_theta_experiment(self):
        """Test one informational item per level."""
        report = theta_norm_experiment(
            SchauderModel(), 0.5, [2, 3], 3, ReplicateSampler(seed=3), t_grid=[0.5, 1.0, 2.0]
        )
        assert report.passed
        assert [i.name for i in report.items] == ["theta_norm_L2", "theta_norm_L3"]
        assert all(i.passed is None for i in report.items)

    def test_theta_experiment_validation(self):
        """Test theta is checked before sampling."""
        with pytest.raises(ExperimentError):
            theta_norm_experiment(SchauderModel(), 1.5, [2], 3, ReplicateSampler(seed=3))
