"""
Tests for the double-exponential potential and the island decomposition.

Test Coverage:
    - potential: Potential, sample_double_exponential, a_scale, max_in_ball,
      maximum_deviation_bound
    - islands: decompose_islands, island_stats, island_frame, path_peak_counts,
      peak_count

Run with: pytest tests/test_landscape.py -v
"""

import math

import numpy as np
import pytest

from src.config import LandscapeConfig
from src.errors import PreconditionViolated
from src.graphs import VertexPath, ball, homogeneous_tree
from src.islands import (
    decompose_islands,
    island_frame,
    island_stats,
    path_peak_counts,
    peak_count,
)
from src.potential import (
    Potential,
    a_scale,
    max_in_ball,
    maximum_deviation_bound,
    sample_double_exponential,
)


# =============================================================================
# Test Fixtures
# =============================================================================

@pytest.fixture
def tree():
    """T_3 truncated at radius 8."""
    return homogeneous_tree(3, 8)


@pytest.fixture
def spiked(tree):
    """Zero potential with a spike of height 10 at the root."""
    return Potential.zeros(tree.n).with_values([0], 10.0)


# =============================================================================
# Potential Tests
# =============================================================================

class TestPotential:
    """Tests for the double-exponential field."""

    def test_nonnegative(self):
        """Values are clipped at zero."""
        xi = sample_double_exponential(1000, rho=1.0, seed=1)
        assert xi.values.min() >= 0.0

    def test_zero_atom(self):
        """P(xi = 0) = 1 - 1/e."""
        n = 20_000
        xi = sample_double_exponential(n, rho=1.0, seed=2)
        p = 1 - math.exp(-1)
        assert abs((xi.values == 0).mean() - p) < 4 * math.sqrt(p * (1 - p) / n)

    def test_tail(self):
        """P(xi > u) = exp(-e^{u/rho}) at u = rho."""
        n = 20_000
        rho = 2.0
        xi = sample_double_exponential(n, rho=rho, seed=3)
        p = math.exp(-math.e)
        assert abs((xi.values > rho).mean() - p) < 4 * math.sqrt(p * (1 - p) / n)

    def test_seeded(self, tree):
        """Same seed, same field."""
        a = sample_double_exponential(tree, 1.0, seed=5)
        b = sample_double_exponential(tree, 1.0, seed=5)
        assert np.array_equal(a.values, b.values)

    def test_negative_values_rejected(self):
        """Fields are nonnegative."""
        with pytest.raises(ValueError):
            Potential.from_values([-1.0, 0.0])

    def test_rho_positive(self):
        """rho must be positive."""
        with pytest.raises(ValueError):
            sample_double_exponential(5, rho=0.0)

    def test_json(self, tmp_path):
        """Save and load keep values and rho."""
        xi = sample_double_exponential(10, rho=1.5, seed=4)
        xi.save(tmp_path / "xi.json")
        back = Potential.load(tmp_path / "xi.json")
        assert back.rho == 1.5
        assert np.array_equal(back.values, xi.values)


class TestScale:
    """Tests for a_L and ball maxima."""

    def test_flat_below_ee(self):
        """a_L = rho for L <= e^e."""
        assert a_scale(10, 2.0) == pytest.approx(2.0)

    def test_million(self):
        """a_{10^6} = loglog 10^6 for rho = 1."""
        assert a_scale(10**6, 1.0) == pytest.approx(2.625792, abs=1e-6)

    def test_invalid_l(self):
        """L must be positive."""
        with pytest.raises(ValueError):
            a_scale(0, 1.0)

    def test_max_in_ball(self, tree, spiked):
        """The spike is the ball maximum."""
        assert max_in_ball(spiked, ball(tree, 0, 2)) == (0, 10.0)

    def test_max_ties_smallest_id(self, tree):
        """Ties go to the smallest id."""
        xi = Potential.zeros(tree.n).with_values([5, 3], 1.0)
        assert max_in_ball(xi, ball(tree, 0, 2))[0] == 3

    def test_deviation_bound(self):
        """2 rho log r / (theta r)."""
        assert maximum_deviation_bound(10, 1.0, math.log(2)) == pytest.approx(
            2 * math.log(10) / (10 * math.log(2)))


# =============================================================================
# Island Tests
# =============================================================================

class TestIslands:
    """Tests for exceedance sets and their components."""

    def test_zero_potential_no_islands(self, tree):
        """No vertex exceeds a_L - 2A when xi = 0 and a_L > 2A."""
        d = decompose_islands(Potential.zeros(tree.n), ball(tree, 0, 8), LandscapeConfig(A=0.5))
        assert d.components == []
        assert len(d.Pi) == 0

    def test_single_spike(self, tree, spiked):
        """A spike gives one island: the spike and its neighbourhood."""
        d = decompose_islands(spiked, ball(tree, 0, 5), LandscapeConfig(A=0.1))
        assert list(d.Pi) == [0]
        assert len(d.components) == 1
        island = d.components[0]
        assert island.peak == 0
        assert island.peak_value == 10.0
        # S_5 = (log 5)^0.5 rounds down to one step
        assert list(island.vertices) == [0, 1, 2, 3]

    def test_two_spikes_two_islands(self, tree):
        """Distant spikes form separate islands."""
        b = ball(tree, 0, 5)
        far = [int(x) for x in b.boundary[:1]] + [int(b.boundary[-1])]
        xi = Potential.zeros(tree.n).with_values(far, 10.0)
        d = decompose_islands(xi, b, LandscapeConfig(A=0.1))
        assert len(d.components) == 2
        assert sorted(isl.peak for isl in d.components) == sorted(far)

    def test_masks(self, tree, spiked):
        """Pi is inside D."""
        d = decompose_islands(spiked, ball(tree, 0, 5), LandscapeConfig(A=0.1))
        assert np.all(d.in_d()[d.in_pi()])

    def test_radius_one_rejected(self, tree, spiked):
        """log r must be positive."""
        with pytest.raises(PreconditionViolated):
            decompose_islands(spiked, ball(tree, 0, 1))

    def test_island_stats(self, tree, spiked):
        """Rows carry the bound columns and no violations for one spike."""
        d = decompose_islands(spiked, ball(tree, 0, 5), LandscapeConfig(A=0.1))
        rows = island_stats(d)
        assert len(rows) == 1
        assert rows[0].size == 4
        assert rows[0].diameter == 2
        assert rows[0].bound_high == pytest.approx(10.0)
        assert rows[0].violations == []
        frame = island_frame(rows)
        assert list(frame["peak"]) == [0]


class TestPeakCounts:
    """Tests for path peak statistics."""

    def test_path_counts(self, tree, spiked):
        """Root spike counted once in the support, once as a step."""
        path = VertexPath(tree, np.array([1, 0, 2, 0]))
        counts = path_peak_counts(spiked, path, ball(tree, 0, 5), LandscapeConfig(A=0.1))
        assert counts.N_eps == 1
        assert counts.N_high == 1
        # steps at vertices 1, 0, 2: two below (1 - eps) a_L
        assert counts.M_eps == 2

    def test_high_threshold_below_zero(self, tree, spiked):
        """With a_L - 2A < 0 every support point is high."""
        path = VertexPath(tree, np.array([1, 0, 2, 0]))
        b = ball(tree, 0, 5)
        assert a_scale(b.L, 1.0) - 2.0 * LandscapeConfig().A < 0
        assert path_peak_counts(spiked, path, b).N_high == 3

    def test_peak_count(self, spiked):
        """Last point is excluded."""
        assert peak_count(spiked, np.array([1, 2, 0]), 0.5) == 2
        assert peak_count(spiked, np.array([0, 1]), 0.5) == 0
