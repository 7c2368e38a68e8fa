"""
Tests for the variational constant chi: primal, boundary-conditioned and dual.

Test Coverage:
    - variational: SimplexMeasure, I_functional, J_functional, functional_gradient,
      dual_gradient, chi_primal, chi_restricted, chi_boundary, chi_dual,
      DualPotential, extrapolate, chi_ball_sequence

Run with: pytest tests/test_variational.py -v
"""

import math

import numpy as np
import pytest

from src.config import TreeSpec
from src.errors import InfeasibleBoundary, PreconditionViolated
from src.graphs import ball, build_graph, homogeneous_tree
from src.spectral import assemble, principal_eigenpair
from src.variational import (
    DualPotential,
    I_functional,
    J_functional,
    SimplexMeasure,
    chi_ball_sequence,
    chi_boundary,
    chi_dual,
    chi_primal,
    chi_restricted,
    dual_gradient,
    extrapolate,
    functional_gradient,
    functional_value,
)


# =============================================================================
# Test Fixtures
# =============================================================================

def random_tree(n, seed):
    """Recursive tree: vertex i attaches to a uniform earlier vertex."""
    rng = np.random.default_rng(seed)
    return build_graph([(int(rng.integers(0, i)), i) for i in range(1, n)])


@pytest.fixture
def k2():
    """Single edge."""
    return build_graph([(0, 1)])


@pytest.fixture
def star3():
    """Star with center 0 and three leaves."""
    return build_graph([(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def path4():
    """Path 0 - 1 - 2 - 3."""
    return build_graph([(0, 1), (1, 2), (2, 3)])


# =============================================================================
# Functional Tests
# =============================================================================

class TestFunctionals:
    """Tests for I, J and their gradients."""

    def test_measure_validation(self):
        """Weights must be a probability vector."""
        with pytest.raises(ValueError):
            SimplexMeasure(np.array([0.5, 0.6]))
        with pytest.raises(ValueError):
            SimplexMeasure(np.array([1.5, -0.5]))

    def test_measure_support(self):
        """Support of a point mass."""
        assert SimplexMeasure.delta(4, 2).support.tolist() == [2]
        assert SimplexMeasure.from_sqrt(np.array([1.0, 1.0])).weights.tolist() == [0.5, 0.5]

    def test_energy_k2(self, k2):
        """I(1/4, 3/4) = 1 - sqrt(3)/2 on an edge."""
        assert I_functional(k2, np.array([0.25, 0.75])) == pytest.approx(1 - math.sqrt(3) / 2)

    def test_entropy(self):
        """J of the uniform measure is log n; point masses have zero entropy."""
        assert J_functional(SimplexMeasure.uniform(4)) == pytest.approx(math.log(4))
        assert J_functional(SimplexMeasure.delta(4, 0)) == 0.0

    def test_functional_value(self, k2):
        """F = I + rho J."""
        p = SimplexMeasure.uniform(2)
        assert functional_value(k2, p, 2.0) == pytest.approx(2 * math.log(2))

    def test_functional_gradient(self, path4):
        """Gradient matches central differences."""
        s = np.array([0.3, 0.5, 0.6, 0.4])
        _, grad = functional_gradient(path4, s, 1.0)
        h = 1e-6
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            fd = (functional_gradient(path4, s + e, 1.0)[0]
                  - functional_gradient(path4, s - e, 1.0)[0]) / (2 * h)
            assert grad[i] == pytest.approx(fd, abs=1e-6)

    def test_dual_gradient(self, star3):
        """d lambda / d q(x) = phi(x)^2."""
        q = np.array([0.4, -0.2, 0.1, 0.0])
        grad = dual_gradient(assemble(star3, range(4), q))
        h = 1e-6
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            up = principal_eigenpair(assemble(star3, range(4), q + e)).value
            down = principal_eigenpair(assemble(star3, range(4), q - e)).value
            assert grad[i] == pytest.approx((up - down) / (2 * h), abs=1e-6)
        assert grad.sum() == pytest.approx(1.0)


# =============================================================================
# Primal Tests
# =============================================================================

class TestPrimal:
    """Tests for the multi-start primal minimization."""

    def test_single_vertex(self):
        """chi of one vertex is zero."""
        assert chi_primal(build_graph([]), 1.0).value == 0.0

    def test_k2_uniform_minimizer(self, k2):
        """For rho = 1/2 the uniform measure wins: chi = rho log 2."""
        result = chi_primal(k2, 0.5)
        assert result.value == pytest.approx(0.5 * math.log(2), abs=1e-8)
        assert result.minimizer == pytest.approx([0.5, 0.5], abs=1e-3)
        assert result.method == "primal"

    def test_restricted_to_root(self):
        """A point mass on the root of T_3 costs its degree."""
        g = homogeneous_tree(3, 2)
        assert chi_restricted(g, [0], 1.0).value == pytest.approx(3.0)

    def test_upper_bounded_by_degree(self, star3):
        """chi <= min degree (point masses are admissible)."""
        assert chi_primal(star3, 1.0).value <= 1.0 + 1e-9


# =============================================================================
# Boundary-Conditioned Tests
# =============================================================================

class TestBoundary:
    """Tests for chi with a prescribed mass at one vertex."""

    def test_k2_half(self, k2):
        """b = 1/2 on K_2 forces the uniform measure."""
        assert chi_boundary(k2, 0, 0.5, 1.0) == pytest.approx(math.log(2), abs=1e-8)

    def test_k2_full(self, k2):
        """b = 1 is the point mass: its degree."""
        assert chi_boundary(k2, 0, 1.0, 1.0) == 1.0

    def test_k2_empty(self, k2):
        """b = 0 puts all mass on the other end."""
        assert chi_boundary(k2, 0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-8)

    def test_out_of_range(self, k2):
        """b must lie in [0, 1]."""
        with pytest.raises(InfeasibleBoundary):
            chi_boundary(k2, 0, 1.5, 1.0)

    def test_single_vertex_infeasible(self):
        """A lone vertex must carry all the mass."""
        with pytest.raises(InfeasibleBoundary):
            chi_boundary(build_graph([]), 0, 0.5, 1.0)


# =============================================================================
# Dual Tests
# =============================================================================

class TestDual:
    """Tests for the dual fixed point and primal-dual agreement."""

    def test_k2(self, k2):
        """The uniform potential is already the fixed point."""
        assert chi_dual(k2, None, 0.5).value == pytest.approx(0.5 * math.log(2), abs=1e-10)

    def test_domain_point(self):
        """Lambda = {root}: chi_hat = deg(root)."""
        g = homogeneous_tree(3, 2)
        assert chi_dual(g, [0], 1.0).value == pytest.approx(3.0)

    @pytest.mark.parametrize("edges", [
        [(0, 1), (1, 2), (2, 3)],
        [(0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 2), (2, 0), (2, 3)],
    ])
    def test_primal_dual_agree(self, edges):
        """Both characterizations give the same chi on small graphs."""
        g = build_graph(edges)
        assert chi_primal(g, 1.0).value == pytest.approx(chi_dual(g, None, 1.0).value, abs=1e-5)

    def test_primal_dual_tree_ball(self):
        """Agreement on a restricted T_3 ball."""
        g = homogeneous_tree(3, 3)
        dom = ball(g, 0, 2).members
        primal = chi_restricted(g, dom, 1.5).value
        assert primal == pytest.approx(chi_dual(g, dom, 1.5).value, abs=1e-5)

    def test_whole_ball_of_truncated_tree(self):
        """A ball covering the whole truncation is not stuck at the uniform potential."""
        g = homogeneous_tree(3, 3)
        dom = ball(g, 0, 3).members
        assert len(dom) == g.n == 22
        dual = chi_dual(g, dom, 1.0).value
        assert dual < math.log(22) - 1.0
        assert dual == pytest.approx(chi_restricted(g, dom, 1.0).value, abs=1e-5)

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("rho", [0.3, 1.0, 3.0])
    def test_random_trees_full_domain(self, seed, rho):
        """Dual and primal agree on random trees with Lambda = V."""
        g = random_tree(5 + (3 * seed) % 9, seed)
        primal = chi_restricted(g, np.arange(g.n), rho).value
        dual = chi_dual(g, None, rho).value
        assert dual == pytest.approx(primal, abs=1e-5)
        if rho >= 0.5:
            # uniform is a saddle once lambda_2(L) <= 1 < 2 rho
            assert dual < rho * math.log(g.n) - 1e-6

    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("rho", [0.3, 1.0, 3.0])
    def test_random_trees_subdomain(self, seed, rho):
        """Agreement with the restricted primal when two vertices are removed from Lambda."""
        g = random_tree(6 + seed, 100 + seed)
        dom = np.arange(g.n - 2)
        primal = chi_restricted(g, dom, rho).value
        assert chi_dual(g, dom, rho).value == pytest.approx(primal, abs=1e-5)

    def test_dual_potential_admissible(self, star3):
        """sum e^{q/rho} <= 1 with the sentinel outside Lambda."""
        result = chi_dual(star3, [0, 1, 2], 1.0)
        sentinel = -1e6
        assert result.minimizer[3] == sentinel
        dual = DualPotential.from_result(result, 1.0, sentinel)
        assert dual.is_admissible()
        assert dual.constraint() == pytest.approx(1.0, abs=1e-6)

    def test_json(self, k2):
        """Sentinels are encoded in the export."""
        data = chi_dual(k2, [0], 1.0).to_json_dict(sentinel=-1e6)
        assert data["method"] == "dual"
        assert data["value"] == pytest.approx(1.0)


# =============================================================================
# Ball Sequence Tests
# =============================================================================

class TestBallSequence:
    """Tests for chi_hat on growing balls."""

    def test_extrapolate_single(self):
        """One value has infinite uncertainty."""
        assert extrapolate([1.2]) == (1.2, math.inf)

    def test_extrapolate_geometric(self):
        """Aitken recovers the limit of 1 + 2^-k."""
        limit, err = extrapolate([1.5, 1.25, 1.125])
        assert limit == pytest.approx(1.0)
        assert err == pytest.approx(0.125)

    def test_extrapolate_two(self):
        """Two values return the last with the last decrement."""
        assert extrapolate([2.0, 1.5]) == (1.5, 0.5)

    def test_monotone_homogeneous(self):
        """chi_hat on B_r(T_3) is non-increasing in r."""
        seq = chi_ball_sequence(TreeSpec(kind="homogeneous", d=3), 1.0, [0, 1, 2, 3])
        assert seq.monotone
        assert seq.values[0] == pytest.approx(3.0)
        assert seq.extrapolated <= seq.values[-1] + 1e-9
        assert list(seq.to_frame()["r"]) == [0, 1, 2, 3]

    def test_ball_reaches_boundary(self):
        """Balls must stay inside the truncation."""
        with pytest.raises(PreconditionViolated):
            chi_ball_sequence(homogeneous_tree(3, 2), 1.0, [2])
