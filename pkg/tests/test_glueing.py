"""
Tests for glueing identities and the minimal-tree comparison.

Test Coverage:
    - glueing: star_glue_formula, glue_two_inequality, propagation_check,
      comparison_tree, tree_catalog, minimal_tree_check, half_tree_sandwich

Run with: pytest tests/test_glueing.py -v
"""

import pytest

from src.config import VariationalOptions
from src.glueing import (
    comparison_tree,
    glue_two_inequality,
    half_tree_sandwich,
    minimal_tree_check,
    propagation_check,
    star_glue_formula,
    tree_catalog,
)
from src.graphs import build_graph, glue_star, homogeneous_tree
from src.isomorphism import canonical_code
from src.variational import chi_primal


# =============================================================================
# Test Fixtures
# =============================================================================

@pytest.fixture
def k2():
    """Single edge."""
    return build_graph([(0, 1)])


@pytest.fixture
def point():
    """Single vertex."""
    return build_graph([])


@pytest.fixture
def grid_opts():
    """Star-formula grid with a loose refinement tolerance."""
    return VariationalOptions(grid_points=33, grid_refinements=2, grid_tol=5e-3)


# =============================================================================
# Star Formula Tests
# =============================================================================

class TestStarFormula:
    """Tests for chi of a star built from boundary-conditioned components."""

    def test_one_component(self, k2, grid_opts):
        """Hub plus K_2 is a path on three vertices."""
        star = glue_star([(k2, 0)], d_max=2)
        expected = chi_primal(star, 1.0).value
        result = star_glue_formula([(k2, 0)], 1.0, grid_opts)
        assert result.value == pytest.approx(expected, abs=5e-3)
        assert result.a.sum() <= 1.0

    def test_two_components(self, k2, point, grid_opts):
        """Hub joined to K_2 and to a lone vertex is a path on four vertices."""
        comps = [(k2, 0), (point, 0)]
        expected = chi_primal(glue_star(comps, d_max=2), 1.0).value
        result = star_glue_formula(comps, 1.0, grid_opts)
        assert result.value == pytest.approx(expected, abs=5e-3)

    def test_empty(self):
        """At least one component."""
        with pytest.raises(ValueError):
            star_glue_formula([], 1.0)


# =============================================================================
# Glue-Two and Propagation Tests
# =============================================================================

class TestGlueTwo:
    """Tests for the one-edge glueing inequality and propagation."""

    def test_two_edges(self, k2):
        """Joining two edges gives a path on four vertices."""
        report = glue_two_inequality(k2, 1, k2, 0, 0.5)
        assert report.holds
        assert report.chi_first == pytest.approx(report.chi_second)

    def test_tree_and_point(self, point):
        """A star against its pieces."""
        star = build_graph([(0, 1), (0, 2)])
        assert glue_two_inequality(star, 1, point, 0, 1.5).holds

    def test_propagation_consistent(self, k2):
        """The implication is never falsified, at trivial and tight levels."""
        comps = [(k2, 0), (k2, 0), (k2, 0)]
        first = propagation_check(comps, 1.0, M=0.0, C=0.0)
        assert first.k == 2
        assert first.hypotheses_hold
        assert first.consistent
        M = min(first.chi_leave_one_out)
        C = max(M - min(first.chi_components), 0.0)
        assert propagation_check(comps, 1.0, M=M, C=C).consistent

    def test_propagation_needs_two(self, k2):
        """A single component has nothing to propagate."""
        with pytest.raises(ValueError):
            propagation_check([(k2, 0)], 1.0, M=0.0, C=0.0)


# =============================================================================
# Minimal Tree Tests
# =============================================================================

class TestMinimalTree:
    """Tests for comparison trees, catalogs and the minimal-tree sweep."""

    def test_comparison_of_homogeneous(self):
        """Completing B_2(T_3) with two leaves per shell vertex gives T_3(3) back."""
        g = homogeneous_tree(3, 4)
        cmp = comparison_tree(g, 2, 3)
        assert cmp.n == 22
        assert canonical_code(cmp) == canonical_code(homogeneous_tree(3, 3))

    def test_catalog_order(self):
        """Homogeneous trees first, then glued pairs, then GW samples."""
        entries = tree_catalog(3, [3, 4], 1, 5, seed=2)
        assert [e.kind for e in entries] == [
            "homogeneous-3", "homogeneous-4", "glued-3-4", "gw-0", "gw-1"]
        assert [e.tree_id for e in entries] == list(range(5))

    def test_catalog_min_degree(self):
        """d_min must be the smallest degree of the set."""
        with pytest.raises(ValueError):
            tree_catalog(4, [3, 4], 1, 3)

    def test_minimal_tree(self):
        """T_3 minimizes chi_hat on B_1 among trees with degrees in {3, 4}."""
        report = minimal_tree_check(3, [3, 4], 1.0, 1, 4, seed=1)
        assert report.asserted
        assert report.minimum_at_reference
        assert report.comparison_holds
        assert report.violations == 0
        assert report.rows.iloc[0]["gap_to_min"] == pytest.approx(0.0, abs=1e-6)
        assert report.sandwich is not None and report.sandwich.holds

    def test_small_rho_not_asserted(self):
        """Below 1/log(d_min + 1) the sweep reports data only."""
        report = minimal_tree_check(3, [3, 4], 0.5, 1, 3)
        assert not report.asserted
        assert report.notes

    def test_half_tree_sandwich(self):
        """chi_half <= chi_full <= chi_half + 1."""
        out = half_tree_sandwich(3, 1.0, 2)
        assert out.holds
        assert out.chi_half <= out.chi_full
