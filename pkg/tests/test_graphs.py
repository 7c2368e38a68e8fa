"""
Tests for graph construction, balls, glueing and isomorphism.

Test Coverage:
    - graphs: build_graph, ball, truncate, VertexPath, shortest_path,
      homogeneous_tree, half_homogeneous_tree, glue_two, glue_star,
      attach_copies, realize_tree, save_graph/load_graph
    - isomorphism: canonical_code, tree_isomorphism, rooted_isomorphic, ball_code

Run with: pytest tests/test_graphs.py -v
"""

import numpy as np
import pytest

from src.config import TreeSpec
from src.errors import (
    DegreeBoundExceeded,
    Disconnected,
    DuplicateEdge,
    GraphError,
    PathNotInGraph,
    SelfLoop,
    SizeOverflow,
)
from src.graphs import (
    VertexPath,
    attach_copies,
    ball,
    build_graph,
    distances_from,
    eccentricity,
    glue_star,
    glue_two,
    half_homogeneous_tree,
    homogeneous_tree,
    induced_subgraph,
    load_graph,
    realize_tree,
    save_graph,
    shortest_path,
    truncate,
)
from src.isomorphism import (
    ball_code,
    canonical_code,
    graphs_isomorphic,
    rooted_isomorphic,
    tree_isomorphism,
)


# =============================================================================
# Test Fixtures
# =============================================================================

@pytest.fixture
def path4():
    """Path 0-1-2-3 rooted at 0."""
    return build_graph([(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def cycle4():
    """Four-cycle rooted at 0."""
    return build_graph([(0, 1), (1, 2), (2, 3), (3, 0)])


@pytest.fixture
def star3():
    """Star with center 0 and three leaves."""
    return build_graph([(0, 1), (0, 2), (0, 3)])


# =============================================================================
# build_graph Tests
# =============================================================================

class TestBuildGraph:
    """Tests for edge-list validation."""

    def test_single_vertex(self):
        """Empty edge list gives the single isolated root."""
        g = build_graph([])
        assert g.n == 1
        assert g.num_edges == 0
        assert g.is_tree

    def test_sorted_adjacency(self):
        """Neighbour lists are sorted whatever the edge order."""
        g = build_graph([(0, 3), (0, 1), (2, 0)])
        assert list(g.neighbors(0)) == [1, 2, 3]

    def test_degrees(self, path4):
        """Degree array matches the path."""
        assert list(path4.degrees) == [1, 2, 2, 1]

    def test_self_loop(self):
        """Self-loops are rejected."""
        with pytest.raises(SelfLoop):
            build_graph([(0, 1), (1, 1)])

    def test_duplicate_edge(self):
        """Edges listed twice in either orientation are rejected."""
        with pytest.raises(DuplicateEdge):
            build_graph([(0, 1), (1, 0)])

    def test_degree_bound(self, star3):
        """A degree above d_max is rejected."""
        with pytest.raises(DegreeBoundExceeded):
            build_graph([(0, 1), (0, 2), (0, 3)], d_max=2)

    def test_disconnected(self):
        """Unreachable vertices are rejected by default."""
        with pytest.raises(Disconnected):
            build_graph([(0, 1), (2, 3)])

    def test_disconnected_allowed(self):
        """require_connected=False keeps every vertex."""
        g = build_graph([(0, 1), (2, 3)], require_connected=False)
        assert g.n == 4
        assert not g.is_connected

    def test_bad_index(self):
        """Negative indices raise GraphError."""
        with pytest.raises(GraphError):
            build_graph([(-1, 0)])

    def test_graph_errors_are_value_errors(self):
        """Graph errors can be caught as ValueError."""
        with pytest.raises(ValueError):
            build_graph([(0, 0)])

    def test_edges_canonical(self, cycle4):
        """Edges come out with u < v in lexicographic order."""
        assert cycle4.edges.tolist() == [[0, 1], [0, 3], [1, 2], [2, 3]]

    def test_cycle_is_not_tree(self, cycle4):
        """A cycle is connected but not a tree."""
        assert cycle4.is_connected
        assert not cycle4.is_tree


# =============================================================================
# Distance and Ball Tests
# =============================================================================

class TestBalls:
    """Tests for BFS distances and balls."""

    def test_distances(self, path4):
        """Distances along a path."""
        assert list(distances_from(path4, 0)) == [0, 1, 2, 3]

    def test_distances_truncated(self, path4):
        """max_radius leaves far vertices at -1."""
        assert list(distances_from(path4, 0, 1)) == [0, 1, -1, -1]

    def test_eccentricity(self, path4):
        """Eccentricity of a path end is its length."""
        assert eccentricity(path4, 0) == 3
        assert eccentricity(path4, 1) == 2

    def test_ball_sizes_homogeneous(self):
        """|B_r| in T_3 is 1, 4, 10, 22."""
        g = homogeneous_tree(3, 3)
        assert [ball(g, 0, r).L for r in range(4)] == [1, 4, 10, 22]

    def test_ball_boundary(self, path4):
        """Boundary is the distance-r shell."""
        b = ball(path4, 1, 1)
        assert list(b.members) == [0, 1, 2]
        assert list(b.boundary) == [0, 2]

    def test_ball_contains(self, path4):
        """Membership test."""
        b = ball(path4, 0, 1)
        assert 1 in b
        assert 3 not in b

    def test_ball_subgraph(self, path4):
        """Induced ball subgraph keeps the center as root."""
        sub, verts = ball(path4, 2, 1).subgraph()
        assert list(verts) == [1, 2, 3]
        assert sub.root == 1
        assert sub.n == 3

    def test_ball_bad_center(self, path4):
        """Centers outside the graph raise GraphError."""
        with pytest.raises(GraphError):
            ball(path4, 10, 1)

    def test_negative_radius(self, path4):
        """Negative radius is rejected."""
        with pytest.raises(ValueError):
            ball(path4, 0, -1)

    def test_induced_subgraph_root_missing(self, path4):
        """The root must be an induced vertex."""
        with pytest.raises(GraphError):
            induced_subgraph(path4, [1, 2], 0)

    def test_truncate_marks_cut_vertices(self):
        """Truncating T_3 at radius 1 leaves the three leaves on the boundary."""
        g = truncate(homogeneous_tree(3, 3), 1)
        assert g.n == 4
        assert g.boundary == frozenset({1, 2, 3})


# =============================================================================
# Path Tests
# =============================================================================

class TestPaths:
    """Tests for nearest-neighbour paths."""

    def test_valid_path(self, path4):
        """A walk along edges is accepted."""
        p = VertexPath(path4, np.array([0, 1, 2, 1]))
        assert p.length == 3
        assert list(p.support) == [0, 1, 2]

    def test_non_edge_step(self, path4):
        """A jump is rejected."""
        with pytest.raises(PathNotInGraph):
            VertexPath(path4, np.array([0, 2]))

    def test_empty_path(self, path4):
        """A path needs a vertex."""
        with pytest.raises(PathNotInGraph):
            VertexPath(path4, np.array([], dtype=int))

    def test_shortest_path(self, cycle4):
        """Shortest path across the cycle has length 2."""
        p = shortest_path(cycle4, 0, 2)
        assert p.length == 2
        assert p[0] == 0 and p[-1] == 2


# =============================================================================
# Deterministic Tree Tests
# =============================================================================

class TestTrees:
    """Tests for truncated homogeneous and half-homogeneous trees."""

    def test_homogeneous_sizes(self):
        """T_3 at R = 2, 3 has 10 and 22 vertices."""
        assert homogeneous_tree(3, 2).n == 10
        assert homogeneous_tree(3, 3).n == 22

    def test_homogeneous_degrees(self):
        """Internal degrees are d, leaves sit on the boundary."""
        g = homogeneous_tree(4, 2)
        inner = [x for x in range(g.n) if x not in g.boundary]
        assert all(g.degree(x) == 4 for x in inner)
        assert all(g.degree(x) == 1 for x in g.boundary)

    def test_half_homogeneous(self):
        """Half-homogeneous T_3 at R = 2 has 7 vertices and root degree 2."""
        g = half_homogeneous_tree(3, 2)
        assert g.n == 7
        assert g.degree(g.root) == 2

    def test_radius_zero(self):
        """R = 0 gives a single vertex."""
        assert homogeneous_tree(3, 0).n == 1
        assert half_homogeneous_tree(3, 0).n == 1

    def test_budget(self):
        """Trees beyond the budget raise SizeOverflow."""
        with pytest.raises(SizeOverflow):
            homogeneous_tree(3, 10, budget=100)

    def test_degree_two(self):
        """T_2 truncated at R is a path with 2R + 1 vertices."""
        assert homogeneous_tree(2, 4).n == 9

    def test_realize_homogeneous(self):
        """realize_tree matches homogeneous_tree."""
        assert realize_tree(TreeSpec(kind="homogeneous", d=3), 2) == homogeneous_tree(3, 2)

    def test_realize_glued_roots(self):
        """Two half-homogeneous T_3 glued root-to-root give T_3."""
        half = TreeSpec(kind="half-homogeneous", d=3)
        spec = TreeSpec(kind="glued", components=[half, half], join="roots")
        g = realize_tree(spec, 2)
        assert g.degree(g.root) == 3
        assert canonical_code(g) == canonical_code(homogeneous_tree(3, 2))
        assert g.is_tree


# =============================================================================
# Glueing Tests
# =============================================================================

class TestGlueing:
    """Tests for glue_two, glue_star and attach_copies."""

    def test_glue_two(self, path4, star3):
        """Union plus one edge."""
        g = glue_two(path4, 3, star3, 1)
        assert g.n == 8
        assert g.num_edges == 7
        assert g.has_edge(3, 5)
        assert g.root == path4.root

    def test_glue_two_degree_bound(self, star3):
        """Glueing at a saturated vertex raises."""
        with pytest.raises(DegreeBoundExceeded):
            glue_two(star3, 0, star3, 0, d_max=3)

    def test_glue_two_homogeneous_roots(self):
        """Two T_3(2) truncations glued root-to-root under d_max = 4 give 20 vertices."""
        t = homogeneous_tree(3, 2)
        g = glue_two(t, 0, t, 0, d_max=4)
        assert g.n == 20
        assert g.is_tree
        assert g.degree(0) == 4
        assert g.degree(10) == 4
        assert g.d_max == 4

    def test_glue_two_default_bound(self):
        """Without a declared bound the saturated roots cannot be glued."""
        t = homogeneous_tree(3, 2)
        with pytest.raises(DegreeBoundExceeded):
            glue_two(t, 0, t, 0)

    def test_glue_star(self, path4):
        """New hub 0 joined to each component."""
        g = glue_star([(path4, 0), (path4, 0)])
        assert g.n == 9
        assert g.root == 0
        assert list(g.neighbors(0)) == [1, 5]

    def test_attach_copies(self, path4):
        """Copies hang off every site."""
        leaf = build_graph([])
        g = attach_copies(path4, [0, 3], leaf, 2, d_max=3)
        assert g.n == 8
        assert g.degree(0) == 3
        assert g.degree(3) == 3

    def test_attach_copies_bound(self, path4):
        """Attaching too many copies raises."""
        with pytest.raises(DegreeBoundExceeded):
            attach_copies(path4, [1], build_graph([]), 2, d_max=3)


# =============================================================================
# Isomorphism Tests
# =============================================================================

class TestIsomorphism:
    """Tests for AHU codes and rooted ball isomorphism."""

    def test_canonical_code(self, star3):
        """A star's code lists its leaves."""
        assert canonical_code(star3) == "(()()())"

    def test_code_is_label_invariant(self):
        """Relabelled trees share a code."""
        a = build_graph([(0, 1), (1, 2), (0, 3)])
        b = build_graph([(0, 2), (2, 3), (0, 1)])
        assert canonical_code(a) == canonical_code(b)

    def test_code_rejects_cycles(self, cycle4):
        """Codes are defined for trees only."""
        with pytest.raises(ValueError):
            canonical_code(cycle4)

    def test_tree_isomorphism_mapping(self):
        """The mapping preserves edges."""
        a = build_graph([(0, 1), (1, 2), (0, 3)])
        b = build_graph([(0, 2), (2, 3), (0, 1)])
        m = tree_isomorphism(a, 0, b, 0)
        assert m is not None
        assert all(b.has_edge(m[int(u)], m[int(v)]) for u, v in a.edges)

    def test_tree_isomorphism_none(self, path4, star3):
        """Non-isomorphic trees give None."""
        assert tree_isomorphism(path4, 0, star3, 0) is None

    def test_rooted_isomorphic_balls(self):
        """Every vertex ball of radius 1 inside T_3 matches the root ball."""
        g = homogeneous_tree(3, 3)
        assert rooted_isomorphic(ball(g, 0, 1), ball(g, 1, 1))

    def test_root_matters(self, path4):
        """The path rooted at an end differs from the path rooted inside."""
        assert not rooted_isomorphic(ball(path4, 0, 3), ball(path4, 1, 3))

    def test_cycle_balls(self, cycle4):
        """Cycle balls go through the general matcher."""
        assert rooted_isomorphic(ball(cycle4, 0, 2), ball(cycle4, 1, 2))
        assert graphs_isomorphic(cycle4, cycle4)

    def test_ball_code_prefix(self, cycle4, path4):
        """Cyclic balls are labelled with a 'G:' hash."""
        assert ball_code(ball(cycle4, 0, 2)).startswith("G:")
        assert ball_code(ball(path4, 0, 1)) == "(())"


# =============================================================================
# Serialization Tests
# =============================================================================

class TestSerialization:
    """Tests for graph JSON files."""

    def test_save_load(self, tmp_path):
        """A truncated tree keeps its boundary marker through JSON."""
        g = homogeneous_tree(3, 2)
        save_graph(g, tmp_path / "g.json")
        assert load_graph(tmp_path / "g.json") == g
