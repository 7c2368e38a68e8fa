"""
Finite rooted graphs, balls and deterministic tree constructions.

Graphs are simple, undirected and rooted. Vertices are dense integer indices
``0 .. n-1`` and adjacency is stored in compressed sparse row form with every
neighbour slice sorted, so a graph is immutable, cheap to share between
workers and serializes identically on every run.

Infinite trees (homogeneous trees, Galton-Watson trees) only ever exist as
truncations to a radius. The vertices on the truncation shell are recorded in
``RootedGraph.boundary``: their degree is incomplete, so solvers treat them as
lying outside every domain.

Functions:
    - build_graph: Validate an edge list into a RootedGraph
    - ball: BFS ball of radius r around a vertex
    - homogeneous_tree / half_homogeneous_tree: Truncated regular trees
    - glue_two / glue_star / attach_copies: Glueing constructions
    - realize_tree: Truncation of a TreeSpec
"""

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import breadth_first_order

from .config import VERTEX_BUDGET, TreeSpec
from .errors import (
    DegreeBoundExceeded,
    Disconnected,
    DuplicateEdge,
    GraphError,
    PathNotInGraph,
    SelfLoop,
    SizeOverflow,
)

logger = logging.getLogger(__name__)


# =============================================================================
# Rooted graph
# =============================================================================

@dataclass(frozen=True, eq=False)
class RootedGraph:
    """
    Simple undirected rooted graph in CSR form.

    Attributes:
        indptr: Row pointer, length n + 1.
        indices: Concatenated sorted neighbour lists.
        root: Root vertex.
        d_max: Declared degree bound; every degree is at most d_max.
        boundary: Truncation shell (vertices whose degree is incomplete).
    """

    indptr: np.ndarray
    indices: np.ndarray
    root: int
    d_max: int
    boundary: frozenset = frozenset()

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.diff(self.indptr)
        deg.setflags(write=False)
        return deg

    def degree(self, x: int) -> int:
        return int(self.indptr[x + 1] - self.indptr[x])

    def neighbors(self, x: int) -> np.ndarray:
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    def has_edge(self, x: int, y: int) -> bool:
        nbrs = self.neighbors(x)
        i = int(np.searchsorted(nbrs, y))
        return i < len(nbrs) and int(nbrs[i]) == y

    @property
    def adjacency(self) -> list[tuple[int, ...]]:
        """Per-vertex sorted neighbour lists."""
        return [tuple(int(y) for y in self.neighbors(x)) for x in range(self.n)]

    @cached_property
    def edges(self) -> np.ndarray:
        """(E, 2) array of edges with u < v, sorted lexicographically."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        mask = rows < self.indices
        out = np.column_stack([rows[mask], self.indices[mask]])
        out.setflags(write=False)
        return out

    @cached_property
    def adjacency_matrix(self) -> sparse.csr_matrix:
        data = np.ones(len(self.indices), dtype=float)
        return sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    @cached_property
    def is_connected(self) -> bool:
        order = breadth_first_order(self.adjacency_matrix, self.root, directed=False,
                                    return_predecessors=False)
        return len(order) == self.n

    @property
    def is_tree(self) -> bool:
        return self.num_edges == self.n - 1 and self.is_connected

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RootedGraph):
            return NotImplemented
        return (
            self.root == other.root
            and self.d_max == other.d_max
            and self.boundary == other.boundary
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (f"RootedGraph(n={self.n}, edges={self.num_edges}, root={self.root}, "
                f"d_max={self.d_max}, boundary={len(self.boundary)})")

    def to_json_dict(self) -> dict:
        data = {
            "n": int(self.n),
            "root": int(self.root),
            "edges": [[int(u), int(v)] for u, v in self.edges],
            "d_max": int(self.d_max),
        }
        if self.boundary:
            data["boundary"] = sorted(int(b) for b in self.boundary)
        return data


def _csr_from_directed(n: int, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """CSR arrays from directed pairs, neighbour slices sorted."""
    order = np.lexsort((cols, rows))
    indices = np.asarray(cols, dtype=np.int64)[order]
    counts = np.bincount(np.asarray(rows, dtype=np.int64), minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indptr.setflags(write=False)
    indices.setflags(write=False)
    return indptr, indices


def _trusted_graph(
    n: int,
    u: np.ndarray,
    v: np.ndarray,
    root: int,
    d_max: int,
    boundary: Iterable[int] = (),
) -> RootedGraph:
    """Graph from edge arrays already known to be simple."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    indptr, indices = _csr_from_directed(n, np.concatenate([u, v]), np.concatenate([v, u]))
    return RootedGraph(indptr, indices, int(root), int(d_max),
                       frozenset(int(b) for b in boundary))


def neighbor_pairs(g: RootedGraph, verts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    All (row, neighbour) pairs for the given vertices.

    Returns:
        Tuple (rows, cols) where ``rows`` indexes into ``verts`` and ``cols`` are
        global neighbour ids, in CSR order.
    """
    verts = np.asarray(verts, dtype=np.int64)
    starts = g.indptr[verts]
    lengths = g.indptr[verts + 1] - starts
    total = int(lengths.sum())
    rows = np.repeat(np.arange(len(verts)), lengths)
    if total == 0:
        return rows, np.zeros(0, dtype=np.int64)
    offsets = np.repeat(starts - np.concatenate([[0], np.cumsum(lengths)[:-1]]), lengths)
    return rows, g.indices[offsets + np.arange(total)]


# =============================================================================
# Construction and validation
# =============================================================================

def build_graph(
    edges: "Sequence[tuple[int, int]] | np.ndarray",
    root: int = 0,
    d_max: Optional[int] = None,
    *,
    n: Optional[int] = None,
    boundary: Iterable[int] = (),
    require_connected: bool = True,
) -> RootedGraph:
    """
    Validate an edge list and build a RootedGraph.

    Args:
        edges: Vertex pairs. May be empty for the single isolated root.
        root: Root vertex.
        d_max: Declared degree bound. Defaults to the largest degree (at least 1).
        n: Vertex count. Defaults to the largest index + 1.
        boundary: Vertices flagged as truncation shell.
        require_connected: Reject graphs not connected from the root.

    Returns:
        RootedGraph with sorted adjacency.

    Raises:
        SelfLoop: An edge (x, x).
        DuplicateEdge: An edge listed twice in either orientation.
        DegreeBoundExceeded: A degree above d_max.
        Disconnected: A vertex unreachable from the root.
        GraphError: Negative or out-of-range indices.

    Examples:
        >>> build_graph([(0, 1)]).n
        2
        >>> build_graph([(0, 1), (1, 0)])
        Traceback (most recent call last):
        DuplicateEdge: ...
    """
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    top = int(arr.max()) + 1 if arr.size else 1
    n = max(top, root + 1) if n is None else int(n)
    if arr.size and (arr.min() < 0 or top > n):
        raise GraphError(f"vertex indices must lie in [0, {n}), got range [{arr.min()}, {top - 1}]")
    if not 0 <= root < n:
        raise GraphError(f"root {root} outside [0, {n})")

    loops = arr[:, 0] == arr[:, 1]
    if loops.any():
        raise SelfLoop(f"self-loop at vertex {int(arr[loops][0, 0])}")

    canon = np.sort(arr, axis=1)
    if len(canon):
        uniq, counts = np.unique(canon, axis=0, return_counts=True)
        if (counts > 1).any():
            u, v = uniq[counts > 1][0]
            raise DuplicateEdge(f"edge ({int(u)}, {int(v)}) appears {int(counts.max())} times")

    degrees = np.bincount(arr.ravel(), minlength=n) if arr.size else np.zeros(n, dtype=np.int64)
    bound = int(d_max) if d_max is not None else max(1, int(degrees.max()))
    if degrees.max() > bound:
        x = int(np.argmax(degrees))
        raise DegreeBoundExceeded(f"vertex {x} has degree {int(degrees[x])} > d_max={bound}")

    g = _trusted_graph(n, canon[:, 0], canon[:, 1], root, bound, boundary)
    if require_connected and not g.is_connected:
        raise Disconnected(f"graph has vertices unreachable from root {root}")
    return g


# =============================================================================
# Distances and balls
# =============================================================================

def distances_from(g: RootedGraph, center: int, max_radius: Optional[int] = None) -> np.ndarray:
    """
    BFS distances from ``center``; -1 marks unreached vertices.

    Args:
        g: Graph.
        center: Source vertex.
        max_radius: Stop after this many layers.
    """
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[center] = 0
    frontier = np.array([center], dtype=np.int64)
    depth = 0
    while frontier.size and (max_radius is None or depth < max_radius):
        _, nbrs = neighbor_pairs(g, frontier)
        nbrs = np.unique(nbrs)
        new = nbrs[dist[nbrs] < 0]
        depth += 1
        dist[new] = depth
        frontier = new
    return dist


def eccentricity(g: RootedGraph, v: int) -> int:
    """Largest distance from v to a reachable vertex."""
    return int(distances_from(g, v).max())


@dataclass(frozen=True, eq=False)
class Ball:
    """
    Ball B_r(center) in a parent graph.

    Attributes:
        graph: Parent graph.
        center: Center vertex.
        radius: Radius r.
        members: Sorted member ids.
        distance: Distance of each member from the center (aligned with members).
    """

    graph: RootedGraph
    center: int
    radius: int
    members: np.ndarray
    distance: np.ndarray

    @property
    def L(self) -> int:
        """Member count L_r."""
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def boundary(self) -> np.ndarray:
        """Vertices at distance exactly r."""
        return self.members[self.distance == self.radius]

    def __contains__(self, x: int) -> bool:
        i = int(np.searchsorted(self.members, x))
        return i < len(self.members) and int(self.members[i]) == x

    def mask(self) -> np.ndarray:
        """Boolean membership mask over the parent's vertices."""
        out = np.zeros(self.graph.n, dtype=bool)
        out[self.members] = True
        return out

    def subgraph(self) -> tuple[RootedGraph, np.ndarray]:
        """Induced subgraph rooted at the center, with its local-to-global map."""
        return induced_subgraph(self.graph, self.members, self.center)


def ball(g: RootedGraph, center: int, r: int) -> Ball:
    """
    BFS-exact ball of radius r around ``center``.

    Args:
        g: Parent graph.
        center: Center vertex.
        r: Radius (>= 0).

    Returns:
        Ball whose members are {x : dist(x, center) <= r}.

    Examples:
        >>> ball(homogeneous_tree(3, 3), 0, 2).L
        10
    """
    if not 0 <= center < g.n:
        raise GraphError(f"center {center} is not a vertex of a graph with {g.n} vertices")
    if r < 0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    dist = distances_from(g, center, r)
    members = np.flatnonzero(dist >= 0)
    members.setflags(write=False)
    return Ball(g, int(center), int(r), members, dist[members])


def induced_subgraph(
    g: RootedGraph, vertices: "Sequence[int] | np.ndarray", root: int
) -> tuple[RootedGraph, np.ndarray]:
    """
    Subgraph induced by ``vertices``, relabelled 0..k-1 in increasing id order.

    Returns:
        Tuple (subgraph, local_to_global). The subgraph keeps g.d_max; the
        boundary marker is carried over for members.
    """
    verts = np.unique(np.asarray(vertices, dtype=np.int64))
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[verts] = np.arange(len(verts))
    if pos[root] < 0:
        raise GraphError(f"root {root} not among the induced vertices")
    rows, cols = neighbor_pairs(g, verts)
    keep = pos[cols] >= 0
    indptr, indices = _csr_from_directed(len(verts), rows[keep], pos[cols[keep]])
    boundary = frozenset(int(pos[b]) for b in g.boundary if pos[b] >= 0)
    return RootedGraph(indptr, indices, int(pos[root]), g.d_max, boundary), verts


def truncate(g: RootedGraph, R: int) -> RootedGraph:
    """Ball of radius R around the root as its own graph; cut vertices join the boundary."""
    b = ball(g, g.root, R)
    sub, verts = b.subgraph()
    cut = np.flatnonzero(sub.degrees < g.degrees[verts])
    return RootedGraph(sub.indptr, sub.indices, sub.root, sub.d_max,
                       frozenset(int(x) for x in cut) | sub.boundary)


# =============================================================================
# Paths
# =============================================================================

@dataclass(frozen=True, eq=False)
class VertexPath:
    """
    Nearest-neighbour path pi_0 ... pi_l in a graph.

    Raises:
        PathNotInGraph: On an unknown vertex or a non-edge step.
    """

    graph: RootedGraph
    vertices: np.ndarray

    def __post_init__(self) -> None:
        verts = np.asarray(self.vertices, dtype=np.int64)
        if verts.ndim != 1 or len(verts) == 0:
            raise PathNotInGraph("a path needs at least one vertex")
        if verts.min() < 0 or verts.max() >= self.graph.n:
            raise PathNotInGraph(f"path vertex outside [0, {self.graph.n})")
        for i, (a, b) in enumerate(zip(verts[:-1], verts[1:])):
            if not self.graph.has_edge(int(a), int(b)):
                raise PathNotInGraph(f"step {i} ({int(a)} -> {int(b)}) is not an edge")
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)

    @property
    def length(self) -> int:
        """Number of steps |pi|."""
        return len(self.vertices) - 1

    @property
    def support(self) -> np.ndarray:
        return np.unique(self.vertices)

    def __iter__(self) -> Iterator[int]:
        return (int(v) for v in self.vertices)

    def __getitem__(self, i: int) -> int:
        return int(self.vertices[i])


def shortest_path(g: RootedGraph, source: int, target: int) -> VertexPath:
    """A shortest path from BFS predecessors."""
    _, pred = breadth_first_order(g.adjacency_matrix, source, directed=False,
                                  return_predecessors=True)
    if target != source and pred[target] < 0:
        raise Disconnected(f"{target} unreachable from {source}")
    out = [target]
    while out[-1] != source:
        out.append(int(pred[out[-1]]))
    return VertexPath(g, np.asarray(out[::-1]))


# =============================================================================
# Deterministic trees
# =============================================================================

def _tree_size(root_children: int, child_count: int, R: int) -> int:
    total, level = 1, 1
    for depth in range(R):
        level *= root_children if depth == 0 else child_count
        total += level
        if level == 0:
            break
    return total


def _branching_tree(root_children: int, child_count: int, R: int, d_max: int,
                    budget: int) -> RootedGraph:
    size = _tree_size(root_children, child_count, R)
    if size > budget:
        raise SizeOverflow(f"tree with {size} vertices exceeds vertex budget {budget}")
    us, vs = [], []
    current = np.array([0], dtype=np.int64)
    next_id = 1
    for depth in range(R):
        k = root_children if depth == 0 else child_count
        m = len(current) * k
        if m == 0:
            current = np.zeros(0, dtype=np.int64)
            break
        children = np.arange(next_id, next_id + m, dtype=np.int64)
        us.append(np.repeat(current, k))
        vs.append(children)
        next_id += m
        current = children
    u = np.concatenate(us) if us else np.zeros(0, dtype=np.int64)
    v = np.concatenate(vs) if vs else np.zeros(0, dtype=np.int64)
    return _trusted_graph(size, u, v, 0, d_max, current.tolist())


def homogeneous_tree(d: int, R: int, budget: int = VERTEX_BUDGET) -> RootedGraph:
    """
    Homogeneous tree T_d truncated at radius R.

    The root and every internal vertex have degree d; leaves sit at distance R
    and form the boundary marker.

    Args:
        d: Degree (>= 2).
        R: Truncation radius (>= 0).
        budget: Vertex budget.

    Returns:
        RootedGraph with 1 + d((d-1)^R - 1)/(d-2) vertices (2R + 1 for d = 2).

    Raises:
        SizeOverflow: Vertex count above budget.

    Examples:
        >>> homogeneous_tree(3, 3).n
        22
    """
    if d < 2 or R < 0:
        raise ValueError(f"need d >= 2 and R >= 0, got d={d}, R={R}")
    return _branching_tree(d, d - 1, R, d, budget)


def half_homogeneous_tree(d: int, R: int, budget: int = VERTEX_BUDGET) -> RootedGraph:
    """Tree whose root has degree d - 1 and every other internal vertex degree d, truncated at R."""
    if d < 2 or R < 0:
        raise ValueError(f"need d >= 2 and R >= 0, got d={d}, R={R}")
    return _branching_tree(d - 1, d - 1, R, d, budget)


# =============================================================================
# Glueing
# =============================================================================

def _union_edges(graphs: Sequence[RootedGraph], offsets: Sequence[int]) -> tuple[list, list]:
    us = [g.edges[:, 0] + off for g, off in zip(graphs, offsets)]
    vs = [g.edges[:, 1] + off for g, off in zip(graphs, offsets)]
    return us, vs


def glue_two(g1: RootedGraph, x1: int, g2: RootedGraph, x2: int,
             d_max: Optional[int] = None) -> RootedGraph:
    """
    Disjoint union of g1 and g2 plus the edge {x1, x2}; the root of g1 is kept.

    Args:
        g1, x1: First graph and its glueing vertex.
        g2, x2: Second graph and its glueing vertex (relabelled by + |V1|).
        d_max: Degree bound of the result (default: larger declared bound).
            Pass the bound of the degree set when glueing saturated vertices.

    Raises:
        DegreeBoundExceeded: If x1 or x2 already has degree d_max.

    Examples:
        >>> t = homogeneous_tree(3, 2)
        >>> glue_two(t, 0, t, 0, d_max=4).n
        20
    """
    bound = d_max if d_max is not None else max(g1.d_max, g2.d_max)
    for g, x in ((g1, x1), (g2, x2)):
        if not 0 <= x < g.n:
            raise GraphError(f"glueing vertex {x} not in graph with {g.n} vertices")
        if g.degree(x) + 1 > bound:
            raise DegreeBoundExceeded(
                f"vertex {x} has degree {g.degree(x)}; glueing exceeds d_max={bound}")
        if g.max_degree > bound:
            raise DegreeBoundExceeded(f"component degree {g.max_degree} exceeds d_max={bound}")
    us, vs = _union_edges([g1, g2], [0, g1.n])
    us.append(np.array([x1]))
    vs.append(np.array([x2 + g1.n]))
    boundary = set(g1.boundary) | {b + g1.n for b in g2.boundary}
    return _trusted_graph(g1.n + g2.n, np.concatenate(us), np.concatenate(vs), g1.root, bound,
                          boundary)


def glue_star(components: Sequence[tuple[RootedGraph, int]],
              d_max: Optional[int] = None) -> RootedGraph:
    """
    New hub vertex 0 joined to the marked vertex y_i of every component.

    The hub becomes the root. Components are relabelled consecutively after it.

    Args:
        components: (graph, y_i) pairs, k >= 1.
        d_max: Degree bound (default: max of k and the components' bounds).

    Raises:
        DegreeBoundExceeded: If the hub or some y_i would exceed the bound.
    """
    if not components:
        raise ValueError("glue_star needs at least one component")
    k = len(components)
    bound = d_max if d_max is not None else max([k] + [g.d_max for g, _ in components])
    if k > bound:
        raise DegreeBoundExceeded(f"hub degree {k} exceeds d_max={bound}")
    offsets, total = [], 1
    for g, y in components:
        if not 0 <= y < g.n:
            raise GraphError(f"vertex {y} not in component with {g.n} vertices")
        if g.degree(y) + 1 > bound or g.max_degree > bound:
            raise DegreeBoundExceeded(
                f"attaching vertex {y} (degree {g.degree(y)}) exceeds d_max={bound}")
        offsets.append(total)
        total += g.n
    graphs = [g for g, _ in components]
    us, vs = _union_edges(graphs, offsets)
    us.append(np.zeros(k, dtype=np.int64))
    vs.append(np.array([y + off for (_, y), off in zip(components, offsets)], dtype=np.int64))
    boundary = {b + off for g, off in zip(graphs, offsets) for b in g.boundary}
    return _trusted_graph(total, np.concatenate(us), np.concatenate(vs), 0, bound, boundary)


def attach_copies(g: RootedGraph, sites: Iterable[int], tree: RootedGraph, copies: int,
                  d_max: Optional[int] = None) -> RootedGraph:
    """
    Attach ``copies`` disjoint copies of ``tree`` (by their roots) to every site.

    The sites leave the boundary marker; the copies' own boundaries join it.
    """
    sites = [int(s) for s in sites]
    bound = d_max if d_max is not None else max(g.d_max, tree.d_max)
    if copies < 0:
        raise ValueError(f"copies must be nonnegative, got {copies}")
    for s in sites:
        if g.degree(s) + copies > bound:
            raise DegreeBoundExceeded(
                f"site {s} would reach degree {g.degree(s) + copies} > d_max={bound}")
    if tree.degree(tree.root) + 1 > bound:
        raise DegreeBoundExceeded(f"attached root would exceed d_max={bound}")
    n_copies = len(sites) * copies
    offsets = g.n + tree.n * np.arange(n_copies, dtype=np.int64)
    te = tree.edges
    us = [g.edges[:, 0], (te[:, 0][None, :] + offsets[:, None]).ravel(),
          np.repeat(np.asarray(sites, dtype=np.int64), copies)]
    vs = [g.edges[:, 1], (te[:, 1][None, :] + offsets[:, None]).ravel(), offsets + tree.root]
    boundary = (set(g.boundary) - set(sites)) | {
        int(b + off) for off in offsets for b in tree.boundary
    }
    return _trusted_graph(g.n + n_copies * tree.n, np.concatenate(us), np.concatenate(vs),
                          g.root, bound, boundary)


def realize_tree(spec: TreeSpec, R: int, budget: int = VERTEX_BUDGET) -> RootedGraph:
    """
    Truncate the infinite tree described by ``spec`` at radius R around its root.

    Examples:
        >>> realize_tree(TreeSpec(kind="homogeneous", d=3), 2).n
        10
    """
    if spec.kind == "homogeneous":
        return homogeneous_tree(spec.d, R, budget)  # type: ignore[arg-type]
    if spec.kind == "half-homogeneous":
        return half_homogeneous_tree(spec.d, R, budget)  # type: ignore[arg-type]
    if spec.join == "roots":
        a, b = (realize_tree(c, R, budget) for c in spec.components)
        return truncate(glue_two(a, a.root, b, b.root), R)
    parts = [realize_tree(c, max(R - 1, 0), budget) for c in spec.components]
    return truncate(glue_star([(p, p.root) for p in parts]), R)


# =============================================================================
# Serialization
# =============================================================================

def graph_from_json_dict(data: dict, require_connected: bool = True) -> RootedGraph:
    """Inverse of RootedGraph.to_json_dict; all invariants are re-validated."""
    return build_graph(
        [tuple(e) for e in data["edges"]],
        root=int(data["root"]),
        d_max=data.get("d_max"),
        n=data.get("n"),
        boundary=data.get("boundary", ()),
        require_connected=require_connected,
    )


def load_graph(path: str | Path, require_connected: bool = True) -> RootedGraph:
    """Load a graph JSON file (sampled CM graphs may be disconnected)."""
    return graph_from_json_dict(json.loads(Path(path).read_text()), require_connected)


def save_graph(g: RootedGraph, path: str | Path) -> None:
    """Write a graph JSON file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(g.to_json_dict(), sort_keys=True))
