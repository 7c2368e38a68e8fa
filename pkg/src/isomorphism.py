"""
Rooted isomorphism of balls.

Trees are compared through AHU canonical codes: the code of a vertex is
``"(" + sorted child codes + ")"``, so two rooted trees are isomorphic exactly
when their root codes agree. Balls that contain cycles are handed to the
networkx VF2 matcher with the root pinned, which is only attempted up to a
configured size.
"""

import logging
from typing import Optional

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import GraphMatcher
from scipy.sparse.csgraph import breadth_first_order

from .errors import SizeLimit
from .graphs import Ball, RootedGraph

logger = logging.getLogger(__name__)

# Largest non-tree ball handed to the backtracking matcher.
GENERAL_SIZE_LIMIT = 64


def _bfs_tree(g: RootedGraph, root: int) -> tuple[np.ndarray, np.ndarray]:
    order, pred = breadth_first_order(g.adjacency_matrix, root, directed=False,
                                      return_predecessors=True)
    return order, pred


def _subtree_codes(g: RootedGraph, root: int) -> tuple[list[str], np.ndarray]:
    if not g.is_tree:
        raise ValueError("canonical codes are defined for trees only")
    order, pred = _bfs_tree(g, root)
    children: list[list[str]] = [[] for _ in range(g.n)]
    codes = [""] * g.n
    for x in order[::-1]:
        codes[x] = "(" + "".join(sorted(children[x])) + ")"
        if x != root:
            children[pred[x]].append(codes[x])
    return codes, pred


def canonical_code(g: RootedGraph, root: Optional[int] = None) -> str:
    """
    AHU canonical code of a rooted tree as an ASCII string.

    Args:
        g: A tree.
        root: Root vertex (default: g.root).

    Returns:
        Code string; equal codes <=> rooted-isomorphic trees.

    Raises:
        ValueError: If g is not a tree.

    Examples:
        >>> from src.graphs import build_graph
        >>> canonical_code(build_graph([(0, 1), (0, 2)]))
        '(()())'
    """
    codes, _ = _subtree_codes(g, g.root if root is None else root)
    return codes[g.root if root is None else root]


def tree_isomorphism(g1: RootedGraph, r1: int, g2: RootedGraph, r2: int) -> Optional[dict[int, int]]:
    """
    Root-preserving isomorphism between two trees, or None.

    Children are matched in canonical-code order, which yields an explicit
    vertex map whenever the root codes agree.
    """
    if g1.n != g2.n:
        return None
    codes1, pred1 = _subtree_codes(g1, r1)
    codes2, pred2 = _subtree_codes(g2, r2)
    if codes1[r1] != codes2[r2]:
        return None
    mapping = {r1: r2}
    stack = [(r1, r2)]
    while stack:
        x, y = stack.pop()
        cx = sorted((c for c in g1.neighbors(x) if c != pred1[x]),
                    key=lambda c: codes1[c])
        cy = sorted((c for c in g2.neighbors(y) if c != pred2[y]),
                    key=lambda c: codes2[c])
        for a, b in zip(cx, cy):
            mapping[int(a)] = int(b)
            stack.append((int(a), int(b)))
    return mapping


def to_networkx(g: RootedGraph) -> nx.Graph:
    """networkx copy with a boolean ``root`` node attribute."""
    G = nx.Graph()
    G.add_nodes_from((x, {"root": x == g.root}) for x in range(g.n))
    G.add_edges_from((int(u), int(v)) for u, v in g.edges)
    return G


def _general_isomorphic(g1: RootedGraph, g2: RootedGraph, limit: int) -> bool:
    if g1.n > limit:
        raise SizeLimit(f"ball with {g1.n} vertices and cycles exceeds size limit {limit}")
    matcher = GraphMatcher(to_networkx(g1), to_networkx(g2),
                           node_match=lambda a, b: a["root"] == b["root"])
    return matcher.is_isomorphic()


def graphs_isomorphic(g1: RootedGraph, g2: RootedGraph, limit: int = GENERAL_SIZE_LIMIT) -> bool:
    """Root-preserving isomorphism test for two whole graphs."""
    if g1.n != g2.n or g1.num_edges != g2.num_edges:
        return False
    if not np.array_equal(np.sort(g1.degrees), np.sort(g2.degrees)):
        return False
    if g1.degree(g1.root) != g2.degree(g2.root):
        return False
    if g1.is_tree:
        return canonical_code(g1) == canonical_code(g2)
    return _general_isomorphic(g1, g2, limit)


def rooted_isomorphic(b1: Ball, b2: Ball, limit: int = GENERAL_SIZE_LIMIT) -> bool:
    """
    Whether a root-preserving isomorphism maps ball b1 onto ball b2.

    Tree balls of any size are compared by canonical code; balls with cycles
    go through VF2 backtracking with degree pruning.

    Raises:
        SizeLimit: A ball with cycles larger than ``limit`` vertices.
    """
    g1, _ = b1.subgraph()
    g2, _ = b2.subgraph()
    return graphs_isomorphic(g1, g2, limit)


def ball_code(b: Ball) -> str:
    """
    Class label of a ball for distributional comparisons.

    Tree balls get their canonical code; balls with cycles get a rooted
    Weisfeiler-Lehman hash prefixed with ``"G:"``.
    """
    g, _ = b.subgraph()
    if g.is_tree:
        return canonical_code(g)
    G = to_networkx(g)
    nx.set_node_attributes(G, {x: "r" if x == g.root else "v" for x in G.nodes}, "label")
    return "G:" + nx.weisfeiler_lehman_graph_hash(G, node_attr="label")
