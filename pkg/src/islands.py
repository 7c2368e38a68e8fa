"""
High exceedances and islands of the potential inside a ball.

For a ball B_r with L_r vertices:

    Pi = {z in B_r : xi(z) > a_{L_r} - 2A}
    D  = {z in B_r : dist_G(z, Pi) <= S_r},   S_r = (log r)^alpha

The connected components of D are the islands; each carries the vertex z_C
where xi is largest (smallest id on ties).
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd
from scipy.sparse.csgraph import connected_components, shortest_path

from .config import DEFAULT_LANDSCAPE, LandscapeConfig
from .errors import PathNotInGraph, PreconditionViolated
from .graphs import Ball, RootedGraph, VertexPath, induced_subgraph, neighbor_pairs
from .potential import Potential, a_scale

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Island:
    """One connected component C of D."""

    vertices: np.ndarray
    high: np.ndarray
    peak: int
    peak_value: float

    @property
    def size(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True, eq=False)
class IslandDecomposition:
    """Exceedance set, its S_r-neighbourhood and the islands, all as sorted global ids."""

    ball: Ball
    potential: Potential
    config: LandscapeConfig
    Pi: np.ndarray
    D: np.ndarray
    components: list[Island]
    S_r: float
    a_L: float

    @property
    def threshold(self) -> float:
        return self.a_L - 2.0 * self.config.A

    def in_pi(self) -> np.ndarray:
        """Boolean mask of Pi over the parent graph."""
        out = np.zeros(self.ball.graph.n, dtype=bool)
        out[self.Pi] = True
        return out

    def in_d(self) -> np.ndarray:
        """Boolean mask of D over the parent graph."""
        out = np.zeros(self.ball.graph.n, dtype=bool)
        out[self.D] = True
        return out


def neighbourhood(g: RootedGraph, sources: np.ndarray, s: int) -> np.ndarray:
    """Multi-source BFS distances (capped at s; -1 beyond)."""
    dist = np.full(g.n, -1, dtype=np.int64)
    frontier = np.unique(np.asarray(sources, dtype=np.int64))
    dist[frontier] = 0
    depth = 0
    while frontier.size and depth < s:
        _, nbrs = neighbor_pairs(g, frontier)
        nbrs = np.unique(nbrs)
        new = nbrs[dist[nbrs] < 0]
        depth += 1
        dist[new] = depth
        frontier = new
    return dist


def decompose_islands(
    xi: Potential, b: Ball, cfg: LandscapeConfig = DEFAULT_LANDSCAPE
) -> IslandDecomposition:
    """
    Exceedance set Pi, islands D and their components inside the ball b.

    Distances to Pi are measured in the whole graph and the neighbourhood is
    then intersected with the ball.

    Raises:
        PreconditionViolated: If r < 2 (log r must be positive).
    """
    if b.radius < 2:
        raise PreconditionViolated(f"island scale needs r >= 2, got r={b.radius}")
    g = b.graph
    a_L = a_scale(b.L, xi.rho)
    S_r = math.log(b.radius) ** cfg.alpha
    vals = xi.values[b.members]
    Pi = b.members[vals > a_L - 2.0 * cfg.A]
    if len(Pi) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return IslandDecomposition(b, xi, cfg, empty, empty, [], S_r, a_L)

    dist = neighbourhood(g, Pi, int(math.floor(S_r)))
    D = b.members[dist[b.members] >= 0]
    sub, local_to_global = induced_subgraph(g, D, int(D[0]))
    n_comp, labels = connected_components(sub.adjacency_matrix, directed=False)
    in_pi = np.zeros(g.n, dtype=bool)
    in_pi[Pi] = True

    components = []
    for c in range(n_comp):
        verts = local_to_global[labels == c]
        cv = xi.values[verts]
        k = int(np.argmax(cv))
        components.append(Island(verts, verts[in_pi[verts]], int(verts[k]), float(cv[k])))
    components.sort(key=lambda isl: int(isl.vertices[0]))
    logger.debug("islands: |Pi|=%d |D|=%d components=%d", len(Pi), len(D), len(components))
    return IslandDecomposition(b, xi, cfg, Pi, D, components, S_r, a_L)


# =============================================================================
# Island statistics
# =============================================================================

@dataclass
class IslandRow:
    """Size statistics of one island against the a-priori bounds."""

    island: int
    peak: int
    peak_value: float
    size: int
    n_high: int
    diameter: int
    bound_high: float
    bound_diameter: float
    bound_size: float
    violations: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["violations"] = ";".join(self.violations)
        return data


def _diameter(g: RootedGraph, verts: np.ndarray) -> int:
    if len(verts) <= 1:
        return 0
    sub, _ = induced_subgraph(g, verts, int(verts[0]))
    d = shortest_path(sub.adjacency_matrix, unweighted=True, directed=False)
    return int(d[np.isfinite(d)].max())


def island_stats(d: IslandDecomposition, d_max: Optional[int] = None) -> list[IslandRow]:
    """
    Per-island (|C cap Pi|, diam C, |C|) with the bounds M_A, 2 M_A S_r, M_A d_max^{S_r}.

    Args:
        d: Decomposition.
        d_max: Degree bound (default: the graph's declared bound).
    """
    g = d.ball.graph
    M = d.config.M_A
    dm = d_max or g.d_max
    bounds = (float(M), 2.0 * M * d.S_r, M * float(dm) ** d.S_r)
    rows = []
    for i, isl in enumerate(d.components):
        diam = _diameter(g, isl.vertices)
        row = IslandRow(i, isl.peak, isl.peak_value, isl.size, len(isl.high), diam, *bounds)
        if row.n_high > bounds[0]:
            row.violations.append("high")
        if diam > bounds[1]:
            row.violations.append("diameter")
        if isl.size > bounds[2]:
            row.violations.append("size")
        rows.append(row)
    return rows


def island_frame(rows: list[IslandRow]) -> pd.DataFrame:
    columns = list(IslandRow.__dataclass_fields__)
    return pd.DataFrame([r.to_dict() for r in rows], columns=columns)


# =============================================================================
# Path peak counts
# =============================================================================

class PeakCounts(NamedTuple):
    N_eps: int
    N_high: int
    M_eps: int


def path_peak_counts(
    xi: Potential, path: VertexPath, b: Ball, cfg: LandscapeConfig = DEFAULT_LANDSCAPE
) -> PeakCounts:
    """
    Peak statistics of a path.

    Returns:
        PeakCounts where N_eps counts support points with xi > (1 - eps) a_{L_r},
        N_high support points with xi > a_{L_r} - 2A, and M_eps the indices
        0 <= i < |pi| with xi(pi_i) <= (1 - eps) a_{L_r}.

    Raises:
        PathNotInGraph: If the path lives in another graph.
    """
    if path.graph is not b.graph and path.graph != b.graph:
        raise PathNotInGraph("path and ball belong to different graphs")
    a = a_scale(b.L, xi.rho)
    level = (1.0 - cfg.epsilon) * a
    supp = xi.values[path.support]
    steps = xi.values[path.vertices[:-1]]
    return PeakCounts(
        int((supp > level).sum()),
        int((supp > a - 2.0 * cfg.A).sum()),
        int((steps <= level).sum()),
    )


def peak_count(xi: Potential, vertices: np.ndarray, level: float) -> int:
    """Number of indices 0 <= i < len - 1 with xi <= level (last point excluded)."""
    return int((xi.values[np.asarray(vertices)[:-1]] <= level).sum())
