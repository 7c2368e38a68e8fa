"""
Seeded random graph samplers.

Galton-Watson trees are grown breadth-first to a truncation radius: the root
gets D_0 children and every later vertex D_g - 1 children. Configuration-model
graphs come from a uniform perfect matching of half-edges; conditioning on
simplicity (by rejection) gives the uniform simple graph with the prescribed
degrees.

Every sampler is a pure function of its inputs and a Philox stream, so
identical seeds produce identical graphs.
"""

import json
import logging
import math
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .config import DegreeLaw, GWSpec
from .errors import (
    CouplingRegimeViolated,
    MaxAttemptsExceeded,
    NonExpanding,
    OddTotalDegree,
    VertexBudgetExceeded,
)
from .graphs import RootedGraph, _trusted_graph, ball
from .isomorphism import GENERAL_SIZE_LIMIT, ball_code, rooted_isomorphic
from .rng import as_generator, stream

logger = logging.getLogger(__name__)


# =============================================================================
# Degree laws
# =============================================================================

def volume_growth_rate(general: DegreeLaw) -> float:
    """
    Volume growth rate theta = log E[D_g - 1].

    Raises:
        NonExpanding: If E[D_g - 1] <= 1.

    Examples:
        >>> round(volume_growth_rate(DegreeLaw.delta(3)), 6)
        0.693147
    """
    m = general.expect([k - 1.0 for k in general.support])
    if m <= 1.0:
        raise NonExpanding(f"E[D_g - 1] = {m} <= 1; the tree does not grow exponentially")
    return math.log(m)


def expected_tree_size(initial: DegreeLaw, general: DegreeLaw, radius: int) -> float:
    """
    E|B_R(root)| of a GW tree: 1 + E[D_0] (1 + m + ... + m^{R-1}), m = E[D_g - 1].

    Examples:
        >>> expected_tree_size(DegreeLaw.delta(3), DegreeLaw.delta(3), 2)
        10.0
    """
    if radius <= 0:
        return 1.0
    m = general.expect([k - 1.0 for k in general.support])
    shells = float(radius) if m == 1.0 else (m**radius - 1.0) / (m - 1.0)
    return 1.0 + initial.mean() * shells


def size_biased_law(D: DegreeLaw) -> DegreeLaw:
    """Size-biased law P(D* = k) = k P(D = k) / E[D]."""
    mean = D.mean()
    weights = [k * p / mean for k, p in zip(D.support, D.probabilities)]
    total = math.fsum(weights)
    return DegreeLaw(support=D.support, probabilities=tuple(w / total for w in weights))


def nu(D: DegreeLaw) -> float:
    """nu = E[D(D - 1)] / E[D]."""
    return D.expect([k * (k - 1.0) for k in D.support]) / D.mean()


def simplicity_probability(D: DegreeLaw) -> float:
    """Limiting probability exp(-nu/2 - nu^2/4) that the configuration model is simple."""
    v = nu(D)
    return math.exp(-v / 2.0 - v * v / 4.0)


def coupled_gw_spec(D: DegreeLaw, radius: int, seed: int = 0) -> GWSpec:
    """GW specification with D_0 = D and D_g = D*, the local limit of the configuration model."""
    return GWSpec(initial=D, general=size_biased_law(D), radius=radius, seed=seed)


# =============================================================================
# Degree sequences
# =============================================================================

@dataclass(frozen=True, eq=False)
class DegreeSequence:
    """Degree sequence d_1 ... d_n of a configuration-model graph."""

    degrees: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.degrees, dtype=np.int64).ravel()
        if len(arr) == 0 or arr.min() < 1:
            raise ValueError("degree sequences need at least one vertex and degrees >= 1")
        arr.setflags(write=False)
        object.__setattr__(self, "degrees", arr)

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def total(self) -> int:
        return int(self.degrees.sum())

    @property
    def d_max(self) -> int:
        return int(self.degrees.max())

    @classmethod
    def constant(cls, n: int, d: int) -> "DegreeSequence":
        return cls(np.full(n, d, dtype=np.int64))

    @classmethod
    def from_law(cls, law: DegreeLaw, n: int) -> "DegreeSequence":
        """Deterministic quantile sequence whose empirical law tracks ``law``."""
        cdf = np.cumsum(law.probabilities)
        u = (np.arange(n) + 0.5) / n
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
        degrees = np.asarray(law.support)[idx]
        if degrees.sum() % 2:
            # swap the largest entry for the nearest support value of the other parity
            support = np.asarray(law.support)[np.asarray(law.probabilities) > 0]
            flips = support[(support - degrees[-1]) % 2 == 1]
            if flips.size == 0:
                raise OddTotalDegree(
                    f"every degree in the support {tuple(int(k) for k in support)} has the "
                    f"same parity, so {n} of them cannot sum to an even total"
                )
            degrees[-1] = flips[np.argmin(np.abs(flips - degrees[-1]))]
        return cls(degrees)

    @classmethod
    def from_csv(cls, path: str | Path) -> "DegreeSequence":
        """One degree per line, no header."""
        df = pd.read_csv(path, header=None, comment="#")
        return cls(df.iloc[:, 0].to_numpy(dtype=np.int64))

    @classmethod
    def from_json(cls, path: str | Path) -> "DegreeSequence":
        """A JSON list of degrees, or an object with a ``degrees`` list."""
        data = json.loads(Path(path).read_text())
        return cls(np.asarray(data["degrees"] if isinstance(data, dict) else data))

    @classmethod
    def load(cls, path: str | Path) -> "DegreeSequence":
        return cls.from_json(path) if Path(path).suffix == ".json" else cls.from_csv(path)

    def empirical_law(self) -> DegreeLaw:
        values, counts = np.unique(self.degrees, return_counts=True)
        return DegreeLaw(support=tuple(int(v) for v in values),
                         probabilities=tuple(float(c) / self.n for c in counts))

    def total_variation(self, law: DegreeLaw) -> float:
        """Total variation distance between the empirical degree law and ``law``."""
        emp = Counter(int(d) for d in self.degrees)
        keys = set(emp) | set(law.support)
        return 0.5 * math.fsum(abs(emp.get(k, 0) / self.n - law.pmf(k)) for k in keys)

    def phi_n(self, law: DegreeLaw) -> float:
        """Phi_n = (max(1/n, TV(empirical, law)))^-1."""
        return 1.0 / max(1.0 / self.n, self.total_variation(law))

    def assumption_issues(self, law: Optional[DegreeLaw] = None) -> list[str]:
        """Violations of the configuration-model assumptions (empty when all hold)."""
        issues = []
        if self.total % 2:
            issues.append(f"odd total degree {self.total}")
        if self.degrees.min() < 2:
            issues.append(f"minimum degree {int(self.degrees.min())} < 2")
        if law is not None and law.min_degree < 3:
            issues.append(f"limit law has minimum degree {law.min_degree} < 3")
        return issues


# =============================================================================
# Sample containers
# =============================================================================

@dataclass
class SampleReport:
    """Outcome of a configuration-model sample."""

    attempts: int = 1
    simple: bool = True
    connected: bool = True
    n_loops: int = 0
    n_multi_edges: int = 0

    def to_json_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class MultiGraph:
    """Configuration-model sample that contains loops or parallel edges."""

    n: int
    pairs: np.ndarray
    root: int
    n_loops: int
    n_multi_edges: int

    @property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.pairs.ravel(), minlength=self.n)

    @property
    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        a, b = self.pairs[:, 0], self.pairs[:, 1]
        adj = sparse.coo_matrix((np.ones(len(a)), (a, b)), shape=(self.n, self.n))
        n_comp, _ = connected_components(adj, directed=False)
        return n_comp == 1

    def to_json_dict(self) -> dict:
        return {"root": int(self.root), "n": int(self.n),
                "pairs": [[int(a), int(b)] for a, b in self.pairs]}


# =============================================================================
# Galton-Watson trees
# =============================================================================

def sample_gw_tree(spec: GWSpec, rng: Optional[np.random.Generator] = None) -> RootedGraph:
    """
    Galton-Watson tree truncated at ``spec.radius``.

    The root has D_0 children, every other vertex D_g - 1 children. Vertices at
    distance R form the boundary marker.

    Args:
        spec: Tree specification.
        rng: Stream to draw from (default: ``stream(spec.seed)``).

    Raises:
        VertexBudgetExceeded: If the truncation exceeds ``spec.vertex_budget``.
    """
    rng = rng if rng is not None else stream(spec.seed)
    us, vs = [], []
    current = np.array([0], dtype=np.int64)
    total = 1
    for depth in range(spec.radius):
        if depth == 0:
            counts = spec.initial.sample(rng, 1)
        else:
            counts = spec.general.sample(rng, len(current)) - 1
        m = int(counts.sum())
        if total + m > spec.vertex_budget:
            raise VertexBudgetExceeded(
                f"GW tree exceeds vertex budget {spec.vertex_budget} at depth {depth + 1}")
        children = np.arange(total, total + m, dtype=np.int64)
        us.append(np.repeat(current, counts))
        vs.append(children)
        total += m
        current = children
    u = np.concatenate(us) if us else np.zeros(0, dtype=np.int64)
    v = np.concatenate(vs) if vs else np.zeros(0, dtype=np.int64)
    logger.debug("GW tree: %d vertices to radius %d", total, spec.radius)
    return _trusted_graph(total, u, v, 0, spec.degree_bound, current.tolist())


# =============================================================================
# Configuration model
# =============================================================================

def _match_half_edges(degrees: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    half = np.repeat(np.arange(len(degrees), dtype=np.int64), degrees)
    return rng.permutation(half).reshape(-1, 2)


def _defects(pairs: np.ndarray) -> tuple[int, int, np.ndarray]:
    loops = pairs[:, 0] == pairs[:, 1]
    canon = np.sort(pairs[~loops], axis=1)
    if len(canon) == 0:
        return int(loops.sum()), 0, canon
    _, counts = np.unique(canon, axis=0, return_counts=True)
    return int(loops.sum()), int((counts - 1).sum()), canon


def sample_configuration_model(
    ds: DegreeSequence, seed: "int | np.random.Generator | None" = 0
) -> tuple["RootedGraph | MultiGraph", SampleReport]:
    """
    One configuration-model sample: a uniform perfect matching of half-edges.

    Args:
        ds: Degree sequence with even total.
        seed: Seed or stream.

    Returns:
        Tuple (graph, report). The graph is a RootedGraph when the sample is
        simple and a MultiGraph otherwise. The root is uniform on V.

    Raises:
        OddTotalDegree: If the degree total is odd.
    """
    if ds.total % 2:
        raise OddTotalDegree(f"degree total {ds.total} is odd")
    rng = as_generator(seed)
    pairs = _match_half_edges(ds.degrees, rng)
    root = int(rng.integers(ds.n))
    n_loops, n_multi, canon = _defects(pairs)
    if n_loops or n_multi:
        mg = MultiGraph(ds.n, pairs, root, n_loops, n_multi)
        return mg, SampleReport(1, False, mg.is_connected, n_loops, n_multi)
    g = _trusted_graph(ds.n, canon[:, 0], canon[:, 1], root, ds.d_max)
    return g, SampleReport(1, True, g.is_connected)


def sample_uniform_simple_graph(
    ds: DegreeSequence,
    seed: "int | np.random.Generator | None" = 0,
    max_attempts: int = 1000,
    require_connected: bool = False,
) -> tuple[RootedGraph, SampleReport]:
    """
    Uniform simple graph with degrees ``ds`` by rejection on the configuration model.

    Args:
        ds: Degree sequence with even total.
        seed: Seed or stream.
        max_attempts: Rejection budget.
        require_connected: Also reject disconnected samples.

    Returns:
        Tuple (graph, report); ``report.attempts`` counts configuration-model draws.
        A disconnected sample (allowed when ``require_connected`` is False) keeps
        every vertex and is flagged ``connected=False``.

    Raises:
        OddTotalDegree: If the degree total is odd.
        MaxAttemptsExceeded: If no draw was accepted.
    """
    if ds.total % 2:
        raise OddTotalDegree(f"degree total {ds.total} is odd")
    rng = as_generator(seed)
    for attempt in range(1, max_attempts + 1):
        pairs = _match_half_edges(ds.degrees, rng)
        root = int(rng.integers(ds.n))
        n_loops, n_multi, canon = _defects(pairs)
        if n_loops or n_multi:
            continue
        g = _trusted_graph(ds.n, canon[:, 0], canon[:, 1], root, ds.d_max)
        if require_connected and not g.is_connected:
            continue
        logger.debug("uniform simple graph accepted after %d attempts", attempt)
        return g, SampleReport(attempt, True, g.is_connected)
    raise MaxAttemptsExceeded(max_attempts)


# =============================================================================
# Coupling with the Galton-Watson tree
# =============================================================================

@dataclass
class CouplingReport:
    """Ball statistics of uniform simple graphs against their GW local limit."""

    trials: int
    radius: int
    iso_frequency: float
    tree_frequency: float
    tv_estimate: float
    log_phi_n: float
    warnings: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return asdict(self)


def coupling_check(
    ds: DegreeSequence,
    gw: GWSpec,
    m: int,
    trials: int,
    seed: int = 0,
    max_attempts: int = 10_000,
    limit: int = GENERAL_SIZE_LIMIT,
    limit_law: Optional[DegreeLaw] = None,
) -> CouplingReport:
    """
    Compare B_m(root) of fresh uniform simple graphs with B_m of fresh GW trees.

    Trial i draws both samples from ``stream(seed, i)``. Reports the fraction
    of trials with rooted-isomorphic balls, the fraction of tree-like graph
    balls, and the total variation between the empirical distributions of
    ball codes.

    Raises:
        SizeLimit: A ball with cycles above ``limit`` vertices.
    """
    law = limit_law or gw.initial
    log_phi = math.log(ds.phi_n(law))
    notes = []
    if m >= log_phi:
        msg = f"radius m={m} is not small against log Phi_n={log_phi:.2f}"
        warnings.warn(msg, CouplingRegimeViolated, stacklevel=2)
        notes.append(msg)
    if gw.general != size_biased_law(gw.initial):
        logger.warning("GW general law is not the size-biased initial law; coupling not expected")
    gw_m = gw.model_copy(update={"radius": m})

    iso = tree = 0
    ug_codes: Counter = Counter()
    gw_codes: Counter = Counter()
    for i in range(trials):
        rng = stream(seed, i)
        g, _ = sample_uniform_simple_graph(ds, rng, max_attempts)
        b_ug = ball(g, g.root, m)
        t = sample_gw_tree(gw_m, rng=rng)
        b_gw = ball(t, t.root, m)
        iso += rooted_isomorphic(b_ug, b_gw, limit)
        code = ball_code(b_ug)
        tree += not code.startswith("G:")
        ug_codes[code] += 1
        gw_codes[ball_code(b_gw)] += 1
    tv = 0.5 * sum(abs(ug_codes[c] - gw_codes[c]) for c in set(ug_codes) | set(gw_codes)) / trials
    logger.info("coupling check: m=%d, iso %.3f, tree %.3f, TV %.3f",
                m, iso / trials, tree / trials, tv)
    return CouplingReport(trials, m, iso / trials, tree / trials, tv, log_phi, notes)
