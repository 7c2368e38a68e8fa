"""
Excursion decomposition of nearest-neighbour paths.

A path that meets Pi splits uniquely into

    check_1 . hat_1 . check_2 . hat_2 ... check_m . hat_m . terminal

where check paths avoid Pi before their last point (which lies in Pi), hat
paths stay in D before their last point (which lies outside D, except
possibly for the last hat), and the terminal path starts outside D and never
meets Pi. When the last hat ends inside D the terminal path is the single
endpoint. Consecutive pieces share their junction vertex.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import LandscapeConfig
from .errors import PreconditionViolated
from .graphs import RootedGraph, VertexPath
from .islands import IslandDecomposition, peak_count
from .pam import conditional_path_mc, path_evaluation
from .potential import Potential
from .spectral import assemble, principal_eigenpair

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ExcursionDecomposition:
    """Pieces of a path with the counters m_pi, s_pi and k_pi."""

    checks: list[np.ndarray]
    hats: list[np.ndarray]
    terminal: np.ndarray
    m: int
    s: int
    k: int

    def reconstruct(self) -> np.ndarray:
        """Concatenate the pieces back into the original vertex sequence."""
        pieces = [p for pair in zip(self.checks, self.hats) for p in pair] + [self.terminal]
        out = [pieces[0]] + [p[1:] for p in pieces[1:]]
        return np.concatenate(out)


def decompose_excursions(
    path: VertexPath,
    islands: IslandDecomposition,
    epsilon: Optional[float] = None,
) -> ExcursionDecomposition:
    """
    Split ``path`` into excursions between Pi and the complement of D.

    Args:
        path: Path inside the ball that produced ``islands``.
        islands: Island decomposition (supplies Pi, D, xi and a_{L_r}).
        epsilon: Peak level for k_pi (default: the decomposition's epsilon).

    Returns:
        ExcursionDecomposition. A path that never meets Pi has m = 0, s = |pi|
        and k = M_pi, with the whole path as terminal piece.
    """
    eps = islands.config.epsilon if epsilon is None else epsilon
    level = (1.0 - eps) * islands.a_L
    xi = islands.potential
    v = path.vertices
    in_pi = islands.in_pi()[v]
    in_d = islands.in_d()[v]
    last = len(v) - 1

    if not in_pi.any():
        return ExcursionDecomposition([], [], v.copy(), 0, last, peak_count(xi, v, level))

    checks, hats = [], []
    terminal = None
    i = 0
    while terminal is None:
        hits = np.flatnonzero(in_pi[i:])
        if len(hits) == 0:
            terminal = v[i:]
            break
        j = i + int(hits[0])
        checks.append(v[i:j + 1])
        exits = np.flatnonzero(~in_d[j:])
        if len(exits) == 0:
            hats.append(v[j:])
            terminal = v[last:]
            break
        h = j + int(exits[0])
        hats.append(v[j:h + 1])
        i = h

    exterior = checks + [terminal]
    s = sum(len(p) - 1 for p in exterior)
    k = sum(peak_count(xi, p, level) for p in exterior)
    return ExcursionDecomposition(checks, hats, terminal, len(hats), s, k)


def visited_island_eigenvalue(
    g: RootedGraph, xi: Potential, islands: IslandDecomposition, path: VertexPath
) -> float:
    """Largest principal eigenvalue among islands whose high points the path visits (-inf if none)."""
    visited = np.zeros(g.n, dtype=bool)
    visited[path.support] = True
    best = -math.inf
    for isl in islands.components:
        if visited[isl.high].any():
            best = max(best, principal_eigenpair(assemble(g, isl.vertices, xi)).value)
    return best


# =============================================================================
# Excursion mass bound
# =============================================================================

@dataclass
class ExcursionBoundReport:
    """Exact and Monte Carlo excursion mass against q_A^l exp((c - logloglog L) M)."""

    length: int
    M: int
    q_A: float
    exact: float
    mc_estimate: float
    mc_std_error: float
    c_min: float
    c: Optional[float] = None
    bound: Optional[float] = None
    notes: list[str] = field(default_factory=list)

    @property
    def satisfied(self) -> Optional[bool]:
        if self.bound is None:
            return None
        return self.exact <= self.bound * (1 + 1e-9)

    @property
    def mc_consistent(self) -> bool:
        """The Monte Carlo estimate lies within 3 standard errors of the exact value."""
        return abs(self.mc_estimate - self.exact) <= 3 * self.mc_std_error + 1e-12


def _log3(L: int) -> float:
    return math.log(math.log(math.log(max(float(L), math.exp(math.e)))))


def excursion_bound_check(
    g: RootedGraph,
    xi: Potential,
    islands: IslandDecomposition,
    path: VertexPath,
    gamma: float,
    epsilon: Optional[float] = None,
    n_mc: int = 10_000,
    seed: int = 0,
    c: Optional[float] = None,
) -> ExcursionBoundReport:
    """
    Mass of an excursion that avoids Pi before its last point.

    The exact conditional mass (product formula) and a conditional Monte Carlo
    estimate are compared against q_A^l exp((c - logloglog L_r) M_pi) with
    q_A = (1 + A / d_max)^-1. The report carries the smallest c for which the
    bound holds; with an explicit ``c`` it also evaluates the bound.

    Raises:
        PreconditionViolated: If the path meets Pi before its last point or
            gamma <= a_{L_r} - A.
    """
    cfg: LandscapeConfig = islands.config
    eps = cfg.epsilon if epsilon is None else epsilon
    if islands.in_pi()[path.vertices[:-1]].any():
        raise PreconditionViolated("path meets Pi before its last point")
    if gamma <= islands.a_L - cfg.A:
        raise PreconditionViolated(f"gamma={gamma} must exceed a_L - A={islands.a_L - cfg.A}")

    ell = path.length
    M = peak_count(xi, path.vertices, (1.0 - eps) * islands.a_L)
    q_A = 1.0 / (1.0 + cfg.A / g.d_max)
    exact = path_evaluation(g, xi, path, gamma)
    mc = conditional_path_mc(g, xi, path, gamma, n_mc, seed)
    log3 = _log3(islands.ball.L)
    slack = math.log(exact) - ell * math.log(q_A) if exact > 0 else -math.inf
    if M > 0:
        c_min = slack / M + log3
    else:
        c_min = -math.inf if slack <= 1e-12 else math.inf
    report = ExcursionBoundReport(ell, M, q_A, exact, mc.estimate, mc.std_error, c_min)
    if c is not None:
        report.c = c
        report.bound = q_A**ell * math.exp((c - log3) * M)
        if not report.satisfied:
            report.notes.append(f"bound with c={c} fails; smallest admissible c is {c_min:.4g}")
    logger.debug("excursion bound: l=%d M=%d exact=%.4g c_min=%.4g", ell, M, exact, c_min)
    return report
