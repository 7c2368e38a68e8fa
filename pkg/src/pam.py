"""
Total mass of the parabolic Anderson model started from the root.

Two independent routes to U(t) = sum_x u(x, t):

    - total_mass_deterministic: evolve u on the truncated ball with Dirichlet
      boundary through the matrix-exponential action of the shifted
      Hamiltonian, renormalizing after every substep and tracking log U.
    - total_mass_feynman_kac: average exp(int_0^t xi(X_s) ds) over simulated
      continuous-time walks with jump rate 1 along every edge.

Plus the path-level identities and inequality checks built on the same
Hamiltonians: exact path evaluation, exit-time masses and the solution
sandwich.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.sparse.linalg import expm_multiply, spsolve

from .config import DEFAULT_SOLVER, SolverConfig
from .errors import (
    BudgetExceeded,
    DomainTooLarge,
    GammaTooSmall,
    PreconditionViolated,
    StepControlFailure,
)
from .graphs import RootedGraph, VertexPath, ball, neighbor_pairs
from .potential import Potential
from .rng import as_generator, stream
from .spectral import DENSE_LIMIT, assemble, principal_eigenpair, spectral_solution

logger = logging.getLogger(__name__)

# Minimal gap between gamma and max(xi - deg) along a path
GAMMA_MARGIN = 1e-9


# =============================================================================
# Grids and domains
# =============================================================================

def truncation_radius(t: float, c: float = 1.0, r_hint: int = 0) -> int:
    """
    l_t = max(ceil(c t log(t v e)), r_hint, 1).

    Examples:
        >>> truncation_radius(1.0)
        1
        >>> truncation_radius(8.0)
        17
    """
    return max(math.ceil(c * t * math.log(max(t, math.e))), r_hint, 1)


def geometric_time_grid(t_min: float, ratio: float, count: int) -> np.ndarray:
    """t_k = t_min * ratio**k for k < count."""
    if t_min <= 0 or ratio <= 1 or count < 1:
        raise ValueError(f"need t_min > 0, ratio > 1, count >= 1; got {t_min}, {ratio}, {count}")
    return t_min * ratio ** np.arange(count, dtype=np.float64)


def default_domain(g: RootedGraph) -> np.ndarray:
    """All vertices except the truncation boundary."""
    keep = np.ones(g.n, dtype=bool)
    if g.boundary:
        keep[list(g.boundary)] = False
    return np.flatnonzero(keep)


# =============================================================================
# Mass curves
# =============================================================================

@dataclass
class MassCurve:
    """
    Total mass U on a time grid.

    Attributes:
        times: Time grid.
        log_U: log U(t) per grid point (U itself may overflow).
        truncation_radius: Radius l_t of the ball used (0 for untruncated domains).
        boundary_mass: Fraction of mass on the outer shell of the domain.
        std_error: Standard errors (Monte Carlo curves only).
        method: "deterministic" or "feynman-kac".
    """

    times: np.ndarray
    log_U: np.ndarray
    truncation_radius: int = 0
    boundary_mass: Optional[np.ndarray] = None
    std_error: Optional[np.ndarray] = None
    method: str = "deterministic"

    @property
    def U(self) -> np.ndarray:
        return np.exp(self.log_U)

    @property
    def logU_over_t(self) -> np.ndarray:
        """(1/t) log U(t); NaN at t = 0."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.times > 0, self.log_U / self.times, np.nan)

    def to_frame(self) -> pd.DataFrame:
        n = len(self.times)
        return pd.DataFrame({
            "t": self.times,
            "U": self.U,
            "logU_over_t": self.logU_over_t,
            "stderr": self.std_error if self.std_error is not None else np.zeros(n),
            "boundary_mass": (self.boundary_mass if self.boundary_mass is not None
                              else np.zeros(n)),
            "truncation_radius": np.full(n, self.truncation_radius),
        })


def _check_times(times: "Sequence[float] | np.ndarray") -> np.ndarray:
    t = np.asarray(times, dtype=np.float64).ravel()
    if len(t) == 0 or t.min() < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be nonempty, nonnegative and strictly increasing")
    return t


def total_mass_deterministic(
    g: RootedGraph,
    xi: Potential,
    times: "Sequence[float] | np.ndarray",
    cfg: SolverConfig = DEFAULT_SOLVER,
    domain: "Optional[Sequence[int] | np.ndarray]" = None,
) -> MassCurve:
    """
    U(t) on B_{l_t}(root) with Dirichlet boundary.

    The operator is shifted by max_Lambda xi so its spectrum is nonpositive;
    each interval is split into substeps with ||H - shift||_1 * dt below
    ``cfg.substep_norm`` and the iterate is renormalized after every substep.

    Args:
        g: Graph.
        xi: Potential.
        times: Increasing time grid (t = 0 allowed).
        cfg: Solver configuration (truncation constant, budgets).
        domain: Explicit Dirichlet domain; defaults to the ball of radius
            l_{max t} minus the truncation boundary.

    Raises:
        BudgetExceeded: Domain above ``cfg.vertex_budget``.
        StepControlFailure: Substep budget exhausted or a non-finite iterate.
    """
    t = _check_times(times)
    if domain is None:
        radius = truncation_radius(float(t[-1]), cfg.truncation_c, cfg.r_hint)
        b = ball(g, g.root, radius)
        keep = np.isin(b.members, default_domain(g))
        dom = b.members[keep]
        shell = b.members[keep & (b.distance == radius)]
    else:
        radius = 0
        dom = np.unique(np.asarray(domain, dtype=np.int64))
        shell = np.zeros(0, dtype=np.int64)
    if len(dom) > cfg.vertex_budget:
        raise BudgetExceeded(f"domain with {len(dom)} vertices exceeds budget {cfg.vertex_budget}")
    if not np.isin(g.root, dom):
        raise PreconditionViolated("the root must lie in the Dirichlet domain")

    h = assemble(g, dom, xi)
    shift = float(h.q.max())
    m = (h.matrix - shift * sparse.identity(h.size, format="csr")).tocsr()
    norm1 = float(abs(m).sum(axis=0).max())
    shell_idx = np.searchsorted(h.domain, shell)

    u = np.zeros(h.size)
    u[h.local_index(g.root)] = 1.0
    log_scale = 0.0
    now = 0.0
    used = 0
    log_U = np.zeros(len(t))
    bmass = np.zeros(len(t))
    for k, tk in enumerate(t):
        dt = tk - now
        if dt > 0:
            n_sub = max(1, math.ceil(norm1 * dt / cfg.substep_norm))
            used += n_sub
            if used > cfg.max_substeps:
                raise StepControlFailure(
                    f"{used} substeps needed by t={tk}, budget {cfg.max_substeps}")
            step = (m * (dt / n_sub)).tocsr()
            for _ in range(n_sub):
                u = expm_multiply(step, u)
                total = float(u.sum())
                if not math.isfinite(total) or total <= 0:
                    raise StepControlFailure(f"mass became {total} near t={tk}")
                log_scale += math.log(total)
                u /= total
            now = float(tk)
        log_U[k] = log_scale + shift * tk
        bmass[k] = float(u[shell_idx].sum()) if len(shell_idx) else 0.0
    log_U[t == 0] = 0.0
    logger.debug("deterministic mass: |Lambda|=%d, radius=%d, substeps=%d", h.size, radius, used)
    return MassCurve(t, log_U, radius, bmass, None, "deterministic")


# =============================================================================
# Feynman-Kac Monte Carlo
# =============================================================================

class MonteCarloEstimate(NamedTuple):
    estimate: float
    std_error: float
    n_paths: int


def _summarize(log_w: np.ndarray) -> MonteCarloEstimate:
    n = len(log_w)
    if np.all(np.isneginf(log_w)):
        return MonteCarloEstimate(0.0, 0.0, n)
    top = float(log_w.max())
    w = np.exp(log_w - top)
    mean = float(w.mean())
    std = float(w.std(ddof=1)) if n > 1 else 0.0
    return MonteCarloEstimate(math.exp(top) * mean, math.exp(top) * std / math.sqrt(n), n)


def total_mass_feynman_kac(
    g: RootedGraph,
    xi: Potential,
    t: float,
    n_paths: int = DEFAULT_SOLVER.n_paths,
    seed: "int | np.random.Generator | None" = 0,
    tilt: float = 0.0,
    domain: "Optional[Sequence[int] | np.ndarray]" = None,
) -> MonteCarloEstimate:
    """
    Feynman-Kac estimate of U(t) = E_root[exp(int_0^t xi(X_s) ds)].

    The walk holds an Exp(deg) time at every vertex and jumps to a uniform
    neighbour. With ``tilt`` beta != 0 the neighbour is drawn with probability
    proportional to exp(beta xi(y)) and the likelihood ratio enters the weight,
    which keeps the estimator unbiased. Walks leaving the domain are killed.

    Returns:
        MonteCarloEstimate (mean, standard error, path count).
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t == 0:
        return MonteCarloEstimate(1.0, 0.0, n_paths)
    rng = as_generator(seed)
    inside = np.zeros(g.n, dtype=bool)
    inside[default_domain(g) if domain is None else np.asarray(domain, dtype=np.int64)] = True
    if not inside[g.root]:
        raise PreconditionViolated("the root must lie in the Dirichlet domain")
    values = xi.values
    deg = g.degrees.astype(np.float64)
    top = float(np.max(tilt * values)) if tilt else 0.0

    pos = np.full(n_paths, g.root, dtype=np.int64)
    left = np.full(n_paths, float(t))
    log_w = np.zeros(n_paths)
    active = np.arange(n_paths)
    while active.size:
        p = pos[active]
        with np.errstate(divide="ignore"):
            hold = rng.standard_exponential(active.size) / deg[p]
        dt = np.minimum(hold, left[active])
        log_w[active] += values[p] * dt
        left[active] -= dt
        jumping = hold < left[active] + dt
        done = ~jumping | (left[active] <= 0)
        movers = active[~done]
        if movers.size:
            rows, cols = neighbor_pairs(g, pos[movers])
            w = np.exp(tilt * values[cols] - top) if tilt else np.ones(len(cols))
            lengths = np.bincount(rows, minlength=movers.size)
            starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
            cw = np.cumsum(w)
            base = cw[starts] - w[starts]
            tot = cw[starts + lengths - 1] - base
            pick = np.searchsorted(cw, base + rng.random(movers.size) * tot, side="right")
            pick = np.clip(pick, starts, starts + lengths - 1)
            if tilt:
                log_w[movers] += np.log(tot) - np.log(w[pick]) - np.log(lengths)
            target = cols[pick]
            pos[movers] = target
            killed = ~inside[target]
            log_w[movers[killed]] = -np.inf
            movers = movers[~killed]
        active = movers
    est = _summarize(log_w)
    logger.debug("Feynman-Kac: t=%g, %d paths, estimate %.6g +- %.2g",
                 t, n_paths, est.estimate, est.std_error)
    return est


def feynman_kac_curve(
    g: RootedGraph,
    xi: Potential,
    times: "Sequence[float] | np.ndarray",
    cfg: SolverConfig = DEFAULT_SOLVER,
    domain: "Optional[Sequence[int] | np.ndarray]" = None,
) -> MassCurve:
    """Feynman-Kac estimates on a grid; grid point k uses the stream (cfg.seed, k)."""

    t = _check_times(times)
    ests = [total_mass_feynman_kac(g, xi, float(tk), cfg.n_paths, stream(cfg.seed, k),
                                   cfg.tilt, domain) for k, tk in enumerate(t)]
    est = np.array([e.estimate for e in ests])
    with np.errstate(divide="ignore"):
        log_U = np.log(est)
    return MassCurve(t, log_U, 0, None, np.array([e.std_error for e in ests]), "feynman-kac")


def total_mass(g: RootedGraph, xi: Potential, times, cfg: SolverConfig = DEFAULT_SOLVER,
               domain=None) -> MassCurve:
    """Dispatch on ``cfg.method``."""
    if cfg.method == "feynman-kac":
        return feynman_kac_curve(g, xi, times, cfg, domain)
    return total_mass_deterministic(g, xi, times, cfg, domain)


# =============================================================================
# Path evaluation
# =============================================================================

def path_evaluation(g: RootedGraph, xi: Potential, path: VertexPath, gamma: float) -> float:
    """
    E[exp(int_0^{T_l} (xi - gamma)) | jump chain = path].

    Equals prod_{i<l} deg(pi_i) / (gamma - (xi(pi_i) - deg(pi_i))).

    Raises:
        GammaTooSmall: If gamma <= max_{i<l} (xi(pi_i) - deg(pi_i)) + 1e-9.
    """
    steps = path.vertices[:-1]
    if len(steps) == 0:
        return 1.0
    deg = g.degrees[steps].astype(np.float64)
    level = xi.values[steps] - deg
    if gamma <= float(level.max()) + GAMMA_MARGIN:
        raise GammaTooSmall(f"gamma={gamma} must exceed max(xi - deg)={float(level.max())}")
    return float(np.exp(np.sum(np.log(deg) - np.log(gamma - level))))


def conditional_path_mc(
    g: RootedGraph,
    xi: Potential,
    path: VertexPath,
    gamma: float,
    n: int = 10_000,
    seed: "int | np.random.Generator | None" = 0,
) -> MonteCarloEstimate:
    """Monte Carlo of the path functional with holding times resampled along a fixed chain."""
    steps = path.vertices[:-1]
    if len(steps) == 0:
        return MonteCarloEstimate(1.0, 0.0, n)
    rng = as_generator(seed)
    deg = g.degrees[steps].astype(np.float64)
    hold = rng.standard_exponential((n, len(steps))) / deg
    log_w = hold @ (xi.values[steps] - gamma)
    return _summarize(log_w)


# =============================================================================
# Exit times and sandwiches
# =============================================================================

def exit_time_mass(
    g: RootedGraph, xi: Potential, domain: "Sequence[int] | np.ndarray", gamma: float
) -> np.ndarray:
    """
    w(y) = E_y[exp(int_0^tau (xi - gamma))], tau the exit time of Lambda.

    Solves (gamma - H_Lambda) w = b where b(x) counts the edges from x leaving
    Lambda. Returned over the domain basis.

    Raises:
        PreconditionViolated: If gamma <= lambda_Lambda.
    """

    h = assemble(g, domain, xi)
    lam = principal_eigenpair(h).value
    if gamma <= lam:
        raise PreconditionViolated(f"gamma={gamma} must exceed lambda_Lambda={lam}")
    b = h.degree - np.asarray(h.adjacency.sum(axis=1)).ravel()
    a = (gamma * sparse.identity(h.size, format="csc") - h.matrix).tocsc()
    return np.atleast_1d(spsolve(a, b))


@dataclass
class ExitTimeReport:
    mass: float
    bound: float
    eigenvalue: float

    @property
    def holds(self) -> bool:
        return self.mass <= self.bound * (1 + 1e-9)


def exit_time_bound_check(
    g: RootedGraph, xi: Potential, domain: "Sequence[int] | np.ndarray", gamma: float
) -> ExitTimeReport:
    """Largest exit-time mass over Lambda against 1 + d_max |Lambda| / (gamma - lambda_Lambda)."""
    h = assemble(g, domain, xi)
    lam = principal_eigenpair(h).value
    w = exit_time_mass(g, xi, domain, gamma)
    return ExitTimeReport(float(w.max()), 1.0 + g.d_max * h.size / (gamma - lam), lam)


@dataclass
class SolutionSandwich:
    """e^{t lam} phi(y)^2 <= u(y, t) <= U(t) <= e^{t lam} |Lambda|^{1/2} on a domain."""

    lower: float
    at_start: float
    total: float
    upper: float
    mc_total: Optional[float] = None
    mc_std_error: Optional[float] = None
    notes: list[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        tol = 1e-9
        chain = [self.lower, self.at_start, self.total, self.upper]
        ok = all(a <= b * (1 + tol) + tol for a, b in zip(chain, chain[1:]))
        if self.mc_total is not None and self.mc_std_error is not None:
            ok = ok and self.mc_total - 3 * self.mc_std_error <= self.upper * (1 + tol)
        return ok


def solution_sandwich(
    g: RootedGraph,
    xi: Potential,
    domain: "Sequence[int] | np.ndarray",
    y: int,
    t: float,
    n_mc: int = 0,
    seed: int = 0,
    dense_limit: int = DENSE_LIMIT,
) -> SolutionSandwich:
    """
    Bounds on the Dirichlet solution started from y.

    The two middle terms come from the dense spectral solution; with n_mc > 0
    the total mass is also estimated by Feynman-Kac (walk started at y).

    Raises:
        DomainTooLarge: If |Lambda| exceeds the dense limit.
    """
    h = assemble(g, domain, xi)
    if h.size > dense_limit:
        raise DomainTooLarge(f"|Lambda|={h.size} exceeds dense limit {dense_limit}")
    pair = principal_eigenpair(h, dense_limit=dense_limit)
    u = spectral_solution(h, y, t, dense_limit)
    growth = math.exp(t * pair.value)
    report = SolutionSandwich(
        lower=growth * pair.at(y) ** 2,
        at_start=float(u[h.local_index(y)]),
        total=float(u.sum()),
        upper=growth * math.sqrt(h.size),
    )
    if n_mc > 0:
        moved = RootedGraph(g.indptr, g.indices, int(y), g.d_max, g.boundary)
        est = total_mass_feynman_kac(moved, xi, t, n_mc, seed, domain=h.domain)
        report.mc_total, report.mc_std_error = est.estimate, est.std_error
    if not report.holds:
        report.notes.append("inequality chain violated")
    return report
