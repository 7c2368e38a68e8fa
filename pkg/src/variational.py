"""
The variational constant chi_G(rho) and its dual form.

Primal:
    chi_G(rho) = inf_p [ I(p) + rho J(p) ],
    I(p) = sum_{edges} (sqrt p(x) - sqrt p(y))^2,   J(p) = -sum_x p(x) log p(x)

Dual on a domain Lambda:
    chi_hat_Lambda(rho) = -sup { lambda_Lambda(q) : sum_x e^{q(x)/rho} <= 1 }

The primal is minimized in the coordinates s = sqrt(p) on the unit sphere
with multi-start L-BFGS on the scale-invariant lift y -> y / |y|. The dual is
maximized by the fixed-point map q <- rho log phi^2, which is the exact
projected ascent step (the constraint is always active) and never decreases
lambda. Constant potentials are fixed points of that map on whole graphs, so
the ascent is started from rho log p* for the primal minimizer p* as well as
from the Dirichlet ground state and delta-like profiles. For a domain Lambda both agree with the primal infimum over measures
supported in Lambda.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import linalg, optimize, sparse
from scipy.sparse.linalg import eigsh
from scipy.special import entr, xlogy

from .config import DEFAULT_VARIATIONAL, VERTEX_BUDGET, TreeSpec, VariationalOptions
from .errors import InfeasibleBoundary, NoConvergence, PreconditionViolated
from .graphs import RootedGraph, ball, realize_tree
from .rng import stream
from .spectral import Hamiltonian, assemble, principal_eigenpair

logger = logging.getLogger(__name__)


# =============================================================================
# Measures and functionals
# =============================================================================

@dataclass(frozen=True, eq=False)
class SimplexMeasure:
    """Probability measure on the vertices 0 .. n-1."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        if w.size == 0 or w.min() < 0 or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must be nonnegative and sum to 1, got sum {w.sum()!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    @classmethod
    def uniform(cls, n: int) -> "SimplexMeasure":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def delta(cls, n: int, x: int) -> "SimplexMeasure":
        w = np.zeros(n)
        w[x] = 1.0
        return cls(w)

    @classmethod
    def from_sqrt(cls, s: np.ndarray) -> "SimplexMeasure":
        """p = s^2 / |s|^2."""
        p = np.asarray(s, dtype=np.float64) ** 2
        return cls(p / p.sum())


def I_functional(g: RootedGraph, p: "SimplexMeasure | np.ndarray") -> float:
    """
    Dirichlet energy sum over edges of (sqrt p(x) - sqrt p(y))^2.

    Examples:
        >>> from src.graphs import build_graph
        >>> round(I_functional(build_graph([(0, 1)]), np.array([0.25, 0.75])), 5)
        0.13397
    """
    w = p.weights if isinstance(p, SimplexMeasure) else np.asarray(p, dtype=np.float64)
    s = np.sqrt(w)
    e = g.edges
    if len(e) == 0:
        return 0.0
    return float(np.sum((s[e[:, 0]] - s[e[:, 1]]) ** 2))


def J_functional(p: "SimplexMeasure | np.ndarray") -> float:
    """Shannon entropy in nats, with 0 log 0 = 0."""
    w = p.weights if isinstance(p, SimplexMeasure) else np.asarray(p, dtype=np.float64)
    return float(entr(w).sum())


def functional_value(g: RootedGraph, p: "SimplexMeasure | np.ndarray", rho: float) -> float:
    """F(p) = I(p) + rho J(p)."""
    return I_functional(g, p) + rho * J_functional(p)


def _energy_operator(g: RootedGraph, domain: np.ndarray) -> sparse.csr_matrix:
    """D_G - A_Lambda on Lambda, so that I(s^2) = s^T L s for s supported in Lambda."""
    return (-assemble(g, domain, np.zeros(g.n)).matrix).tocsr()


def _value_grad(lap: sparse.csr_matrix, s: np.ndarray, rho: float) -> tuple[float, np.ndarray]:
    ls = lap @ s
    p = s * s
    value = float(s @ ls) - rho * float(xlogy(p, p).sum())
    with np.errstate(divide="ignore", invalid="ignore"):
        dj = np.where(s != 0, 2.0 * s * (np.log(p) + 1.0), 0.0)
    return value, 2.0 * ls - rho * dj


def functional_gradient(g: RootedGraph, s: np.ndarray, rho: float) -> tuple[float, np.ndarray]:
    """F and its gradient with respect to s = sqrt(p) (all vertices, no sphere projection)."""
    lap = _energy_operator(g, np.arange(g.n))
    return _value_grad(lap, np.asarray(s, dtype=np.float64), rho)


def dual_gradient(h: Hamiltonian) -> np.ndarray:
    """d lambda / d q(x) = phi(x)^2 over the domain."""
    return principal_eigenpair(h).phi ** 2


# =============================================================================
# Results
# =============================================================================

@dataclass
class ChiResult:
    """
    Value of a primal or dual optimization.

    Attributes:
        value: chi (>= 0).
        minimizer: p over all vertices (primal) or q over all vertices (dual).
        method: "primal" or "dual".
        iterations: Optimizer iterations summed over starts.
        residual: Final Riemannian gradient norm (primal) or eigenvalue increment (dual).
        restarts: Number of starts used.
    """

    value: float
    minimizer: np.ndarray
    method: str
    iterations: int = 0
    residual: float = 0.0
    restarts: int = 1

    def to_json_dict(self, sentinel: Optional[float] = None) -> dict:
        if self.method == "dual":
            keep = self.minimizer > (sentinel if sentinel is not None else -np.inf)
        else:
            keep = self.minimizer > 0
        return {
            "value": self.value,
            "method": self.method,
            "iterations": self.iterations,
            "residual": self.residual,
            "restarts": self.restarts,
            "minimizer": {str(int(x)): float(self.minimizer[x]) for x in np.flatnonzero(keep)},
        }


@dataclass(frozen=True, eq=False)
class DualPotential:
    """Potential q over all vertices with -inf entries allowed."""

    q: np.ndarray
    rho: float

    def constraint(self) -> float:
        """L(q; rho) = sum_x exp(q(x) / rho)."""
        with np.errstate(under="ignore"):
            return float(np.exp(self.q / self.rho).sum())

    def is_admissible(self, tol: float = 1e-10) -> bool:
        return self.constraint() <= 1.0 + tol

    @classmethod
    def from_result(cls, result: "ChiResult", rho: float, sentinel: float) -> "DualPotential":
        """Dual minimizer with sentinel entries mapped back to -inf."""
        q = np.where(result.minimizer <= sentinel, -np.inf, result.minimizer)
        return cls(q, rho)


# =============================================================================
# Primal
# =============================================================================

SphereObjective = Callable[[np.ndarray], tuple[float, np.ndarray]]


def _sphere_minimize(
    objective: SphereObjective, starts: list[np.ndarray], opts: VariationalOptions
) -> tuple[float, np.ndarray, int, float]:
    """Best (value, unit vector, iterations, residual) over the starts."""
    m = len(starts[0])
    if m == 1:
        u = np.ones(1)
        value, _ = objective(u)
        return value, u, 0, 0.0

    def lifted(y: np.ndarray) -> tuple[float, np.ndarray]:
        norm = float(np.linalg.norm(y))
        u = y / norm
        value, grad = objective(u)
        return value, (grad - (grad @ u) * u) / norm

    best = (math.inf, starts[0], 0, math.inf)
    iterations = 0
    for y0 in starts:
        res = optimize.minimize(
            lifted, y0, jac=True, method="L-BFGS-B",
            options={"maxiter": opts.max_iter, "gtol": opts.grad_tol, "ftol": 1e-15,
                     "maxcor": 30},
        )
        iterations += int(res.nit)
        u = np.abs(res.x) / np.linalg.norm(res.x)
        value, grad = objective(u)
        resid = float(np.linalg.norm(grad - (grad @ u) * u))
        if value < best[0]:
            best = (value, u, iterations, resid)
    value, u, _, resid = best
    if resid > opts.stall_tol:
        raise NoConvergence(iterations, resid, u,
                            f"primal optimization stalled with gradient norm {resid:.3e}")
    if resid > opts.grad_tol:
        logger.debug("primal accepted at gradient norm %.3e (stall tolerance)", resid)
    return value, u, iterations, resid


def _starts(degrees: np.ndarray, opts: VariationalOptions, salt: int) -> list[np.ndarray]:
    m = len(degrees)
    starts = [np.full(m, 1.0 / math.sqrt(m))]
    n_delta = min(m, max(1, (opts.n_starts - 1) // 2))
    for x in np.argsort(-degrees, kind="stable")[:n_delta]:
        p = np.full(m, 0.1 / m)
        p[x] += 0.9
        starts.append(np.sqrt(p))
    rng = stream(opts.seed, salt)
    while len(starts) < opts.n_starts:
        starts.append(np.sqrt(rng.dirichlet(np.ones(m))))
    return starts


def chi_restricted(
    g: RootedGraph,
    domain: "Sequence[int] | np.ndarray",
    rho: float,
    opts: VariationalOptions = DEFAULT_VARIATIONAL,
) -> ChiResult:
    """
    inf of I + rho J over measures supported in Lambda (edges leaving Lambda still count).

    Raises:
        NoConvergence: If no start reaches the stall tolerance.
    """
    dom = np.unique(np.asarray(domain, dtype=np.int64))
    lap = _energy_operator(g, dom)
    value, u, its, resid = _sphere_minimize(
        lambda s: _value_grad(lap, s, rho), _starts(g.degrees[dom], opts, len(dom)), opts)
    p = np.zeros(g.n)
    p[dom] = u * u
    p /= p.sum()
    return ChiResult(max(value, 0.0), p, "primal", its, resid, opts.n_starts)


def chi_primal(
    g: RootedGraph, rho: float, opts: VariationalOptions = DEFAULT_VARIATIONAL
) -> ChiResult:
    """
    chi_G(rho) by multi-start minimization over the whole simplex.

    Examples:
        >>> from src.graphs import build_graph
        >>> chi_primal(build_graph([]), 1.0).value
        0.0
    """
    return chi_restricted(g, np.arange(g.n), rho, opts)


def chi_boundary(
    g: RootedGraph, x: int, b: float, rho: float,
    opts: VariationalOptions = DEFAULT_VARIATIONAL,
) -> float:
    """
    inf of I + rho J over measures with p(x) = b.

    Raises:
        InfeasibleBoundary: If b lies outside [0, 1], or b < 1 on a single vertex.
    """
    if not 0.0 <= b <= 1.0:
        raise InfeasibleBoundary(f"boundary mass must lie in [0, 1], got {b}")
    if b == 1.0:
        return float(g.degree(x))
    if g.n == 1:
        raise InfeasibleBoundary(f"mass {b} < 1 cannot be placed on a single vertex")
    free = np.flatnonzero(np.arange(g.n) != x)
    lap = _energy_operator(g, np.arange(g.n))
    sx, scale = math.sqrt(b), math.sqrt(1.0 - b)

    def objective(u: np.ndarray) -> tuple[float, np.ndarray]:
        s = np.empty(g.n)
        s[x] = sx
        s[free] = scale * u
        value, grad = _value_grad(lap, s, rho)
        return value, scale * grad[free]

    value, _, _, _ = _sphere_minimize(objective, _starts(g.degrees[free], opts, int(x)), opts)
    return max(value, 0.0)


# =============================================================================
# Dual
# =============================================================================

def _top_pair(m: sparse.csr_matrix, v0: np.ndarray) -> tuple[float, np.ndarray]:
    n = m.shape[0]
    if n <= 64:
        vals, vecs = linalg.eigh(m.toarray(), subset_by_index=[n - 1, n - 1])
        vec = vecs[:, 0]
    else:
        vals, vecs = eigsh(m, k=1, which="LA", v0=v0, tol=0)
        vec = vecs[:, 0]
    vec = np.abs(vec)
    return float(vals[0]), vec / np.linalg.norm(vec)


def chi_dual(
    g: RootedGraph,
    domain: "Optional[Sequence[int] | np.ndarray]",
    rho: float,
    opts: VariationalOptions = DEFAULT_VARIATIONAL,
) -> ChiResult:
    """
    chi_hat_Lambda(rho) = -sup { lambda_Lambda(q) : sum e^{q/rho} <= 1 }.

    Args:
        g: Graph.
        domain: Lambda (None for all vertices).
        rho: Tail parameter.
        opts: Iteration cap ``dual_max_iter``, increment tolerance ``dual_tol``,
            sentinel factor for q = -inf.

    Returns:
        ChiResult with q over all vertices; vertices outside Lambda (and
        underflowed ones inside) carry the sentinel -sentinel_factor * rho.

    Raises:
        NoConvergence: If every start still moves by more than ``stall_tol`` at the cap.
    """
    dom = np.arange(g.n) if domain is None else np.unique(np.asarray(domain, dtype=np.int64))
    h = assemble(g, dom, np.zeros(g.n))
    sentinel = -opts.sentinel_factor * rho
    starts = _dual_starts(g, h, dom, rho, sentinel, opts)

    best: Optional[tuple[float, np.ndarray, int, float]] = None
    stalled: Optional[tuple[int, float, np.ndarray]] = None
    total = 0
    for q0 in starts:
        lam, q, it, inc, converged = _ascend(h, q0, rho, sentinel, opts)
        total += it
        if not converged:
            if inc > opts.stall_tol:
                logger.debug("dual start stalled after %d steps, increment %.3e", it, inc)
                if stalled is None or inc < stalled[1]:
                    stalled = (it, inc, q)
                continue
            logger.warning("dual iteration cap reached with increment %.3e", inc)
        if best is None or lam > best[0]:
            best = (lam, q, it, inc)
    if best is None:
        assert stalled is not None
        raise NoConvergence(total, stalled[1], stalled[2],
                            "dual fixed-point iteration did not converge from any start")
    lam, q, it, inc = best
    q_full = np.full(g.n, sentinel)
    q_full[dom] = np.maximum(q, sentinel)
    return ChiResult(max(-lam, 0.0), q_full, "dual", it, max(inc, 0.0), len(starts))


def _log_profile(p: np.ndarray, rho: float, sentinel: float) -> np.ndarray:
    """q = rho log p for a probability vector p, with the sentinel on zeros."""
    p = p / p.sum()
    with np.errstate(divide="ignore"):
        return np.where(p > 0, rho * np.log(p), sentinel)


def _dual_starts(
    g: RootedGraph, h: Hamiltonian, dom: np.ndarray, rho: float, sentinel: float,
    opts: VariationalOptions,
) -> list[np.ndarray]:
    """
    Admissible starting potentials, the restricted primal minimizer first.

    The fixed-point map never decreases lambda, so starting from q = rho log p*
    already gives -lambda <= I(p*) + rho J(p*).
    """
    m = h.size
    if m == 1:
        return [np.zeros(1)]
    starts = []
    try:
        p_star = chi_restricted(g, dom, rho, opts).minimizer[dom]
    except NoConvergence as exc:
        p_star = np.asarray(exc.best) ** 2 if exc.best is not None else None
    if p_star is not None and p_star.sum() > 0:
        starts.append(_log_profile(p_star, rho, sentinel))
    _, ground = _top_pair((h.adjacency - sparse.diags(h.degree)).tocsr(), np.ones(m))
    starts.append(_log_profile(ground * ground, rho, sentinel))
    starts.append(np.full(m, -rho * math.log(m)))
    for x in np.argsort(-h.degree, kind="stable")[:2]:
        p = np.full(m, 0.1 / m)
        p[x] += 0.9
        starts.append(_log_profile(p, rho, sentinel))
    return starts


def _ascend(
    h: Hamiltonian, q: np.ndarray, rho: float, sentinel: float, opts: VariationalOptions
) -> tuple[float, np.ndarray, int, float, bool]:
    """Iterate q <- rho log phi_q^2; returns (lambda, q, steps, last increment, converged)."""
    n = h.size
    phi = np.full(n, 1.0 / math.sqrt(n))
    lam_prev = -math.inf
    inc = math.inf
    it = 0
    for it in range(1, opts.dual_max_iter + 1):
        m = (h.adjacency + sparse.diags(q - h.degree)).tocsr()
        lam, phi = _top_pair(m, phi)
        inc = lam - lam_prev
        if inc <= opts.dual_tol * max(1.0, abs(lam)):
            return max(lam, lam_prev), q, it, inc, True
        lam_prev = lam
        q = _log_profile(phi * phi, rho, sentinel)
    return lam_prev, q, it, inc, False


# =============================================================================
# Ball sequences
# =============================================================================

@dataclass
class BallSequence:
    """chi_hat on growing balls with an extrapolated limit."""

    radii: list[int]
    values: list[float]
    extrapolated: float
    uncertainty: float
    monotone: bool
    notes: list[str] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"r": self.radii, "chi": self.values})


def extrapolate(values: Sequence[float]) -> tuple[float, float]:
    """Aitken limit of a decreasing sequence and the last decrement as its uncertainty."""
    if len(values) == 1:
        return float(values[0]), math.inf
    d2 = values[-1] - values[-2]
    if len(values) >= 3:
        d1 = values[-2] - values[-3]
        if d1 != 0 and 0 < d2 / d1 < 1:
            return float(values[-1] - d2 * d2 / (d2 - d1)), abs(d2)
    return float(values[-1]), abs(d2)


def chi_ball_sequence(
    tree: "TreeSpec | RootedGraph",
    rho: float,
    r_list: Sequence[int],
    opts: VariationalOptions = DEFAULT_VARIATIONAL,
    budget: int = VERTEX_BUDGET,
) -> BallSequence:
    """
    chi_hat_{B_r} around the root for every r in ``r_list``.

    Tree specs are realized to radius max(r) + 1 so every ball vertex keeps its
    full degree. A sampled graph must extend that far.

    Raises:
        BudgetExceeded: If the truncation exceeds ``budget``.
        PreconditionViolated: If a ball reaches the truncation boundary.
    """
    radii = sorted(int(r) for r in r_list)
    g = realize_tree(tree, radii[-1] + 1, budget) if isinstance(tree, TreeSpec) else tree
    values = []
    for r in radii:
        b = ball(g, g.root, r)
        if g.boundary and np.isin(b.members, list(g.boundary)).any():
            raise PreconditionViolated(f"ball of radius {r} reaches the truncation boundary")
        values.append(chi_dual(g, b.members, rho, opts).value)
    monotone = all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
    notes = []
    if not monotone:
        notes.append("sequence is not non-increasing")
        logger.warning("ball sequence not monotone: %s", values)
    limit, err = extrapolate(values)
    return BallSequence(radii, values, limit, err, monotone, notes)
