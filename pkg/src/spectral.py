"""
Anderson Hamiltonian on a sub-domain with Dirichlet boundary.

H_Lambda = Delta_G + q restricted to functions supported on Lambda: row x has
diagonal q(x) - deg_G(x) and +1 towards every neighbour inside Lambda. The
diagonal always uses the full graph degree, so edges leaving Lambda act as
killing.

Eigenvalues follow the largest-eigenvalue convention for Delta + q.
"""

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import DomainTooLarge, EmptyDomain, NoConvergence
from .graphs import RootedGraph, induced_subgraph
from .potential import Potential

logger = logging.getLogger(__name__)

DENSE_LIMIT = 512


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """
    Delta_G + q on the domain Lambda.

    Attributes:
        graph: Parent graph.
        domain: Sorted global ids of Lambda.
        adjacency: Adjacency inside Lambda (local basis, csr).
        degree: deg_G on Lambda.
        q: Potential on Lambda.
    """

    graph: RootedGraph
    domain: np.ndarray
    adjacency: sparse.csr_matrix
    degree: np.ndarray
    q: np.ndarray

    @property
    def size(self) -> int:
        return len(self.domain)

    @cached_property
    def diagonal(self) -> np.ndarray:
        return self.q - self.degree

    @cached_property
    def matrix(self) -> sparse.csr_matrix:
        return (self.adjacency + sparse.diags(self.diagonal)).tocsr()

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def matvec(self, f: np.ndarray) -> np.ndarray:
        return self.adjacency @ f + self.diagonal * f

    def local_index(self, x: int) -> int:
        """Position of vertex x in the domain basis."""
        i = int(np.searchsorted(self.domain, x))
        if i >= self.size or int(self.domain[i]) != x:
            raise ValueError(f"vertex {x} is not in the domain")
        return i

    def with_potential(self, q: "np.ndarray | Potential") -> "Hamiltonian":
        """Same domain and adjacency with a new potential (given over all vertices)."""
        return Hamiltonian(self.graph, self.domain, self.adjacency, self.degree,
                           _potential_on(q, self.graph, self.domain))

    def restrict(self, sub: "Sequence[int] | np.ndarray") -> "Hamiltonian":
        """Hamiltonian on a subdomain Gamma of Lambda with the same potential."""
        full = np.zeros(self.graph.n)
        full[self.domain] = self.q
        return assemble(self.graph, sub, full)


def _potential_on(q: "np.ndarray | Potential", g: RootedGraph, domain: np.ndarray) -> np.ndarray:
    values = q.values if isinstance(q, Potential) else np.asarray(q, dtype=np.float64)
    if len(values) != g.n:
        raise ValueError(f"potential has {len(values)} entries for a graph with {g.n} vertices")
    return np.array(values[domain], dtype=np.float64)


def assemble(
    g: RootedGraph, domain: "Sequence[int] | np.ndarray", q: "np.ndarray | Potential"
) -> Hamiltonian:
    """
    Assemble H_Lambda for the potential q (indexed by global vertex ids).

    Raises:
        EmptyDomain: If Lambda is empty.

    Examples:
        >>> from src.graphs import build_graph
        >>> assemble(build_graph([(0, 1)]), [0, 1], np.zeros(2)).dense()
        array([[-1.,  1.],
               [ 1., -1.]])
    """
    dom = np.unique(np.asarray(domain, dtype=np.int64))
    if len(dom) == 0:
        raise EmptyDomain("Dirichlet domain is empty")
    if dom[0] < 0 or dom[-1] >= g.n:
        raise ValueError(f"domain vertices must lie in [0, {g.n})")
    sub, _ = induced_subgraph(g, dom, int(dom[0]))
    adjacency = sub.adjacency_matrix.astype(np.float64)
    dom.setflags(write=False)
    return Hamiltonian(g, dom, adjacency, g.degrees[dom].astype(np.float64),
                       _potential_on(q, g, dom))


# =============================================================================
# Eigenpairs
# =============================================================================

@dataclass(frozen=True, eq=False)
class Eigenpair:
    """Principal eigenvalue and nonnegative unit eigenfunction on a domain."""

    value: float
    phi: np.ndarray
    domain: np.ndarray
    q: np.ndarray
    residual: float = 0.0
    degenerate: bool = False

    def at(self, x: int) -> float:
        i = int(np.searchsorted(self.domain, x))
        if i < len(self.domain) and int(self.domain[i]) == x:
            return float(self.phi[i])
        return 0.0

    def to_json_dict(self) -> dict:
        return {
            "domain": self.domain.tolist(),
            "q": self.q.tolist(),
            "lambda": self.value,
            "phi": self.phi.tolist(),
            "residual": self.residual,
            "degenerate": self.degenerate,
        }

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_json_dict(), sort_keys=True, indent=2))


def _top_dense(m: sparse.csr_matrix) -> tuple[float, np.ndarray]:
    n = m.shape[0]
    vals, vecs = linalg.eigh(m.toarray(), subset_by_index=[n - 1, n - 1])
    return float(vals[0]), vecs[:, 0]


def _top_sparse(m: sparse.csr_matrix, tol: float) -> tuple[float, np.ndarray]:
    v0 = np.ones(m.shape[0]) / np.sqrt(m.shape[0])
    try:
        vals, vecs = eigsh(m, k=1, which="LA", v0=v0, tol=tol)
    except ArpackNoConvergence as exc:
        best = exc.eigenvectors[:, 0] if exc.eigenvectors.size else None
        resid = float("nan")
        if best is not None:
            resid = float(np.linalg.norm(m @ best - exc.eigenvalues[0] * best))
        raise NoConvergence(m.shape[0] * 10, resid, best, "Lanczos iteration did not converge")
    return float(vals[0]), vecs[:, 0]


def principal_eigenpair(
    h: Hamiltonian, tol: float = 1e-10, dense_limit: int = DENSE_LIMIT
) -> Eigenpair:
    """
    Largest eigenvalue of H_Lambda with a nonnegative unit eigenfunction.

    Each connected component of Lambda is solved on its own: dense ``eigh`` up to
    ``dense_limit`` vertices, Lanczos (``eigsh``, largest algebraic) above. When
    several components share the top eigenvalue the one holding the smallest
    vertex id wins and the pair is flagged degenerate.

    Raises:
        NoConvergence: If the Lanczos solve fails or the residual exceeds tol.
    """
    n_comp, labels = connected_components(h.adjacency, directed=False)
    scale = max(1.0, float(np.abs(h.diagonal).max()) + float(h.degree.max(initial=0)))
    solved = []
    for c in range(n_comp):
        idx = np.flatnonzero(labels == c)
        m = h.matrix[idx][:, idx]
        lam, vec = _top_dense(m) if len(idx) <= dense_limit else _top_sparse(m, tol)
        solved.append((lam, idx, vec))
    top = max(s[0] for s in solved)
    tied = sorted((s for s in solved if s[0] >= top - 1e-9 * scale), key=lambda s: int(s[1][0]))
    degenerate = len(tied) > 1
    lam, idx, vec = tied[0]
    phi = np.zeros(h.size)
    phi[idx] = np.abs(vec)
    phi /= np.linalg.norm(phi)
    residual = float(np.linalg.norm(h.matvec(phi) - lam * phi))
    if residual > max(tol, 1e-12) * scale * max(1.0, np.sqrt(h.size)):
        raise NoConvergence(1, residual, phi, f"eigenpair residual {residual:.3e} above tolerance")
    if degenerate:
        logger.debug("degenerate principal eigenvalue %.6g across components", lam)
    return Eigenpair(lam, phi, h.domain, h.q, residual, degenerate)


def rayleigh_quotient(h: Hamiltonian, f: np.ndarray) -> float:
    """<f, H f> / <f, f>."""
    f = np.asarray(f, dtype=np.float64)
    return float(f @ h.matvec(f) / (f @ f))


def eigenvalue_sandwich_check(
    h: Hamiltonian, sub: "Sequence[int] | np.ndarray", tol: float = 1e-9
) -> bool:
    """
    max_Gamma q - d_max <= lambda_Gamma <= lambda_Lambda <= max_Lambda q for Gamma in Lambda.
    """
    sub = np.unique(np.asarray(sub, dtype=np.int64))
    if not np.isin(sub, h.domain).all():
        raise ValueError("Gamma must be a subset of the domain")
    hg = h.restrict(sub)
    lam_g = principal_eigenpair(hg).value
    lam_l = principal_eigenpair(h).value
    d_max = h.graph.d_max
    checks = (
        hg.q.max() - d_max <= lam_g + tol,
        lam_g <= lam_l + tol,
        lam_l <= h.q.max() + tol,
    )
    if not all(checks):
        logger.warning("eigenvalue sandwich fails: %s", checks)
    return all(checks)


# =============================================================================
# Full spectra
# =============================================================================

def full_spectrum(h: Hamiltonian, dense_limit: int = DENSE_LIMIT) -> tuple[np.ndarray, np.ndarray]:
    """
    All eigenvalues (ascending) and orthonormal eigenvectors of H_Lambda.

    Raises:
        DomainTooLarge: If |Lambda| exceeds dense_limit.
    """
    if h.size > dense_limit:
        raise DomainTooLarge(f"|Lambda|={h.size} exceeds dense limit {dense_limit}")
    return linalg.eigh(h.dense())


def spectral_solution(
    h: Hamiltonian, y: int, t: float, dense_limit: int = DENSE_LIMIT
) -> np.ndarray:
    """
    u(x, t) = sum_k e^{t lambda_k} phi_k(y) phi_k(x) on Lambda, started from delta_y.

    Returns:
        Values over the domain basis (aligned with ``h.domain``).

    Raises:
        DomainTooLarge: If |Lambda| exceeds dense_limit.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    iy = h.local_index(y)
    if t == 0:
        out = np.zeros(h.size)
        out[iy] = 1.0
        return out
    vals, vecs = full_spectrum(h, dense_limit)
    return vecs @ (np.exp(t * vals) * vecs[iy])
