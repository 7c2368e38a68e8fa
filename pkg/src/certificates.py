"""
Lower-bound certificates for the total mass.

A certificate records a vertex z whose (R+1)-ball copies a profile tree Q and
on whose R-ball the potential dominates a_{|B_l|} + q. The walk that runs
along a shortest path to z and then stays near z gives

    log U(t) >= sum_path -log deg  +  log P(Poisson(d s) >= |z|)
                + 2 log phi_Q(root)  +  (t - s) (a_{|B_l|} + lambda_Q(q))

for any s in (0, t], where d is the smallest degree on the path and
(lambda_Q(q), phi_Q) the principal eigenpair of Delta + q on the profile ball.
Every number in the chain is stored, so the bound re-verifies without
re-sampling.
"""

import json
import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.stats import poisson

from .config import DEFAULT_VARIATIONAL, TreeSpec, VariationalOptions
from .errors import NotFound, PreconditionViolated
from .graphs import (
    RootedGraph,
    ball,
    graph_from_json_dict,
    realize_tree,
    shortest_path,
)
from .isomorphism import tree_isomorphism
from .potential import Potential, a_scale
from .spectral import assemble, principal_eigenpair
from .variational import chi_dual

logger = logging.getLogger(__name__)

# Slack for floating comparisons in the chain
CHAIN_TOL = 1e-9


# =============================================================================
# Profiles
# =============================================================================

@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """
    Potential profile q on the ball Q_R of a rooted tree.

    Attributes:
        tree: Q_{R+1}, the tree truncated at radius R + 1 (root = Y).
        R: Profile radius.
        domain: Vertices of Q_R (sorted ids of ``tree``).
        q: Profile values on ``domain``.
        rho: Tail parameter.
        eigenvalue: lambda_{Q_R}(q).
        phi_root: Principal eigenfunction at the root.
    """

    tree: RootedGraph
    R: int
    domain: np.ndarray
    q: np.ndarray
    rho: float
    eigenvalue: float
    phi_root: float

    def constraint(self) -> float:
        """sum over Q_R of exp(q / rho)."""
        with np.errstate(under="ignore"):
            return float(np.exp(self.q / self.rho).sum())

    def to_json_dict(self) -> dict:
        return {
            "tree": self.tree.to_json_dict(),
            "R": self.R,
            "domain": self.domain.tolist(),
            "q": self.q.tolist(),
            "rho": self.rho,
            "eigenvalue": self.eigenvalue,
            "phi_root": self.phi_root,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PotentialProfile":
        return cls(graph_from_json_dict(data["tree"]), int(data["R"]),
                   np.asarray(data["domain"], dtype=np.int64), np.asarray(data["q"], dtype=float),
                   float(data["rho"]), float(data["eigenvalue"]), float(data["phi_root"]))


def _profile_eigenpair(tree: RootedGraph, domain: np.ndarray, q: np.ndarray) -> tuple[float, float]:
    full = np.zeros(tree.n)
    full[domain] = q
    pair = principal_eigenpair(assemble(tree, domain, full))
    return pair.value, pair.at(tree.root)


def dual_profile(
    tree: "TreeSpec | RootedGraph",
    R: int,
    rho: float,
    opts: VariationalOptions = DEFAULT_VARIATIONAL,
) -> PotentialProfile:
    """
    Optimal dual potential on Q_R of a tree; lambda_{Q_R}(q) = -chi_hat_{Q_R}.

    A sampled tree must extend at least to radius R + 1.
    """
    g = realize_tree(tree, R + 1) if isinstance(tree, TreeSpec) else tree
    b = ball(g, g.root, R + 1)
    inner = np.flatnonzero(b.distance <= R)
    if g.boundary and np.isin(b.members[inner], list(g.boundary)).any():
        raise PreconditionViolated(f"tree is truncated inside radius {R}")
    q_ball, _ = b.subgraph()
    result = chi_dual(q_ball, inner, rho, opts)
    q = result.minimizer[inner]
    lam, phi_root = _profile_eigenpair(q_ball, inner, q)
    logger.debug("profile R=%d: lambda=%.6g phi(root)=%.4g", R, lam, phi_root)
    return PotentialProfile(q_ball, R, inner, q, rho, lam, phi_root)


# =============================================================================
# Certificates
# =============================================================================

@dataclass
class LowerBoundCertificate:
    """Every number in the lower-bound chain for (1/t) log U(t)."""

    z: int
    distance: int
    ell: int
    L_ell: int
    R: int
    rho: float
    t: float
    epsilon: float
    level: float
    xi_ball: list[float]
    q_mapped: list[float]
    path_degrees: list[int]
    d_min: int
    s: float
    log_path: float
    log_tail: float
    local_eigenvalue: float
    log_bound: float
    exponent: float
    z_over_ell: float
    coverage: float
    profile: PotentialProfile
    simulated: Optional[float] = None
    notes: list[str] = field(default_factory=list)

    @property
    def consistent(self) -> Optional[bool]:
        """Certified exponent <= simulated (1/t) log U(t), when a simulation was supplied."""
        if self.simulated is None:
            return None
        return self.exponent <= self.simulated + 1e-6

    def to_json_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["profile"] = self.profile.to_json_dict()
        return data

    @classmethod
    def from_json_dict(cls, data: dict) -> "LowerBoundCertificate":
        data = dict(data)
        data["profile"] = PotentialProfile.from_json_dict(data["profile"])
        return cls(**data)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_json_dict(), sort_keys=True, indent=2))


def _waiting_time(distance: int, ell: int, d_min: int, rate: float, t: float,
                  epsilon: float) -> float:
    if distance == 0:
        return 0.0
    return min(t, ell / max(d_min + rate - epsilon, float(d_min)))


def _log_chain(
    path_degrees: list[int], distance: int, s: float, d_min: int, t: float, rate: float,
    phi_root: float,
) -> tuple[float, float, float]:
    """(log path probability, log Poisson tail, log bound)."""
    log_path = -float(np.log(path_degrees).sum()) if path_degrees else 0.0
    log_tail = float(poisson.logsf(distance - 1, d_min * s)) if distance > 0 else 0.0
    stay = (t - s) * rate if rate >= 0 else t * rate
    return log_path, log_tail, log_path + log_tail + 2.0 * math.log(phi_root) + stay


def _match(g: RootedGraph, z: int, profile: PotentialProfile) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Global ids of B_R(z) and their profile positions, if B_{R+1}(z) copies the profile tree."""
    bz = ball(g, z, profile.R + 1)
    if bz.L != profile.tree.n:
        return None
    sub, local_to_global = bz.subgraph()
    if not sub.is_tree:
        return None
    mapping = tree_isomorphism(sub, sub.root, profile.tree, profile.tree.root)
    if mapping is None:
        return None
    inner = np.flatnonzero(bz.distance <= profile.R)
    targets = np.array([mapping[int(i)] for i in inner], dtype=np.int64)
    return local_to_global[inner], np.searchsorted(profile.domain, targets)


def find_lower_bound_certificate(
    g: RootedGraph,
    xi: Potential,
    profile: PotentialProfile,
    t: float,
    ell: int,
    epsilon: float = 0.1,
    simulated: Optional[float] = None,
) -> LowerBoundCertificate:
    """
    Scan B_ell(root) for a vertex carrying the profile above a_{|B_ell|}.

    Candidates z with B_{R+1}(z) inside B_ell are visited by increasing
    distance from the root (then id); the first match yields the certificate.

    Args:
        g: Graph.
        xi: Potential.
        profile: Dual profile on Q_R.
        t: Time horizon.
        ell: Search radius.
        epsilon: Slack subtracted in the waiting-time choice.
        simulated: Optional (1/t) log U(t) from a solver, recorded for comparison.

    Raises:
        NotFound: If no candidate matches; carries the scanned fraction.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    b = ball(g, g.root, ell)
    level = a_scale(b.L, xi.rho)
    reach = ell - profile.R - 1
    order = np.lexsort((b.members, b.distance))
    candidates = [int(b.members[i]) for i in order if b.distance[i] <= reach]
    for k, z in enumerate(candidates):
        matched = _match(g, z, profile)
        if matched is None:
            continue
        verts, pos = matched
        q_mapped = profile.q[pos]
        if np.any(xi.values[verts] < level + q_mapped):
            continue
        coverage = (k + 1) / len(candidates)
        return _certify(g, xi, profile, z, verts, q_mapped, t, ell, b.L, level, epsilon,
                        coverage, simulated)
    raise NotFound(1.0 if candidates else 0.0, len(candidates),
                   f"no vertex within distance {reach} carries the profile above level {level:.4g}")


def _certify(
    g: RootedGraph, xi: Potential, profile: PotentialProfile, z: int, verts: np.ndarray,
    q_mapped: np.ndarray, t: float, ell: int, L_ell: int, level: float, epsilon: float,
    coverage: float, simulated: Optional[float],
) -> LowerBoundCertificate:
    path = shortest_path(g, g.root, z)
    degrees = [int(g.degree(int(y))) for y in path.vertices[:-1]]
    distance = path.length
    d_min = min(degrees) if degrees else int(g.degree(z))
    rate = level + profile.eigenvalue
    s = _waiting_time(distance, ell, d_min, rate, t, epsilon)
    log_path, log_tail, log_bound = _log_chain(degrees, distance, s, d_min, t, rate,
                                               profile.phi_root)
    local = principal_eigenpair(assemble(g, verts, xi)).value
    cert = LowerBoundCertificate(
        z=z, distance=distance, ell=ell, L_ell=L_ell, R=profile.R, rho=xi.rho, t=t,
        epsilon=epsilon, level=level, xi_ball=xi.values[verts].tolist(),
        q_mapped=q_mapped.tolist(), path_degrees=degrees, d_min=d_min, s=s,
        log_path=log_path, log_tail=log_tail, local_eigenvalue=local, log_bound=log_bound,
        exponent=log_bound / t, z_over_ell=distance / ell if ell else 0.0,
        coverage=coverage, profile=profile, simulated=simulated,
    )
    if local < rate - 1e-7:
        cert.notes.append(f"local eigenvalue {local:.6g} below level + lambda_Q {rate:.6g}")
    logger.info("certificate at z=%d (|z|=%d): exponent %.4g", z, distance, cert.exponent)
    return cert


def verify_certificate(cert: LowerBoundCertificate) -> list[str]:
    """
    Recompute the chain from the stored numbers.

    Returns:
        Failed checks (empty when the certificate verifies).
    """
    failures = []
    level = a_scale(cert.L_ell, cert.rho)
    if abs(level - cert.level) > CHAIN_TOL:
        failures.append("level")
    if np.any(np.asarray(cert.xi_ball) < level + np.asarray(cert.q_mapped) - CHAIN_TOL):
        failures.append("domination")
    if cert.profile.constraint() > 1.0 + 1e-8:
        failures.append("profile constraint")
    lam, phi_root = _profile_eigenpair(cert.profile.tree, cert.profile.domain, cert.profile.q)
    if abs(lam - cert.profile.eigenvalue) > 1e-7 or abs(phi_root - cert.profile.phi_root) > 1e-7:
        failures.append("profile eigenpair")
    if len(cert.path_degrees) != cert.distance or cert.distance > cert.ell - cert.R - 1:
        failures.append("path")
    if cert.path_degrees and cert.d_min > min(cert.path_degrees):
        failures.append("d_min")
    if not 0 <= cert.s <= cert.t:
        failures.append("waiting time")
    _, _, log_bound = _log_chain(cert.path_degrees, cert.distance, cert.s, cert.d_min, cert.t,
                                 level + lam, phi_root)
    if abs(log_bound - cert.log_bound) > 1e-6 * max(1.0, abs(log_bound)):
        failures.append("bound")
    if abs(cert.exponent - cert.log_bound / cert.t) > CHAIN_TOL:
        failures.append("exponent")
    if cert.consistent is False:
        failures.append("simulation")
    return failures


# =============================================================================
# Planting
# =============================================================================

def plant_profile(
    g: RootedGraph, xi: Potential, z: int, profile: PotentialProfile, ell: int,
    margin: float = 0.05,
) -> Potential:
    """
    Raise xi on B_R(z) to at least a_{|B_ell|} + q + margin.

    Raises:
        PreconditionViolated: If B_{R+1}(z) does not copy the profile tree.
    """
    matched = _match(g, z, profile)
    if matched is None:
        raise PreconditionViolated(f"ball around {z} does not copy the profile tree")
    verts, pos = matched
    level = a_scale(ball(g, g.root, ell).L, xi.rho)
    target = np.maximum(xi.values[verts], level + profile.q[pos] + margin)
    return xi.with_values(verts, np.maximum(target, 0.0))
