"""Exception types raised across the laboratory.

Every error derives from :class:`PamError` and from the builtin that matches
its nature (``ValueError`` for invalid input, ``RuntimeError`` for numerical
or budget failures), so callers may catch either family.
"""

from typing import Any, Optional


class PamError(Exception):
    """Base class for all laboratory errors."""


# -----------------------------------------------------------------------------
# Graph construction
# -----------------------------------------------------------------------------

class GraphError(PamError, ValueError):
    """Invalid graph input."""


class DuplicateEdge(GraphError):
    """An edge appears twice (in either orientation)."""


class SelfLoop(GraphError):
    """An edge joins a vertex to itself."""


class Disconnected(GraphError):
    """Some vertex cannot be reached from the root."""


class DegreeBoundExceeded(GraphError):
    """A vertex degree exceeds the declared bound d_max."""


class PathNotInGraph(GraphError):
    """A vertex path leaves the graph or takes a non-edge step."""


class SizeLimit(PamError, ValueError):
    """A ball is too large for the configured isomorphism test."""


# -----------------------------------------------------------------------------
# Budgets
# -----------------------------------------------------------------------------

class BudgetExceeded(PamError, RuntimeError):
    """A computation would exceed its configured vertex or work budget."""


class SizeOverflow(BudgetExceeded):
    """A deterministic construction would exceed the vertex budget."""


class VertexBudgetExceeded(SizeOverflow):
    """A random sampler exceeded the vertex budget."""


# -----------------------------------------------------------------------------
# Random graphs
# -----------------------------------------------------------------------------

class NonExpanding(PamError, ValueError):
    """The offspring mean E[D_g - 1] is at most one."""


class OddTotalDegree(PamError, ValueError):
    """The degree sequence has an odd sum, so no perfect matching exists."""


class MaxAttemptsExceeded(PamError, RuntimeError):
    """Rejection sampling gave up before producing an accepted sample."""

    def __init__(self, attempts: int, message: Optional[str] = None):
        self.attempts = attempts
        super().__init__(message or f"no accepted sample after {attempts} attempts")


class CouplingRegimeViolated(UserWarning):
    """Time and graph size lie outside the regime where the coupling is valid."""


# -----------------------------------------------------------------------------
# Spectral and solver errors
# -----------------------------------------------------------------------------

class EmptyDomain(PamError, ValueError):
    """An operator was requested on an empty vertex set."""


class DomainTooLarge(PamError, ValueError):
    """A dense computation was requested on a domain above the dense limit."""


class NoConvergence(PamError, RuntimeError):
    """An iterative solver stopped without meeting its tolerance.

    Attributes:
        iterations: Iterations performed.
        residual: Residual (or gradient norm) at the best iterate.
        best: Best iterate found, if any.
    """

    def __init__(self, iterations: int, residual: float, best: Any = None, message: str = ""):
        self.iterations = iterations
        self.residual = residual
        self.best = best
        super().__init__(
            message or f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )


class StepControlFailure(PamError, RuntimeError):
    """Time stepping produced a non-finite or non-positive mass."""


class GammaTooSmall(PamError, ValueError):
    """gamma does not exceed max(xi - deg) along the path."""


class PreconditionViolated(PamError, ValueError):
    """The inputs do not satisfy the operation's precondition."""


class InfeasibleBoundary(PamError, ValueError):
    """The boundary value b leaves no admissible probability measure."""


class GridTooCoarse(PamError, RuntimeError):
    """Successive grid refinements disagree by more than the tolerance."""

    def __init__(self, value: float, gap: float, tol: float):
        self.value = value
        self.gap = gap
        super().__init__(f"refinement gap {gap:.3e} exceeds tolerance {tol:.3e} (value {value:.8f})")


class NotFound(PamError, RuntimeError):
    """No certificate vertex was found; ``coverage`` is the scanned fraction."""

    def __init__(self, coverage: float, scanned: int, message: str = ""):
        self.coverage = coverage
        self.scanned = scanned
        super().__init__(message or f"no qualifying vertex among {scanned} scanned ({coverage:.1%})")
