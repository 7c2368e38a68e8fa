"""Configuration management with pydantic models."""

import json
import math
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# Largest graph any deterministic construction may build.
VERTEX_BUDGET = 2_000_000


class DegreeLaw(BaseModel):
    """Law of a bounded positive integer degree (D_0, D_g or D)."""

    model_config = ConfigDict(frozen=True)

    support: tuple[int, ...] = Field(..., description="Sorted distinct degrees, each >= 1")
    probabilities: tuple[float, ...] = Field(..., description="Probabilities summing to 1")

    @model_validator(mode="after")
    def _check_law(self) -> "DegreeLaw":
        if len(self.support) == 0 or len(self.support) != len(self.probabilities):
            raise ValueError("support and probabilities must be nonempty and of equal length")
        if any(k < 1 for k in self.support):
            raise ValueError(f"degrees must be >= 1, got {self.support}")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValueError(f"support must be sorted and distinct, got {self.support}")
        if any(p < 0 for p in self.probabilities):
            raise ValueError("probabilities must be nonnegative")
        if abs(math.fsum(self.probabilities) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {math.fsum(self.probabilities)!r}, not 1")
        return self

    @classmethod
    def delta(cls, k: int) -> "DegreeLaw":
        """Point mass at k."""
        return cls(support=(k,), probabilities=(1.0,))

    @classmethod
    def uniform(cls, ks: list[int]) -> "DegreeLaw":
        """Uniform law on the distinct values ks."""
        values = sorted(set(ks))
        return cls(support=tuple(values), probabilities=tuple([1.0 / len(values)] * len(values)))

    @property
    def min_degree(self) -> int:
        return min(k for k, p in zip(self.support, self.probabilities) if p > 0)

    @property
    def max_degree(self) -> int:
        return max(k for k, p in zip(self.support, self.probabilities) if p > 0)

    def expect(self, values: "np.ndarray | list[float]") -> float:
        """E[f(D)] given the values f(k) aligned with the support."""
        return float(math.fsum(p * v for p, v in zip(self.probabilities, values)))

    def mean(self) -> float:
        return self.expect([float(k) for k in self.support])

    def pmf(self, k: int) -> float:
        return dict(zip(self.support, self.probabilities)).get(k, 0.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. degrees; a point mass consumes no randomness."""
        if len(self.support) == 1:
            return np.full(size, self.support[0], dtype=np.int64)
        return rng.choice(np.asarray(self.support, dtype=np.int64), size=size,
                          p=np.asarray(self.probabilities))


class GWSpec(BaseModel):
    """Galton-Watson tree specification under the bounded-degree assumption."""

    model_config = ConfigDict(frozen=True)

    initial: DegreeLaw = Field(..., description="Root degree law D_0")
    general: DegreeLaw = Field(..., description="Degree law D_g of every other vertex")
    radius: int = Field(default=6, ge=0, description="Truncation radius R")
    seed: int = Field(default=0, ge=0, description="Root seed")
    d_max: Optional[int] = Field(default=None, description="Declared degree bound")
    vertex_budget: int = Field(default=VERTEX_BUDGET, gt=0, description="Vertex budget")

    @model_validator(mode="after")
    def _check_bounded_degree(self) -> "GWSpec":
        if self.general.min_degree < 2:
            raise ValueError(f"min supp(D_g) must be >= 2, got {self.general.min_degree}")
        if self.general.mean() <= 2:
            raise ValueError(f"E[D_g] must exceed 2, got {self.general.mean()}")
        top = max(self.initial.max_degree, self.general.max_degree)
        if self.d_max is not None and top > self.d_max:
            raise ValueError(f"degree {top} exceeds d_max={self.d_max}")
        return self

    @property
    def degree_bound(self) -> int:
        return self.d_max or max(self.initial.max_degree, self.general.max_degree)


class TreeSpec(BaseModel):
    """Deterministic infinite tree, realized as a truncation on demand."""

    kind: Literal["homogeneous", "half-homogeneous", "glued"] = Field(
        ..., description="Tree family"
    )
    d: Optional[int] = Field(default=None, ge=2, description="Degree for (half-)homogeneous trees")
    components: list["TreeSpec"] = Field(default_factory=list, description="Glued components")
    join: Literal["roots", "hub"] = Field(
        default="roots", description="Join two components root-to-root, or all to a new hub"
    )

    @model_validator(mode="after")
    def _check_kind(self) -> "TreeSpec":
        if self.kind in ("homogeneous", "half-homogeneous") and self.d is None:
            raise ValueError(f"{self.kind} tree needs d")
        if self.kind == "glued":
            if self.join == "roots" and len(self.components) != 2:
                raise ValueError("root-to-root glueing needs exactly two components")
            if self.join == "hub" and len(self.components) < 1:
                raise ValueError("hub glueing needs at least one component")
        return self


TreeSpec.model_rebuild()


class LandscapeConfig(BaseModel):
    """Potential-landscape parameters (exceedance margin, island scale, peak level)."""

    A: float = Field(default=1.0, gt=0, description="Exceedance margin A")
    alpha: float = Field(default=0.5, gt=0, lt=1, description="Island radius exponent alpha")
    epsilon: float = Field(default=0.1, gt=0, lt=1, description="Peak level epsilon")
    M_A: int = Field(default=10, ge=1, description="Diagnostic cap on high points per island")


class SolverConfig(BaseModel):
    """Total-mass solver configuration."""

    method: Literal["deterministic", "feynman-kac"] = Field(default="deterministic")
    truncation_c: float = Field(default=1.0, gt=0, description="Truncation constant c")
    r_hint: int = Field(default=0, ge=0, description="Minimum truncation radius")
    substep_norm: float = Field(
        default=20.0, gt=0, description="Upper bound on ||H - shift||_1 * dt per substep"
    )
    max_substeps: int = Field(default=100_000, gt=0, description="Substep budget per run")
    vertex_budget: int = Field(default=500_000, gt=0, description="Largest truncated domain")
    n_paths: int = Field(default=10_000, gt=0, description="Feynman-Kac sample paths")
    tilt: float = Field(default=0.0, description="Importance tilt beta (0 = plain estimator)")
    seed: int = Field(default=0, ge=0, description="Monte Carlo seed")
    dense_limit: int = Field(default=512, gt=0, description="Dense eigensolver threshold")
    eig_tol: float = Field(default=1e-10, gt=0, description="Eigenpair residual tolerance")


class VariationalOptions(BaseModel):
    """Variational solver options."""

    n_starts: int = Field(default=8, ge=1, description="Multi-starts per optimization")
    max_iter: int = Field(default=100_000, gt=0, description="Iteration cap per start")
    grad_tol: float = Field(default=1e-9, gt=0, description="Riemannian gradient tolerance")
    stall_tol: float = Field(
        default=1e-6, gt=0, description="Gradient norm accepted when line search stalls"
    )
    seed: int = Field(default=0, ge=0, description="Seed for random starts")
    dual_max_iter: int = Field(default=20_000, gt=0, description="Fixed-point iteration cap")
    dual_tol: float = Field(default=1e-13, gt=0, description="Eigenvalue increment tolerance")
    sentinel_factor: float = Field(default=1e6, gt=0, description="-inf sentinel is -factor*rho")
    dense_limit: int = Field(default=512, gt=0, description="Dense eigensolver threshold")
    grid_points: int = Field(default=33, ge=5, description="Glue grid points per variable")
    grid_refinements: int = Field(default=2, ge=0, description="Local grid refinements")
    grid_tol: float = Field(default=1e-3, gt=0, description="Refinement gap that raises")


class GraphSpec(BaseModel):
    """Random or deterministic graph used by an experiment."""

    kind: Literal["gw", "cm", "homogeneous", "half-homogeneous", "file"] = Field(default="gw")
    initial: Optional[DegreeLaw] = Field(default=None, description="D_0 for GW trees")
    general: Optional[DegreeLaw] = Field(default=None, description="D_g for GW trees")
    degree: Optional[DegreeLaw] = Field(default=None, description="Limit law D for CM graphs")
    n: int = Field(default=1000, ge=1, description="Vertex count for CM graphs")
    degrees_path: Optional[Path] = Field(default=None, description="CSV/JSON degree sequence")
    d: Optional[int] = Field(default=None, ge=2, description="Degree for homogeneous trees")
    path: Optional[Path] = Field(default=None, description="Graph JSON for kind='file'")
    require_connected: bool = Field(default=False, description="Reject disconnected CM samples")
    max_attempts: int = Field(default=10_000, gt=0, description="Rejection budget")

    @model_validator(mode="after")
    def _check_graph(self) -> "GraphSpec":
        if self.kind == "gw" and self.general is None:
            raise ValueError("gw graphs need the general law D_g")
        if self.kind == "cm" and self.degree is None and self.degrees_path is None:
            raise ValueError("cm graphs need a limit law or a degree sequence file")
        if self.kind in ("homogeneous", "half-homogeneous") and self.d is None:
            raise ValueError(f"{self.kind} graphs need d")
        if self.kind == "file" and self.path is None:
            raise ValueError("file graphs need a path")
        return self

    def root_law(self) -> DegreeLaw:
        """D_0, defaulting to D_g."""
        assert self.general is not None
        return self.initial or self.general


class TimeGrid(BaseModel):
    """Geometric time grid t_k = t_min * ratio**k."""

    t_min: float = Field(default=1.0, gt=0)
    ratio: float = Field(default=2.0, gt=1)
    count: int = Field(default=4, ge=1)

    def values(self) -> list[float]:
        return [self.t_min * self.ratio**k for k in range(self.count)]


class CertificateConfig(BaseModel):
    """Lower-bound certificate search."""

    t: float = Field(default=8.0, gt=0, description="Time at which the bound is certified")
    R: int = Field(default=1, ge=0, description="Profile radius")
    ell: Optional[int] = Field(default=None, ge=1, description="Search radius (default r_t)")
    epsilon: float = Field(default=0.1, ge=0, description="Slack epsilon in the waiting time")
    planted: bool = Field(default=False, description="Plant the profile before searching")
    margin: float = Field(default=0.05, ge=0, description="Excess planted above the profile")


class OutputConfig(BaseModel):
    """Output configuration."""

    output_dir: Path = Field(default=Path("outputs"), description="Output directory")
    dpi: int = Field(default=150, description="PNG export resolution")
    figure_size: tuple[int, int] = Field(default=(8, 5), description="Figure size in inches")
    plots: bool = Field(default=False, description="Also write PNG figures")


class ExperimentConfig(BaseModel):
    """Complete, seeded description of one experiment."""

    kind: Literal[
        "lyapunov-gw", "lyapunov-cm", "chi-catalog", "islands", "coupling",
        "lower-bound-certificate",
    ] = Field(..., description="Experiment kind")
    name: str = Field(default="run", description="Run identifier (output subdirectory)")
    graph: GraphSpec = Field(default_factory=lambda: GraphSpec(kind="homogeneous", d=3))
    rho: float = Field(default=1.0, gt=0, description="Tail parameter rho")

    landscape: LandscapeConfig = Field(default_factory=LandscapeConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    variational: VariationalOptions = Field(default_factory=VariationalOptions)
    certificate: CertificateConfig = Field(default_factory=CertificateConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    times: list[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    time_grid: Optional[TimeGrid] = Field(default=None, description="Overrides times if set")
    r_list: list[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5])
    seeds: list[int] = Field(default_factory=lambda: [0])

    degree_set: list[int] = Field(default_factory=lambda: [3, 4])
    catalog_size: int = Field(default=20, ge=1)
    radius: int = Field(default=5, ge=0, description="Ball radius r for catalogs and islands")
    eig_margin: float = Field(default=0.5, ge=0, description="Slack in the island eigenvalue check")

    coupling_radius: int = Field(default=2, ge=0, description="Ball radius m in coupling checks")
    trials: int = Field(default=500, ge=1)
    coupling_fraction: float = Field(
        default=1.0, gt=0, description="Allowed t log t as a fraction of log Phi_n"
    )

    @field_validator("times")
    @classmethod
    def _positive_times(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("time grid is empty")
        if any(t <= 0 for t in v):
            raise ValueError(f"times must be positive (log t is taken), got {v}")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"times must be strictly increasing, got {v}")
        return v

    @field_validator("seeds")
    @classmethod
    def _seeds(cls, v: list[int]) -> list[int]:
        if not v or any(s < 0 for s in v):
            raise ValueError("seeds must be a nonempty list of nonnegative integers")
        return v

    def resolved_times(self) -> list[float]:
        return self.time_grid.values() if self.time_grid is not None else list(self.times)

    def resolved(self) -> dict:
        """JSON-ready dump of every field, defaults included."""
        return self.model_dump(mode="json")

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.model_validate_json(Path(path).read_text())

    def to_json(self) -> str:
        return json.dumps(self.resolved(), sort_keys=True, indent=2)


# Default configuration instances
DEFAULT_LANDSCAPE = LandscapeConfig()
DEFAULT_SOLVER = SolverConfig()
DEFAULT_VARIATIONAL = VariationalOptions()
DEFAULT_OUTPUT = OutputConfig()
