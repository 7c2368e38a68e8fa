"""
Glueing identities for chi and the minimal-tree comparison.

Functions:
    star_glue_formula: chi of a hub joined to k components, from boundary curves
    glue_two_inequality: chi(G1 + G2 + edge) >= min(chi(G1), chi(G2))
    propagation_check: lower bounds propagating through a hub
    tree_catalog: trees with degrees in a given set, with comparison trees
    minimal_tree_check: chi_hat on balls is smallest for the homogeneous d_min tree
    half_tree_sandwich: half-homogeneous versus homogeneous tree
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import xlogy

from .config import (
    DEFAULT_VARIATIONAL,
    VERTEX_BUDGET,
    DegreeLaw,
    GWSpec,
    TreeSpec,
    VariationalOptions,
)
from .errors import GridTooCoarse, InfeasibleBoundary
from .graphs import (
    RootedGraph,
    attach_copies,
    ball,
    glue_star,
    glue_two,
    half_homogeneous_tree,
    homogeneous_tree,
    realize_tree,
    truncate,
)
from .isomorphism import canonical_code
from .random_graphs import sample_gw_tree
from .rng import stream
from .variational import chi_boundary, chi_dual, chi_primal

logger = logging.getLogger(__name__)

TOL = 1e-6


# =============================================================================
# Star glueing
# =============================================================================

@dataclass
class StarGlueResult:
    """Grid evaluation of the star formula with its refinement gap."""

    value: float
    gap: float
    a: np.ndarray
    c: np.ndarray

    def to_json_dict(self) -> dict:
        return {"value": self.value, "gap": self.gap, "a": self.a.tolist(), "c": self.c.tolist()}


def _boundary_curve(g: RootedGraph, y: int, b: np.ndarray, rho: float,
                    opts: VariationalOptions) -> np.ndarray:
    out = np.empty(len(b))
    for i, v in enumerate(b):
        try:
            out[i] = chi_boundary(g, y, float(v), rho, opts)
        except InfeasibleBoundary:
            out[i] = np.inf
    return out


def _star_minimum(
    a_grid: np.ndarray, b_grids: list[np.ndarray], curves: list[np.ndarray], rho: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """
    Minimize over a on the product grid; each b_i is minimized separately for fixed a.

    Returns:
        (value, a*, b*).
    """
    k = len(curves)
    best = (np.inf, np.zeros(k), np.zeros(k))
    for a in itertools.product(*([a_grid] * k)):
        a = np.asarray(a)
        hub = 1.0 - a.sum()
        if hub < -1e-12:
            continue
        hub = max(hub, 0.0)
        total = -rho * float(xlogy(hub, hub)) - rho * float(xlogy(a, a).sum())
        b_star = np.zeros(k)
        for i in range(k):
            with np.errstate(invalid="ignore"):
                terms = a[i] * curves[i] + (np.sqrt(a[i] * b_grids[i]) - math.sqrt(hub)) ** 2
            if a[i] == 0:
                terms = np.full(len(b_grids[i]), hub)
            j = int(np.argmin(terms))
            b_star[i] = b_grids[i][j]
            total += float(terms[j])
        if total < best[0]:
            best = (total, a, b_star)
    return best


def _window(center: float, width: float, n: int) -> np.ndarray:
    lo, hi = max(0.0, center - width), min(1.0, center + width)
    return np.unique(np.concatenate([np.linspace(lo, hi, n), [center]]))


def star_glue_formula(
    components: Sequence[tuple[RootedGraph, int]],
    rho: float,
    opts: VariationalOptions = DEFAULT_VARIATIONAL,
) -> StarGlueResult:
    """
    chi of the star graph (hub joined to y_i in G_i) from the components alone.

    Evaluates

        inf over 0 <= c_i <= a_i, sum a_i <= 1 of
            sum_i a_i (chi^{(y_i, c_i/a_i)}_{G_i} - rho log a_i)
            + sum_i (sqrt c_i - sqrt(1 - sum a))^2
            - rho (1 - sum a) log(1 - sum a)

    where a_i is the mass of G_i and c_i the mass at y_i. The boundary curves
    are tabulated on a grid of ``opts.grid_points`` values and the search is
    refined ``opts.grid_refinements`` times around the current minimizer.

    Raises:
        GridTooCoarse: If the last refinement moved the value by more than
            ``opts.grid_tol``.
    """
    if not components:
        raise ValueError("star formula needs at least one component")
    n = opts.grid_points
    a_grid = np.linspace(0.0, 1.0, n)
    b_grids = [np.linspace(0.0, 1.0, n) for _ in components]
    curves = [_boundary_curve(g, y, b, rho, opts) for (g, y), b in zip(components, b_grids)]
    value, a, b = _star_minimum(a_grid, b_grids, curves, rho)
    gap = math.inf
    width = 2.0 / (n - 1)
    for _ in range(opts.grid_refinements):
        a_grid = np.unique(np.concatenate([_window(x, width, n) for x in a]))
        b_grids = [_window(x, width, n) for x in b]
        curves = [_boundary_curve(g, y, bg, rho, opts) for (g, y), bg in zip(components, b_grids)]
        refined, a, b = _star_minimum(a_grid, b_grids, curves, rho)
        gap = abs(value - refined)
        value = min(value, refined)
        width /= (n - 1) / 4
    logger.debug("star formula: value=%.8g gap=%.3g a=%s", value, gap, a)
    if opts.grid_refinements and gap > opts.grid_tol:
        raise GridTooCoarse(value, gap, opts.grid_tol)
    return StarGlueResult(value, 0.0 if not opts.grid_refinements else gap, a, a * b)


# =============================================================================
# Glue two and propagation
# =============================================================================

@dataclass
class GlueTwoReport:
    """chi of two graphs and of their glueing by one edge."""

    chi_glued: float
    chi_first: float
    chi_second: float

    @property
    def holds(self) -> bool:
        return self.chi_glued >= min(self.chi_first, self.chi_second) - TOL


def glue_two_inequality(
    g1: RootedGraph, x1: int, g2: RootedGraph, x2: int, rho: float,
    opts: VariationalOptions = DEFAULT_VARIATIONAL,
) -> GlueTwoReport:
    """chi(G1 + G2 + {x1, x2}) against min(chi(G1), chi(G2))."""
    glued = glue_two(g1, x1, g2, x2, d_max=max(g1.d_max, g2.d_max) + 1)
    report = GlueTwoReport(
        chi_primal(glued, rho, opts).value,
        chi_primal(g1, rho, opts).value,
        chi_primal(g2, rho, opts).value,
    )
    if not report.holds:
        logger.warning("glue-two inequality fails: %s", report)
    return report


@dataclass
class PropagationReport:
    """Instance of the propagation implication for k + 1 components."""

    k: int
    rho: float
    M: float
    C: float
    chi_leave_one_out: list[float]
    chi_components: list[float]
    chi_star: float

    @property
    def rho_condition(self) -> bool:
        return self.rho >= self.C / math.log(self.k + 1)

    @property
    def hypotheses_hold(self) -> bool:
        return (
            self.rho_condition
            and min(self.chi_leave_one_out) >= self.M - TOL
            and min(self.chi_components) >= self.M - self.C - TOL
        )

    @property
    def conclusion_holds(self) -> bool:
        return self.chi_star >= self.M - TOL

    @property
    def consistent(self) -> bool:
        """The implication is not falsified by this instance."""
        return self.conclusion_holds or not self.hypotheses_hold


def propagation_check(
    components: Sequence[tuple[RootedGraph, int]],
    rho: float,
    M: float,
    C: float,
    opts: VariationalOptions = DEFAULT_VARIATIONAL,
) -> PropagationReport:
    """
    Check: rho >= C / log(k+1), chi of every k-component star >= M and every
    boundary-conditioned chi of the components >= M - C imply chi of the full
    star >= M.

    The infimum of chi^{(y, v)} over v is chi of the component itself, so the
    second hypothesis is evaluated with the unconstrained primal.
    """
    if len(components) < 2:
        raise ValueError("propagation needs at least two components")
    k = len(components) - 1
    bound = max([len(components)] + [g.d_max for g, _ in components]) + 1
    leave_one_out = [
        chi_primal(glue_star([c for i, c in enumerate(components) if i != j], bound),
                   rho, opts).value
        for j in range(len(components))
    ]
    own = [chi_primal(g, rho, opts).value for g, _ in components]
    star = chi_primal(glue_star(list(components), bound), rho, opts).value
    report = PropagationReport(k, rho, M, C, leave_one_out, own, star)
    if not report.consistent:
        logger.warning("propagation implication falsified: %s", report)
    return report


# =============================================================================
# Minimal tree
# =============================================================================

@dataclass(frozen=True, eq=False)
class CatalogEntry:
    """A tree truncated at radius r + 1 and its comparison tree."""

    tree_id: int
    kind: str
    graph: RootedGraph
    comparison: RootedGraph


def comparison_tree(g: RootedGraph, r: int, d_min: int) -> RootedGraph:
    """
    B_r(T) with d_min - 1 half-homogeneous copies (one level deep) attached at
    every distance-r vertex.
    """
    b = ball(g, g.root, r)
    sub = truncate(g, r)
    shell = np.flatnonzero(b.distance == r)
    copy = half_homogeneous_tree(d_min, 0)
    bound = max(g.d_max, d_min)
    return attach_copies(sub, shell, copy, d_min - 1 if r > 0 else d_min, d_max=bound)


def tree_catalog(
    d_min: int,
    degree_set: Sequence[int],
    r: int,
    size: int,
    seed: int = 0,
    budget: int = VERTEX_BUDGET,
) -> list[CatalogEntry]:
    """
    Trees with all degrees in ``degree_set``, each truncated at radius r + 1.

    The homogeneous tree of every degree in the set comes first, then
    root-glued pairs of half-homogeneous trees, then Galton-Watson samples with
    uniform degrees on the set until ``size`` entries exist.
    """
    degrees = sorted(set(int(d) for d in degree_set))
    if degrees[0] != d_min:
        raise ValueError(f"d_min={d_min} must be the smallest degree in {degrees}")
    R = r + 1
    trees: list[tuple[str, RootedGraph]] = [
        (f"homogeneous-{d}", homogeneous_tree(d, R, budget)) for d in degrees
    ]
    for d1, d2 in itertools.combinations(degrees, 2):
        spec = TreeSpec(kind="glued", join="roots", components=[
            TreeSpec(kind="half-homogeneous", d=d1), TreeSpec(kind="half-homogeneous", d=d2)])
        trees.append((f"glued-{d1}-{d2}", realize_tree(spec, R, budget)))
    law = DegreeLaw.uniform(degrees)
    i = 0
    while len(trees) < size:
        spec = GWSpec(initial=law, general=law, radius=R, seed=seed, vertex_budget=budget)
        trees.append((f"gw-{i}", sample_gw_tree(spec, stream(seed, i))))
        i += 1
    trees = trees[:size]
    return [CatalogEntry(j, kind, g, comparison_tree(g, r, d_min))
            for j, (kind, g) in enumerate(trees)]


@dataclass
class MinimalTreeReport:
    """Catalog sweep of chi_hat on B_r against the homogeneous d_min tree."""

    d_min: int
    rho: float
    r: int
    reference: float
    rows: pd.DataFrame
    asserted: bool
    sandwich: Optional["HalfTreeSandwich"] = None
    notes: list[str] = field(default_factory=list)

    @property
    def minimum_at_reference(self) -> bool:
        return bool(self.rows["chi"].min() >= self.reference - 1e-4)

    @property
    def comparison_holds(self) -> bool:
        return bool((self.rows["chi"] >= self.rows["chi_comparison"] - TOL).all())

    @property
    def violations(self) -> int:
        """Rows below the reference (counted only in the asserted regime) or below their comparison."""
        below = (self.rows["gap_to_min"] < -1e-4) if self.asserted else False
        return int((below | (self.rows["chi"] < self.rows["chi_comparison"] - TOL)).sum())


def _ball_chi(g: RootedGraph, r: int, rho: float, opts: VariationalOptions) -> float:
    return chi_dual(g, ball(g, g.root, r).members, rho, opts).value


def minimal_tree_check(
    d_min: int,
    degree_set: Sequence[int],
    rho: float,
    r: int,
    catalog_size: int,
    seed: int = 0,
    opts: VariationalOptions = DEFAULT_VARIATIONAL,
    budget: int = VERTEX_BUDGET,
) -> MinimalTreeReport:
    """
    chi_hat_{B_r}(T) >= chi_hat_{B_r}(T_{d_min}) over a catalog of trees.

    Every tree is also compared with its comparison tree (B_r(T) with d_min - 1
    copies hung below the shell), which can only lower chi_hat. Below
    rho = 1 / log(d_min + 1) the minimizer is unknown: the sweep still runs but
    nothing is asserted.

    Raises:
        BudgetExceeded: If a truncation exceeds ``budget``.
    """
    asserted = rho >= 1.0 / math.log(d_min + 1)
    notes = []
    if not asserted:
        msg = f"rho={rho} < 1/log({d_min + 1}); reporting data only"
        logger.warning(msg)
        notes.append(msg)
    reference = _ball_chi(homogeneous_tree(d_min, r + 1, budget), r, rho, opts)
    records = []
    for entry in tree_catalog(d_min, degree_set, r, catalog_size, seed, budget):
        value = _ball_chi(entry.graph, r, rho, opts)
        cmp_ball = ball(entry.comparison, entry.comparison.root, r).members
        records.append({
            "tree_id": entry.tree_id,
            "kind": entry.kind,
            "canonical_code": canonical_code(truncate(entry.graph, r)),
            "r": r,
            "chi": value,
            "chi_comparison": chi_dual(entry.comparison, cmp_ball, rho, opts).value,
            "gap_to_min": value - reference,
        })
    rows = pd.DataFrame.from_records(records)
    report = MinimalTreeReport(d_min, rho, r, reference, rows, asserted,
                               half_tree_sandwich(d_min, rho, r, opts, budget), notes)
    logger.info("minimal tree check: reference=%.6g min=%.6g violations=%d",
                reference, rows["chi"].min(), report.violations)
    return report


# =============================================================================
# Half-tree sandwich
# =============================================================================

@dataclass
class HalfTreeSandwich:
    """chi_hat on B_r of the half-homogeneous and the homogeneous d-tree."""

    d: int
    rho: float
    r: int
    chi_half: float
    chi_full: float

    @property
    def holds(self) -> bool:
        return (self.chi_half <= self.chi_full + TOL
                and self.chi_full <= self.chi_half + 1.0 + TOL)


def half_tree_sandwich(
    d: int, rho: float, r: int,
    opts: VariationalOptions = DEFAULT_VARIATIONAL,
    budget: int = VERTEX_BUDGET,
) -> HalfTreeSandwich:
    """chi_half <= chi_full <= chi_half + 1 at radius r."""
    half = _ball_chi(half_homogeneous_tree(d, r + 1, budget), r, rho, opts)
    full = _ball_chi(homogeneous_tree(d, r + 1, budget), r, rho, opts)
    out = HalfTreeSandwich(d, rho, r, half, full)
    if not out.holds:
        logger.warning("half-tree sandwich fails: %s", out)
    return out
