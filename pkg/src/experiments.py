"""
Config-driven experiment runner.

Functions:
    theory_curve: leading Lyapunov asymptotics minus chi
    optimal_distance: distance r_t = rho t / loglog t of the optimal island
    run_lyapunov_gw / run_lyapunov_cm: (1/t) log U(t) against theory
    run_chi_catalog: minimal-tree catalog sweep
    run_islands: island statistics and eigenvalue checks
    run_coupling: local coupling of uniform simple graphs with GW trees
    run_certificates: lower-bound certificates against simulated mass
    run_experiment: dispatch on ExperimentConfig.kind
    write_run / verify_run: run directories and their byte-level re-verification
"""

import json
import logging
import math
import os
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, TypeVar

import numpy as np
import pandas as pd

from .certificates import (
    LowerBoundCertificate,
    dual_profile,
    find_lower_bound_certificate,
    plant_profile,
    verify_certificate,
)
from .config import DegreeLaw, ExperimentConfig, GWSpec, TreeSpec
from .errors import BudgetExceeded, CouplingRegimeViolated, NotFound, PreconditionViolated
from .glueing import minimal_tree_check
from .graphs import (
    RootedGraph,
    ball,
    half_homogeneous_tree,
    homogeneous_tree,
    load_graph,
)
from .islands import decompose_islands, island_frame, island_stats
from .outputs_plots import create_lyapunov_plot, create_mass_plot, save_figure
from .outputs_tables import file_sha256, write_csv, write_dat, write_json
from .pam import MassCurve, default_domain, total_mass, total_mass_deterministic, truncation_radius
from .potential import Potential, sample_double_exponential
from .random_graphs import (
    DegreeSequence,
    coupled_gw_spec,
    coupling_check,
    expected_tree_size,
    nu,
    sample_gw_tree,
    sample_uniform_simple_graph,
    volume_growth_rate,
)
from .rng import stream
from .spectral import assemble, eigenvalue_sandwich_check, principal_eigenpair
from .variational import chi_ball_sequence

logger = logging.getLogger(__name__)

CAVEAT = (
    "The o(1) correction in the Lyapunov asymptotics decays like 1/loglog t; "
    "residual gaps at desk-scale t are expected and are not a discrepancy."
)

T = TypeVar("T")


# =============================================================================
# Theory
# =============================================================================

def _loglog(t: "float | np.ndarray") -> "float | np.ndarray":
    return np.log(np.log(np.maximum(t, math.exp(math.e))))


def theory_curve(t: "float | np.ndarray", rho: float, theta: float, chi: float) -> "float | np.ndarray":
    """
    rho log(rho theta t / loglog(t v e^e)) - rho - chi.

    Examples:
        >>> round(float(theory_curve(8.0, 1.0, math.log(2), 0.0)), 4)
        0.7129
    """
    t = np.asarray(t, dtype=np.float64)
    out = rho * np.log(rho * theta * t / _loglog(t)) - rho - chi
    return float(out) if out.ndim == 0 else out


def optimal_distance(t: float, rho: float) -> float:
    """r_t = rho t / loglog(t v e^e)."""
    return rho * t / float(_loglog(t))


# =============================================================================
# Results
# =============================================================================

@dataclass
class ExperimentResult:
    """
    Everything a run directory holds.

    Attributes:
        config: Resolved configuration.
        data: Main table (data.csv).
        report: JSON-ready summary (report.json); embeds the resolved config.
        series: Plot series name -> (x, y), written as <name>.dat.
        property_ok: False when an asserted property was violated.
        warnings: Regime and consistency warnings.
    """

    config: ExperimentConfig
    data: pd.DataFrame
    report: dict
    series: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    property_ok: bool = True
    warnings: list[str] = field(default_factory=list)
    curves: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class LyapunovReport:
    """Seed-averaged (1/t) log U(t) against the theory curve."""

    times: np.ndarray
    per_seed: np.ndarray
    seeds: list[int]
    rho: float
    theta: float
    chi_est: float
    chi_uncertainty: float
    chi_provenance: str
    warnings: list[str] = field(default_factory=list)
    caveat: str = CAVEAT

    @property
    def mean(self) -> np.ndarray:
        return self.per_seed.mean(axis=0)

    @property
    def dispersion(self) -> np.ndarray:
        return self.per_seed.std(axis=0)

    @property
    def leading(self) -> np.ndarray:
        """First two theory terms rho log(rho theta t / loglog t) - rho."""
        return np.asarray(theory_curve(self.times, self.rho, self.theta, 0.0))

    @property
    def theory(self) -> np.ndarray:
        return np.asarray(theory_curve(self.times, self.rho, self.theta, self.chi_est))

    @property
    def residual(self) -> np.ndarray:
        """Simulated minus leading terms; compare with -chi_est."""
        return self.mean - self.leading

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "logU_over_t": self.mean,
            "dispersion": self.dispersion,
            "leading": self.leading,
            "theory": self.theory,
            "residual": self.residual,
            "minus_chi": np.full(len(self.times), -self.chi_est),
        })

    def to_json_dict(self) -> dict:
        return {
            "times": self.times,
            "seeds": self.seeds,
            "per_seed": self.per_seed,
            "rho": self.rho,
            "theta": self.theta,
            "chi_est": self.chi_est,
            "chi_uncertainty": self.chi_uncertainty,
            "chi_provenance": self.chi_provenance,
            "residual": self.residual,
            "dispersion": self.dispersion,
            "warnings": self.warnings,
            "caveat": self.caveat,
        }


# =============================================================================
# Shared plumbing
# =============================================================================

def _threads(n_tasks: int) -> int:
    cap = int(os.environ.get("PAM_THREADS", os.cpu_count() or 1))
    return max(1, min(cap, n_tasks))


def _map_seeds(fn: Callable[[int], T], seeds: Sequence[int]) -> list[T]:
    """Apply fn to every seed on a thread pool; results come back in seed order."""
    if _threads(len(seeds)) == 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=_threads(len(seeds))) as pool:
        return list(pool.map(fn, seeds))


def _degree_sequence(cfg: ExperimentConfig) -> DegreeSequence:
    spec = cfg.graph
    if spec.degrees_path is not None:
        return DegreeSequence.load(spec.degrees_path)
    assert spec.degree is not None
    return DegreeSequence.from_law(spec.degree, spec.n)


def _degree_law(cfg: ExperimentConfig) -> DegreeLaw:
    """Law whose minimum fixes d_min (D_g, the CM limit law, or a point mass)."""
    spec = cfg.graph
    if spec.kind == "gw":
        assert spec.general is not None
        return spec.general
    if spec.kind == "cm":
        return spec.degree or _degree_sequence(cfg).empirical_law()
    if spec.kind in ("homogeneous", "half-homogeneous"):
        assert spec.d is not None
        return DegreeLaw.delta(spec.d)
    g = load_graph(spec.path, spec.require_connected)  # type: ignore[arg-type]
    inner = g.degrees[default_domain(g)]
    return DegreeLaw.uniform(sorted(set(int(d) for d in inner)))


def _theta(cfg: ExperimentConfig) -> float:
    law = _degree_law(cfg)
    return math.log(nu(law)) if cfg.graph.kind == "cm" else volume_growth_rate(law)


def _sample_graph(cfg: ExperimentConfig, seed: int, radius: int) -> RootedGraph:
    """Graph for one seed; trees are truncated at ``radius``."""
    spec = cfg.graph
    budget = cfg.solver.vertex_budget * 4
    if spec.kind == "gw":
        assert spec.general is not None
        gw = GWSpec(initial=spec.root_law(), general=spec.general, radius=radius, seed=seed,
                    vertex_budget=budget)
        return sample_gw_tree(gw, stream(seed, 0))
    if spec.kind == "homogeneous":
        return homogeneous_tree(spec.d, radius, budget)  # type: ignore[arg-type]
    if spec.kind == "half-homogeneous":
        return half_homogeneous_tree(spec.d, radius, budget)  # type: ignore[arg-type]
    if spec.kind == "cm":
        g, _ = sample_uniform_simple_graph(_degree_sequence(cfg), stream(seed, 0),
                                           spec.max_attempts, spec.require_connected)
        return g
    return load_graph(spec.path, spec.require_connected)  # type: ignore[arg-type]


def _expected_ball(cfg: ExperimentConfig, radius: int) -> Optional[float]:
    """Expected |B_radius(root)| for tree families, None for graphs."""
    spec = cfg.graph
    if spec.kind == "gw":
        return expected_tree_size(spec.root_law(), _degree_law(cfg), radius)
    if spec.kind in ("homogeneous", "half-homogeneous"):
        d = _degree_law(cfg)
        root = d if spec.kind == "homogeneous" else DegreeLaw.delta(d.min_degree - 1)
        return expected_tree_size(root, d, radius)
    return None


def _sample_potential(g: RootedGraph, rho: float, seed: int) -> Potential:
    return sample_double_exponential(g, rho, seed=seed, rng=stream(seed, 1))


def _chi_estimate(cfg: ExperimentConfig) -> tuple[float, float, str]:
    d_min = _degree_law(cfg).min_degree
    seq = chi_ball_sequence(TreeSpec(kind="homogeneous", d=d_min), cfg.rho, cfg.r_list,
                            cfg.variational)
    provenance = (f"chi_hat on balls of T_{d_min}, r={seq.radii}, values="
                  f"{[round(v, 8) for v in seq.values]}, Aitken-extrapolated")
    return seq.extrapolated, seq.uncertainty, provenance


def _base_report(cfg: ExperimentConfig) -> dict:
    return {"kind": cfg.kind, "name": cfg.name, "config": cfg.resolved(), "seeds": cfg.seeds}


# =============================================================================
# Lyapunov exponents
# =============================================================================

def _lyapunov_result(cfg: ExperimentConfig, curves: list[MassCurve], theta: float,
                     notes: list[str]) -> ExperimentResult:
    chi, err, provenance = _chi_estimate(cfg)
    times = np.asarray(cfg.resolved_times())
    per_seed = np.vstack([c.logU_over_t for c in curves])
    rep = LyapunovReport(times, per_seed, list(cfg.seeds), cfg.rho, theta, chi, err, provenance,
                         notes)
    ok = bool(np.all(np.isfinite(per_seed)))
    report = _base_report(cfg) | {"lyapunov": rep.to_json_dict(), "property_ok": ok}
    report["boundary_mass"] = [c.boundary_mass for c in curves]
    series = {
        "residual": (times, rep.residual),
        "logU_over_t": (times, rep.mean),
        "theory": (times, rep.theory),
    }
    mass = {f"seed {s}": c.logU_over_t for s, c in zip(cfg.seeds, curves)}
    logger.info("lyapunov: chi_est=%.6g residual=%s", chi, np.round(rep.residual, 4))
    return ExperimentResult(cfg, rep.to_frame(), report, series, ok, notes, mass)


def run_lyapunov_gw(cfg: ExperimentConfig) -> ExperimentResult:
    """
    (1/t) log U(t) on Galton-Watson trees (or deterministic trees) per seed.

    Every tree is sampled one level beyond the truncation radius l_t of the
    largest time so the Dirichlet ball keeps full degrees.

    Raises:
        BudgetExceeded: If a tree or domain exceeds its budget.
    """
    times = cfg.resolved_times()
    radius = truncation_radius(times[-1], cfg.solver.truncation_c, cfg.solver.r_hint)
    theta = _theta(cfg)
    expected = _expected_ball(cfg, radius)
    if expected is not None and expected > cfg.solver.vertex_budget:
        raise BudgetExceeded(
            f"t={times[-1]:g} needs the ball of radius {radius} with about "
            f"{expected:.3g} expected vertices, over vertex_budget="
            f"{cfg.solver.vertex_budget}; lower the largest time or solver.truncation_c")

    def one(seed: int) -> MassCurve:
        g = _sample_graph(cfg, seed, radius + 1)
        xi = _sample_potential(g, cfg.rho, seed)
        solver = cfg.solver.model_copy(update={"seed": seed})
        return total_mass(g, xi, times, solver)

    return _lyapunov_result(cfg, _map_seeds(one, cfg.seeds), theta, [])


def run_lyapunov_cm(cfg: ExperimentConfig) -> ExperimentResult:
    """
    (1/t) log U(t) on uniform simple graphs with a prescribed degree sequence.

    Warns with CouplingRegimeViolated when t log t exceeds
    ``coupling_fraction * log Phi_n`` for the largest t.
    """
    times = cfg.resolved_times()
    ds = _degree_sequence(cfg)
    law = _degree_law(cfg)
    theta = math.log(nu(law))
    notes = []
    log_phi = math.log(ds.phi_n(law))
    t_max = times[-1]
    if t_max * math.log(max(t_max, math.e)) > cfg.coupling_fraction * log_phi:
        msg = (f"t log t = {t_max * math.log(max(t_max, math.e)):.3g} exceeds "
               f"{cfg.coupling_fraction} log Phi_n = {cfg.coupling_fraction * log_phi:.3g}")
        warnings.warn(msg, CouplingRegimeViolated, stacklevel=2)
        notes.append(msg)
    notes += ds.assumption_issues(law)

    def one(seed: int) -> MassCurve:
        g = _sample_graph(cfg, seed, 0)
        xi = _sample_potential(g, cfg.rho, seed)
        solver = cfg.solver.model_copy(update={"seed": seed})
        return total_mass(g, xi, times, solver)

    return _lyapunov_result(cfg, _map_seeds(one, cfg.seeds), theta, notes)


# =============================================================================
# Catalogs, islands, coupling
# =============================================================================

def run_chi_catalog(cfg: ExperimentConfig) -> ExperimentResult:
    """Minimal-tree catalog on balls of radius ``cfg.radius``."""
    degrees = sorted(set(cfg.degree_set))
    check = minimal_tree_check(degrees[0], degrees, cfg.rho, cfg.radius, cfg.catalog_size,
                               cfg.seeds[0], cfg.variational)
    sandwich = check.sandwich
    ok = check.violations == 0 and (sandwich is None or sandwich.holds or not check.asserted)
    report = _base_report(cfg) | {
        "reference": check.reference,
        "asserted": check.asserted,
        "minimum_at_reference": check.minimum_at_reference,
        "comparison_holds": check.comparison_holds,
        "violations": check.violations,
        "half_tree": None if sandwich is None else {
            "chi_half": sandwich.chi_half, "chi_full": sandwich.chi_full,
            "holds": sandwich.holds},
        "notes": check.notes,
        "property_ok": ok,
    }
    series = {"chi": (check.rows["tree_id"].to_numpy(float), check.rows["chi"].to_numpy())}
    return ExperimentResult(cfg, check.rows, report, series, ok, list(check.notes))


def _island_rows(cfg: ExperimentConfig, seed: int, chi_est: float) -> list[dict]:
    r = cfg.radius
    reach = r + int(math.floor(math.log(max(r, 2)) ** cfg.landscape.alpha)) + 1
    g = _sample_graph(cfg, seed, reach)
    xi = _sample_potential(g, cfg.rho, seed)
    d = decompose_islands(xi, ball(g, g.root, r), cfg.landscape)
    frame = island_frame(island_stats(d))
    rows = []
    for isl, rec in zip(d.components, frame.to_dict("records")):
        h = assemble(g, isl.vertices, xi)
        lam = principal_eigenpair(h).value
        rec.update({
            "seed": seed,
            "eigenvalue": lam,
            "a_L": d.a_L,
            "gap": d.a_L - lam,
            "eig_violation": bool(lam > d.a_L - chi_est + cfg.eig_margin),
            "sandwich": eigenvalue_sandwich_check(h, [isl.peak]),
        })
        rows.append(rec)
    return rows


def run_islands(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Island table over seeds with lambda_C <= a_{L_r} - chi_est + margin flagged.

    The eigenvalue inequality is reported as a violation rate, not asserted;
    the eigenvalue sandwich on every island is asserted.
    """
    chi, err, provenance = _chi_estimate(cfg)
    rows = [row for rs in _map_seeds(lambda s: _island_rows(cfg, s, chi), cfg.seeds) for row in rs]
    columns = ["seed", "island", "peak", "peak_value", "size", "n_high", "diameter",
               "bound_high", "bound_diameter", "bound_size", "violations", "eigenvalue", "a_L",
               "gap", "eig_violation", "sandwich"]
    data = pd.DataFrame.from_records(rows, columns=columns)
    rate = float(data["eig_violation"].mean()) if len(data) else 0.0
    ok = bool(data["sandwich"].all()) if len(data) else True
    report = _base_report(cfg) | {
        "islands": len(data),
        "eig_violation_rate": rate,
        "chi_est": chi,
        "chi_uncertainty": err,
        "chi_provenance": provenance,
        "property_ok": ok,
    }
    return ExperimentResult(cfg, data, report, {}, ok)


def run_coupling(cfg: ExperimentConfig) -> ExperimentResult:
    """Ball-isomorphism frequencies between uniform simple graphs and the coupled GW tree."""
    ds = _degree_sequence(cfg)
    law = cfg.graph.degree or ds.empirical_law()
    gw = coupled_gw_spec(law, cfg.coupling_radius, cfg.seeds[0])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CouplingRegimeViolated)
        rep = coupling_check(ds, gw, cfg.coupling_radius, cfg.trials, cfg.seeds[0],
                             cfg.graph.max_attempts, limit_law=law)
    for w in caught:
        warnings.warn(w.message, w.category, stacklevel=2)
    data = pd.DataFrame([rep.to_json_dict()]).drop(columns=["warnings"])
    report = _base_report(cfg) | {"coupling": rep.to_json_dict(), "property_ok": True}
    return ExperimentResult(cfg, data, report, {}, True, list(rep.warnings))


# =============================================================================
# Certificates
# =============================================================================

def _certificate_row(cfg: ExperimentConfig, seed: int) -> tuple[dict, Optional[LowerBoundCertificate]]:
    cc = cfg.certificate
    ell = cc.ell or max(math.ceil(optimal_distance(cc.t, cfg.rho)), cc.R + 1)
    g = _sample_graph(cfg, seed, ell + 1)
    xi = _sample_potential(g, cfg.rho, seed)
    d_min = _degree_law(cfg).min_degree
    profile = dual_profile(TreeSpec(kind="homogeneous", d=d_min), cc.R, cfg.rho, cfg.variational)
    if cc.planted:
        b = ball(g, g.root, ell)
        for z in b.members[b.distance == ell - cc.R - 1]:
            try:
                xi = plant_profile(g, xi, int(z), profile, ell, cc.margin)
                break
            except PreconditionViolated:
                continue
    domain = ball(g, g.root, ell).members
    curve = total_mass_deterministic(g, xi, [cc.t], cfg.solver, domain=domain)
    simulated = float(curve.logU_over_t[0])
    row: dict[str, Any] = {"seed": seed, "ell": ell, "simulated": simulated}
    try:
        cert = find_lower_bound_certificate(g, xi, profile, cc.t, ell, cc.epsilon, simulated)
    except NotFound as exc:
        row.update({"found": False, "coverage": exc.coverage, "z": -1, "distance": -1,
                    "z_over_ell": np.nan, "exponent": np.nan, "consistent": True,
                    "verified": True})
        return row, None
    failures = verify_certificate(cert)
    row.update({"found": True, "coverage": cert.coverage, "z": cert.z,
                "distance": cert.distance, "z_over_ell": cert.z_over_ell,
                "exponent": cert.exponent, "consistent": bool(cert.consistent),
                "verified": not failures})
    return row, cert


def run_certificates(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Search B_ell(root) for a lower-bound certificate per seed and compare the
    certified exponent with (1/t) log U(t) solved on the same ball.
    """
    results = _map_seeds(lambda s: _certificate_row(cfg, s), cfg.seeds)
    columns = ["seed", "ell", "found", "coverage", "z", "distance", "z_over_ell", "exponent",
               "simulated", "consistent", "verified"]
    data = pd.DataFrame.from_records([r for r, _ in results], columns=columns)
    ok = bool(data["consistent"].all() and data["verified"].all())
    report = _base_report(cfg) | {
        "found": int(data["found"].sum()),
        "certificates": [c.to_json_dict() for _, c in results if c is not None],
        "property_ok": ok,
    }
    return ExperimentResult(cfg, data, report, {}, ok)


# =============================================================================
# Dispatch and run directories
# =============================================================================

RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "lyapunov-gw": run_lyapunov_gw,
    "lyapunov-cm": run_lyapunov_cm,
    "chi-catalog": run_chi_catalog,
    "islands": run_islands,
    "coupling": run_coupling,
    "lower-bound-certificate": run_certificates,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run the experiment named by ``cfg.kind``."""
    logger.info("running %s experiment %r (seeds %s)", cfg.kind, cfg.name, cfg.seeds)
    result = RUNNERS[cfg.kind](cfg)
    result.report["warnings"] = list(result.warnings)
    return result


def write_run(result: ExperimentResult, out_dir: str | Path, plots: Optional[bool] = None) -> Path:
    """
    Write data.csv, report.json, config.resolved.json and one .dat per series.

    Args:
        result: Experiment result.
        out_dir: Parent directory; files go to ``out_dir / config.name``.
        plots: Also write PNG figures (default: ``config.output.plots``).

    Returns:
        The run directory.
    """
    cfg = result.config
    run_dir = Path(out_dir) / cfg.name
    run_dir.mkdir(parents=True, exist_ok=True)
    write_csv(result.data, run_dir / "data.csv")
    write_json(result.report, run_dir / "report.json")
    (run_dir / "config.resolved.json").write_text(cfg.to_json() + "\n")
    for name, (x, y) in result.series.items():
        write_dat(x, y, run_dir / f"{name}.dat", header=f"{name}: x y")

    if plots if plots is not None else cfg.output.plots:
        size, dpi = cfg.output.figure_size, cfg.output.dpi
        if "residual" in result.series:
            lyap = result.report["lyapunov"]
            fig, _ = create_lyapunov_plot(result.series["residual"][0],
                                          result.series["residual"][1],
                                          lyap["dispersion"], lyap["chi_est"],
                                          lyap["chi_uncertainty"], figsize=size, dpi=dpi)
            save_figure(fig, run_dir / "lyapunov.png", dpi)
        if result.curves:
            fig, _ = create_mass_plot(cfg.resolved_times(), result.curves, figsize=size, dpi=dpi)
            save_figure(fig, run_dir / "mass.png", dpi)
    logger.info("run written to %s", run_dir)
    return run_dir


@dataclass
class VerifyResult:
    """Outcome of re-running a stored report."""

    run_dir: Path
    mismatches: list[str]
    certificate_failures: list[str]
    property_ok: bool

    @property
    def reproduced(self) -> bool:
        return not self.mismatches and not self.certificate_failures


def verify_run(report_path: str | Path) -> VerifyResult:
    """
    Re-run the configuration embedded in a report and compare bytes.

    data.csv and report.json of a fresh run must have the same SHA-256 as the
    stored files; stored certificates are re-verified from their numbers.
    """
    report_path = Path(report_path)
    run_dir = report_path.parent

    stored = json.loads(report_path.read_text())
    cfg = ExperimentConfig.model_validate(stored["config"])
    failures = []
    for i, data in enumerate(stored.get("certificates", [])):
        cert = LowerBoundCertificate.from_json_dict(data)
        failures += [f"certificate {i}: {f}" for f in verify_certificate(cert)]

    with tempfile.TemporaryDirectory() as tmp:
        fresh = write_run(run_experiment(cfg), tmp, plots=False)
        mismatches = [
            name for name in ("data.csv", "report.json")
            if not (run_dir / name).exists()
            or file_sha256(run_dir / name) != file_sha256(fresh / name)
        ]
    if mismatches:
        logger.warning("run %s does not reproduce: %s", run_dir, mismatches)
    return VerifyResult(run_dir, mismatches, failures, bool(stored.get("property_ok", True)))
