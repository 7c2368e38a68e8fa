"""
Tests for the config-driven experiment runner and run directories.

Test Coverage:
    - experiments: theory_curve, optimal_distance, run_lyapunov_gw, run_lyapunov_cm,
      run_chi_catalog, run_islands, run_coupling, run_certificates,
      run_experiment, write_run, verify_run
    - config: ExperimentConfig validation and resolution

Run with: pytest tests/test_experiments.py -v
"""

import json
import math
import warnings
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from src.config import (
    CertificateConfig,
    DegreeLaw,
    ExperimentConfig,
    GraphSpec,
    LandscapeConfig,
    TimeGrid,
)
from src.errors import BudgetExceeded, CouplingRegimeViolated
from src.experiments import (
    optimal_distance,
    run_experiment,
    theory_curve,
    verify_run,
    write_run,
)
from src.outputs_tables import read_dat


# =============================================================================
# Test Fixtures
# =============================================================================

@pytest.fixture
def gw_config():
    """Two seeds of GW trees with D_g uniform on {3, 4}, short times."""
    return ExperimentConfig(
        kind="lyapunov-gw",
        name="gw",
        graph=GraphSpec(kind="gw", general=DegreeLaw.uniform([3, 4])),
        times=[1.0, 2.0],
        seeds=[0, 1],
        r_list=[1, 2],
    )


@pytest.fixture
def catalog_config():
    """Small minimal-tree catalog."""
    return ExperimentConfig(kind="chi-catalog", name="catalog", radius=1, catalog_size=3)


@pytest.fixture
def certificate_config():
    """Planted certificate on T_3 at t = 4."""
    return ExperimentConfig(
        kind="lower-bound-certificate",
        name="cert",
        certificate=CertificateConfig(t=4.0, R=1, ell=4, planted=True),
        seeds=[3],
    )


# =============================================================================
# Theory Tests
# =============================================================================

class TestTheory:
    """Tests for the theory curve and the optimal distance."""

    def test_theory_value(self):
        """rho log(rho theta t) - rho below e^e."""
        expected = math.log(8 * math.log(2)) - 1.0
        assert theory_curve(8.0, 1.0, math.log(2), 0.0) == pytest.approx(expected)

    def test_theory_subtracts_chi(self):
        """chi shifts the curve down."""
        t = np.array([20.0, 40.0])
        gap = theory_curve(t, 1.0, 0.7, 0.0) - theory_curve(t, 1.0, 0.7, 0.25)
        assert gap == pytest.approx([0.25, 0.25])

    def test_optimal_distance(self):
        """r_t = rho t below e^e, rho t / loglog t above."""
        assert optimal_distance(8.0, 1.0) == pytest.approx(8.0)
        assert optimal_distance(100.0, 2.0) == pytest.approx(200.0 / math.log(math.log(100.0)))


# =============================================================================
# Config Tests
# =============================================================================

class TestExperimentConfig:
    """Tests for experiment configuration."""

    def test_default_graph(self):
        """The default graph is T_3."""
        cfg = ExperimentConfig(kind="islands")
        assert cfg.graph.kind == "homogeneous"
        assert cfg.graph.d == 3

    def test_times_positive(self):
        """log t requires t > 0."""
        with pytest.raises(ValidationError):
            ExperimentConfig(kind="lyapunov-gw", times=[0.0, 1.0])

    def test_times_increasing(self):
        """Times are strictly increasing."""
        with pytest.raises(ValidationError):
            ExperimentConfig(kind="lyapunov-gw", times=[2.0, 1.0])

    def test_gw_needs_law(self):
        """GW graphs need D_g."""
        with pytest.raises(ValidationError):
            GraphSpec(kind="gw")

    def test_time_grid_overrides(self):
        """A geometric grid replaces the explicit times."""
        cfg = ExperimentConfig(kind="lyapunov-gw", time_grid=TimeGrid(t_min=1.0, ratio=2.0, count=3))
        assert cfg.resolved_times() == [1.0, 2.0, 4.0]

    def test_resolved_round_trip(self, gw_config, tmp_path):
        """The resolved config reloads to the same model."""
        path = tmp_path / "cfg.json"
        path.write_text(gw_config.to_json())
        assert ExperimentConfig.from_file(path) == gw_config


# =============================================================================
# Runner Tests
# =============================================================================

class TestLyapunov:
    """Tests for Lyapunov-exponent runs."""

    def test_gw_run(self, gw_config):
        """Per-seed curves are finite and the report carries chi provenance."""
        result = run_experiment(gw_config)
        assert result.property_ok
        assert list(result.data["t"]) == [1.0, 2.0]
        lyap = result.report["lyapunov"]
        assert lyap["theta"] == pytest.approx(math.log(2.5))
        assert lyap["chi_est"] > 0
        assert "T_3" in lyap["chi_provenance"]
        assert np.asarray(lyap["per_seed"]).shape == (2, 2)
        assert set(result.curves) == {"seed 0", "seed 1"}

    def test_homogeneous_theta(self):
        """Deterministic T_3 uses theta = log 2."""
        cfg = ExperimentConfig(kind="lyapunov-gw", times=[1.0], r_list=[1])
        result = run_experiment(cfg)
        assert result.report["lyapunov"]["theta"] == pytest.approx(math.log(2))

    def test_threads_do_not_change_results(self, gw_config, monkeypatch):
        """Seed order and values are independent of the pool size."""
        monkeypatch.setenv("PAM_THREADS", "1")
        serial = run_experiment(gw_config).data
        monkeypatch.setenv("PAM_THREADS", "4")
        pooled = run_experiment(gw_config).data
        assert serial.equals(pooled)

    def test_cm_run(self):
        """Uniform simple 3-regular graphs use theta = log nu = log 2."""
        cfg = ExperimentConfig(
            kind="lyapunov-cm",
            graph=GraphSpec(kind="cm", degree=DegreeLaw.delta(3), n=200),
            times=[1.0, 2.0],
            r_list=[1],
        )
        result = run_experiment(cfg)
        assert result.property_ok
        assert result.report["lyapunov"]["theta"] == pytest.approx(math.log(2))
        assert result.warnings == []

    def test_cm_regime_warning(self):
        """t log t beyond log Phi_n is flagged."""
        cfg = ExperimentConfig(
            kind="lyapunov-cm",
            graph=GraphSpec(kind="cm", degree=DegreeLaw.delta(3), n=20),
            times=[1.0, 4.0],
            r_list=[1],
        )
        with pytest.warns(CouplingRegimeViolated):
            result = run_experiment(cfg)
        assert any("log Phi_n" in w for w in result.warnings)

    def test_gw_budget_checked_before_sampling(self):
        """Times whose ball cannot fit the vertex budget fail before any tree is drawn."""
        cfg = ExperimentConfig(
            kind="lyapunov-gw",
            graph=GraphSpec(kind="gw", general=DegreeLaw.uniform([3, 4])),
            times=[1.0, 8.0],
            r_list=[1],
        )
        with pytest.raises(BudgetExceeded, match="radius 17"):
            run_experiment(cfg)


class TestOtherRunners:
    """Tests for catalog, island, coupling and certificate runs."""

    def test_chi_catalog(self, catalog_config):
        """T_3 is the minimum of a small catalog."""
        result = run_experiment(catalog_config)
        assert result.property_ok
        assert len(result.data) == 3
        assert result.report["violations"] == 0
        assert result.report["half_tree"]["holds"]

    def test_chi_catalog_comparison(self):
        """GW entries at radius 2 sit above their comparison trees and above T_3."""
        cfg = ExperimentConfig(kind="chi-catalog", name="catalog", degree_set=[3, 4],
                               radius=2, catalog_size=6, seeds=[1])
        result = run_experiment(cfg)
        rows = result.data
        assert rows["kind"].str.startswith("gw").sum() == 3
        assert (rows["chi"] >= rows["chi_comparison"] - 1e-6).all()
        assert result.report["violations"] == 0
        assert result.property_ok

    def test_islands(self):
        """Island eigenvalue sandwiches hold on every island."""
        cfg = ExperimentConfig(kind="islands", radius=5, seeds=[0, 1],
                               landscape=LandscapeConfig(A=0.5), r_list=[1, 2])
        result = run_experiment(cfg)
        assert result.property_ok
        assert 0.0 <= result.report["eig_violation_rate"] <= 1.0
        assert set(result.data["seed"]) <= {0, 1}
        assert "eigenvalue" in result.data.columns

    def test_coupling(self):
        """Coupling frequencies land in the report."""
        cfg = ExperimentConfig(
            kind="coupling",
            graph=GraphSpec(kind="cm", degree=DegreeLaw.delta(3), n=100),
            coupling_radius=1,
            trials=10,
        )
        result = run_experiment(cfg)
        assert result.property_ok
        assert len(result.data) == 1
        assert 0.0 <= result.report["coupling"]["iso_frequency"] <= 1.0

    def test_certificates(self, certificate_config):
        """A planted profile is found, verifies, and stays below the simulated exponent."""
        result = run_experiment(certificate_config)
        assert result.property_ok
        row = result.data.iloc[0]
        assert row["found"]
        assert row["verified"]
        assert row["exponent"] <= row["simulated"] + 1e-6
        assert len(result.report["certificates"]) == 1


# =============================================================================
# Run Directory Tests
# =============================================================================

class TestRunDirectory:
    """Tests for writing and re-verifying run directories."""

    def test_write_run_files(self, gw_config, tmp_path):
        """Every run directory has the table, the report and the resolved config."""
        run_dir = write_run(run_experiment(gw_config), tmp_path, plots=True)
        assert run_dir == tmp_path / "gw"
        for name in ("data.csv", "report.json", "config.resolved.json", "residual.dat",
                     "lyapunov.png", "mass.png"):
            assert (run_dir / name).exists(), name
        x, _ = read_dat(run_dir / "residual.dat")
        assert x.tolist() == [1.0, 2.0]
        report = json.loads((run_dir / "report.json").read_text())
        assert report["config"]["kind"] == "lyapunov-gw"

    def test_verify_reproduces(self, catalog_config, tmp_path):
        """A fresh run gives the same bytes."""
        run_dir = write_run(run_experiment(catalog_config), tmp_path)
        res = verify_run(run_dir / "report.json")
        assert res.reproduced
        assert res.property_ok

    def test_verify_detects_edits(self, catalog_config, tmp_path):
        """Edited tables no longer reproduce."""
        run_dir = write_run(run_experiment(catalog_config), tmp_path)
        with open(run_dir / "data.csv", "a") as f:
            f.write("edited\n")
        res = verify_run(run_dir / "report.json")
        assert not res.reproduced
        assert res.mismatches == ["data.csv"]

    def test_verify_certificates(self, certificate_config, tmp_path):
        """Stored certificates re-verify from their numbers."""
        run_dir = write_run(run_experiment(certificate_config), tmp_path)
        res = verify_run(run_dir / "report.json")
        assert res.certificate_failures == []
        assert res.reproduced


# =============================================================================
# Shipped Config Tests
# =============================================================================

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


class TestShippedConfigs:
    """Every example config runs as shipped and its asserted properties hold."""

    def test_all_kinds_shipped(self):
        """One example per experiment kind."""
        kinds = {ExperimentConfig.from_file(p).kind for p in CONFIG_DIR.glob("*.json")}
        assert kinds == {"lyapunov-gw", "lyapunov-cm", "chi-catalog", "islands", "coupling",
                         "lower-bound-certificate"}

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.stem)
    def test_config_runs(self, path, tmp_path):
        """Run, write and check the property flag."""
        cfg = ExperimentConfig.from_file(path)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CouplingRegimeViolated)
            result = run_experiment(cfg)
        assert result.property_ok, result.report
        assert len(result.data) > 0
        run_dir = write_run(result, tmp_path)
        assert (run_dir / "report.json").exists()
