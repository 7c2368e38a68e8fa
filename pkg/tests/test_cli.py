"""
Tests for the pam command line.

Test Coverage:
    - cli.main: version, chi, gen gw, gen cm, run, verify and their exit codes

Run with: pytest tests/test_cli.py -v
"""

import json

import pytest
from typer.testing import CliRunner

from cli.main import EXIT_ERROR, EXIT_PROPERTY, app
from src.graphs import build_graph, load_graph, save_graph


runner = CliRunner()


# =============================================================================
# Test Fixtures
# =============================================================================

@pytest.fixture
def path_file(tmp_path):
    """Path on four vertices saved as graph JSON."""
    path = tmp_path / "path4.json"
    save_graph(build_graph([(0, 1), (1, 2), (2, 3)]), path)
    return path


@pytest.fixture
def catalog_file(tmp_path):
    """Small chi-catalog experiment config."""
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps({"kind": "chi-catalog", "name": "catalog",
                                "radius": 1, "catalog_size": 3}))
    return path


# =============================================================================
# Command Tests
# =============================================================================

class TestCommands:
    """Tests for single commands."""

    def test_version(self):
        """Version banner."""
        result = runner.invoke(app, ["version"])
        assert result.exit_code == 0
        assert "PAM graph lab v" in result.output

    def test_chi(self, path_file):
        """Primal and dual agree on a path."""
        result = runner.invoke(app, ["chi", str(path_file), "--rho", "1.0", "--tol", "1e-5"])
        assert result.exit_code == 0
        assert "primal" in result.output
        assert "dual" in result.output

    def test_chi_missing_file(self, tmp_path):
        """Unreadable graphs exit with 1."""
        result = runner.invoke(app, ["chi", str(tmp_path / "missing.json")])
        assert result.exit_code == EXIT_ERROR

    def test_gen_gw(self, tmp_path):
        """A D_g = 3 tree of radius 3 has 22 vertices."""
        out = tmp_path / "tree.json"
        result = runner.invoke(app, ["gen", "gw", "--degrees", "3", "--radius", "3",
                                     "--seed", "1", "--out", str(out)])
        assert result.exit_code == 0
        assert load_graph(out).n == 22

    def test_gen_gw_invalid_law(self, tmp_path):
        """D_g with leaves is rejected."""
        result = runner.invoke(app, ["gen", "gw", "--degrees", "1", "--out",
                                     str(tmp_path / "t.json")])
        assert result.exit_code == EXIT_ERROR

    def test_gen_cm(self, tmp_path):
        """Uniform simple 3-regular graph with its sample report."""
        out = tmp_path / "graph.json"
        result = runner.invoke(app, ["gen", "cm", "--d", "3", "--n", "20", "--seed", "0",
                                     "--out", str(out)])
        assert result.exit_code == 0
        assert load_graph(out, require_connected=False).n == 20
        report = json.loads((tmp_path / "graph.report.json").read_text())
        assert report["simple"]

    def test_gen_cm_needs_degrees(self, tmp_path):
        """Either --d or --degrees-file."""
        result = runner.invoke(app, ["gen", "cm", "--out", str(tmp_path / "g.json")])
        assert result.exit_code == EXIT_ERROR


# =============================================================================
# Run and Verify Tests
# =============================================================================

class TestRunVerify:
    """Tests for run directories through the CLI."""

    def test_run_and_verify(self, catalog_file, tmp_path):
        """A run verifies; an edited run fails with the property exit code."""
        out = tmp_path / "out"
        result = runner.invoke(app, ["run", str(catalog_file), "--out", str(out)])
        assert result.exit_code == 0
        report = out / "catalog" / "report.json"
        assert report.exists()

        assert runner.invoke(app, ["verify", str(report)]).exit_code == 0

        with open(out / "catalog" / "data.csv", "a") as f:
            f.write("edited\n")
        assert runner.invoke(app, ["verify", str(report)]).exit_code == EXIT_PROPERTY

    def test_run_bad_config(self, tmp_path):
        """Invalid configs exit with 1."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"kind": "lyapunov-gw", "times": [0.0]}))
        result = runner.invoke(app, ["run", str(path)])
        assert result.exit_code == EXIT_ERROR
