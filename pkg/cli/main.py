"""
PAM graph lab CLI

Usage:
    pam run configs/lyapunov_gw.json --out outputs/
    pam chi ball.json --rho 1.0
    pam verify outputs/run/report.json
    pam gen gw --degrees 3 --radius 6 --seed 1 --out tree.json
    pam gen cm --d 3 --n 1000 --seed 1 --out graph.json
"""

import logging
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

app = typer.Typer(
    name="pam",
    help="Parabolic Anderson model on random trees and configuration-model graphs",
)
gen_app = typer.Typer(help="Sample random graphs to JSON")
app.add_typer(gen_app, name="gen")
console = Console()

EXIT_ERROR = 1
EXIT_PROPERTY = 2


@app.callback()
def setup(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
):
    """Configure logging for every command."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _fail(exc: Exception) -> None:
    console.print(f"[bold red]Error:[/bold red] {exc}")
    raise typer.Exit(EXIT_ERROR)


def _parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _parse_law(degrees: str, probs: Optional[str]):
    from src.config import DegreeLaw

    support = _parse_ints(degrees)
    if probs is None:
        return DegreeLaw.uniform(support)
    weights = [float(x) for x in probs.split(",")]
    return DegreeLaw(support=tuple(support), probabilities=tuple(weights))


@app.command()
def run(
    config: Path = typer.Argument(..., help="Experiment config JSON"),
    output: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    plots: Optional[bool] = typer.Option(None, "--plots/--no-plots", help="Write PNG figures"),
):
    """
    Run one experiment and write its run directory.

    Writes: data.csv, report.json, config.resolved.json, <series>.dat.
    """
    from src.config import ExperimentConfig
    from src.experiments import run_experiment, write_run

    try:
        cfg = ExperimentConfig.from_file(config)
        console.print(f"[bold blue]Running {cfg.kind}: {cfg.name}[/bold blue]")
        result = run_experiment(cfg)
        run_dir = write_run(result, output or cfg.output.output_dir, plots)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)

    for msg in result.warnings:
        console.print(f"  warning: {msg}", style="yellow")
    console.print(f"  rows: {len(result.data)}", style="green")
    if not result.property_ok:
        console.print(f"[bold red]Property violated; outputs in {run_dir}[/bold red]")
        raise typer.Exit(EXIT_PROPERTY)
    console.print(f"\n[bold green]Complete! Outputs in: {run_dir}[/bold green]")


@app.command()
def chi(
    graph: Path = typer.Argument(..., help="Graph JSON"),
    rho: float = typer.Option(1.0, "--rho", "-r", help="Tail parameter rho"),
    tol: float = typer.Option(1e-6, "--tol", help="Allowed primal-dual gap"),
):
    """
    chi_G(rho) by the primal and the dual method.
    """
    import numpy as np

    from src.graphs import load_graph
    from src.variational import chi_dual, chi_primal

    try:
        g = load_graph(graph)
        primal = chi_primal(g, rho)
        dual = chi_dual(g, np.arange(g.n), rho)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)

    table = Table(title=f"chi for {graph.name} (n={g.n}, rho={rho})")
    table.add_column("Method", style="cyan")
    table.add_column("Value", justify="right")
    table.add_column("Iterations", justify="right")
    table.add_column("Residual", justify="right")
    for res in (primal, dual):
        table.add_row(res.method, f"{res.value:.10f}", str(res.iterations), f"{res.residual:.2e}")
    console.print(table)

    gap = abs(primal.value - dual.value)
    if gap > tol:
        console.print(f"[bold red]Primal-dual gap {gap:.3e} exceeds {tol:g}[/bold red]")
        raise typer.Exit(EXIT_PROPERTY)
    console.print(f"Primal-dual gap: {gap:.3e}", style="green")


@app.command()
def verify(
    report: Path = typer.Argument(..., help="report.json of a finished run"),
):
    """
    Re-run a stored report and compare outputs byte-for-byte.
    """
    from src.experiments import verify_run

    try:
        res = verify_run(report)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)

    for name in res.mismatches:
        console.print(f"  {name}: differs", style="red")
    for msg in res.certificate_failures:
        console.print(f"  {msg}", style="red")
    if not res.reproduced or not res.property_ok:
        console.print("[bold red]Verification failed[/bold red]")
        raise typer.Exit(EXIT_PROPERTY)
    console.print(f"[bold green]Reproduced: {res.run_dir}[/bold green]")


@gen_app.command("gw")
def gen_gw(
    degrees: str = typer.Option(..., "--degrees", "-d", help="Support of D_g, e.g. 3,4"),
    probs: Optional[str] = typer.Option(None, "--probs", "-p", help="Probabilities (default uniform)"),
    root_degrees: Optional[str] = typer.Option(None, "--root-degrees", help="Support of D_0"),
    root_probs: Optional[str] = typer.Option(None, "--root-probs", help="Probabilities of D_0"),
    radius: int = typer.Option(6, "--radius", "-R", help="Truncation radius"),
    seed: int = typer.Option(0, "--seed", "-s", help="Seed"),
    output: Path = typer.Option(Path("tree.json"), "--out", "-o", help="Output graph JSON"),
):
    """
    Sample a Galton-Watson tree truncated at a radius.
    """
    from src.config import GWSpec
    from src.graphs import save_graph
    from src.random_graphs import sample_gw_tree

    try:
        general = _parse_law(degrees, probs)
        initial = _parse_law(root_degrees, root_probs) if root_degrees else general
        spec = GWSpec(initial=initial, general=general, radius=radius, seed=seed)
        g = sample_gw_tree(spec)
        save_graph(g, output)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    console.print(f"GW tree: {g.n} vertices, radius {radius} -> {output}", style="green")


@gen_app.command("cm")
def gen_cm(
    d: Optional[int] = typer.Option(None, "--d", help="Constant degree"),
    n: int = typer.Option(1000, "--n", "-n", help="Vertex count"),
    degrees_file: Optional[Path] = typer.Option(None, "--degrees-file", help="CSV/JSON degrees"),
    seed: int = typer.Option(0, "--seed", "-s", help="Seed"),
    max_attempts: int = typer.Option(10_000, "--max-attempts", help="Rejection budget"),
    connected: bool = typer.Option(False, "--connected", help="Reject disconnected samples"),
    output: Path = typer.Option(Path("graph.json"), "--out", "-o", help="Output graph JSON"),
):
    """
    Sample a uniform simple graph with a given degree sequence.

    The sample report is written beside the graph as <name>.report.json.
    """
    from src.graphs import save_graph
    from src.outputs_tables import write_json
    from src.random_graphs import DegreeSequence, sample_uniform_simple_graph

    try:
        if degrees_file is not None:
            ds = DegreeSequence.load(degrees_file)
        elif d is not None:
            ds = DegreeSequence.constant(n, d)
        else:
            raise typer.BadParameter("give --d or --degrees-file")
        g, report = sample_uniform_simple_graph(ds, seed, max_attempts, connected)
        save_graph(g, output)
        write_json(report.to_json_dict(), output.with_suffix(".report.json"))
    except Exception as exc:  # noqa: BLE001
        _fail(exc)

    table = Table(title="Configuration model sample")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("vertices", str(g.n))
    table.add_row("edges", str(ds.total // 2))
    table.add_row("attempts", str(report.attempts))
    table.add_row("connected", str(report.connected))
    console.print(table)
    console.print(f"Saved to: {output}", style="green")


@app.command()
def version():
    """Show version information."""
    from src import __version__
    console.print(f"PAM graph lab v{__version__}")


def main():
    """Entry point for CLI."""
    app()


if __name__ == "__main__":
    main()
