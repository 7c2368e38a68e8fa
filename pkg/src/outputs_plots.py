"""Figures for run directories (PNG output)."""

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .config import DEFAULT_OUTPUT  # noqa: E402


def create_lyapunov_plot(
    times: "Sequence[float] | np.ndarray",
    residual_mean: "Sequence[float] | np.ndarray",
    residual_std: "Sequence[float] | np.ndarray",
    chi_est: float,
    chi_uncertainty: float = 0.0,
    title: str = "Lyapunov residual",
    figsize: tuple[int, int] = DEFAULT_OUTPUT.figure_size,
    dpi: int = DEFAULT_OUTPUT.dpi,
) -> tuple[plt.Figure, plt.Axes]:
    """
    Residual (1/t) log U(t) minus the leading theory terms, against -chi.

    Args:
        times: Time grid
        residual_mean: Seed-averaged residual per t
        residual_std: Seed dispersion per t (shaded band)
        chi_est: Variational estimate; the horizontal line sits at -chi_est
        chi_uncertainty: Half-width of the band around -chi_est
        title: Axes title
        figsize: Figure size in inches
        dpi: Figure resolution

    Returns:
        Tuple of (figure, axes)
    """
    t = np.asarray(times, dtype=np.float64)
    mean = np.asarray(residual_mean, dtype=np.float64)
    std = np.asarray(residual_std, dtype=np.float64)
    fig, ax = plt.subplots(figsize=figsize, dpi=dpi)
    ax.plot(t, mean, marker="o", color="#1f4e79", label="simulated residual")
    ax.fill_between(t, mean - std, mean + std, color="#1f4e79", alpha=0.2,
                    label="seed dispersion")
    ax.axhline(-chi_est, color="#a33", linestyle="--", label=r"$-\tilde\chi$ estimate")
    if chi_uncertainty > 0:
        ax.axhspan(-chi_est - chi_uncertainty, -chi_est + chi_uncertainty,
                   color="#a33", alpha=0.1)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("t")
    ax.set_ylabel("residual")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig, ax


def create_mass_plot(
    times: "Sequence[float] | np.ndarray",
    curves: dict[str, "Sequence[float] | np.ndarray"],
    title: str = "Total mass",
    figsize: tuple[int, int] = DEFAULT_OUTPUT.figure_size,
    dpi: int = DEFAULT_OUTPUT.dpi,
) -> tuple[plt.Figure, plt.Axes]:
    """(1/t) log U(t) per labelled curve (one per seed)."""
    fig, ax = plt.subplots(figsize=figsize, dpi=dpi)
    for label, values in curves.items():
        ax.plot(times, values, marker=".", linewidth=1, label=label)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\frac{1}{t}\log U(t)$")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if 0 < len(curves) <= 10:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig, ax


def save_figure(fig: plt.Figure, output_path: str | Path, dpi: int = DEFAULT_OUTPUT.dpi) -> Path:
    """Save a figure as PNG and close it."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output_path, dpi=dpi)
    plt.close(fig)
    return output_path
