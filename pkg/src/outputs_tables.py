"""CSV, JSON and two-column series output."""

import hashlib
import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd


def to_jsonable(obj: Any) -> Any:
    """
    Recursively convert numpy containers and scalars to plain Python values.

    Paths become strings; non-finite floats are kept (``json`` writes them as
    NaN / Infinity).
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj: Any) -> str:
    """Canonical JSON text (sorted keys, two-space indent)."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2)


def write_json(obj: Any, output_path: str | Path) -> Path:
    """
    Write a JSON document.

    Args:
        obj: JSON-like object (numpy values allowed)
        output_path: Output path

    Returns:
        The written path
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(dumps(obj) + "\n")
    return output_path


def write_csv(df: pd.DataFrame, output_path: str | Path) -> Path:
    """Write a table without index, floats with 12 significant digits."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(output_path, index=False, float_format="%.12g")
    return output_path


def write_dat(
    x: "Sequence[float] | np.ndarray",
    y: "Sequence[float] | np.ndarray",
    output_path: str | Path,
    header: str = "",
) -> Path:
    """
    Write a plot series as two whitespace-separated columns.

    Args:
        x: Abscissae
        y: Ordinates (same length)
        output_path: Output .dat path
        header: Optional comment line (written with a leading '#')
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"series lengths differ: {x.shape} vs {y.shape}")
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {header}"] if header else []
    lines += [f"{a:.12g} {b:.12g}" for a, b in zip(x, y)]
    output_path.write_text("\n".join(lines) + "\n")
    return output_path


def read_dat(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of write_dat."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    return data[:, 0], data[:, 1]


def file_sha256(path: str | Path) -> str:
    """Hex SHA-256 digest of a file."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
