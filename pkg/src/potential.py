"""
Double-exponential random potentials.

The field has the exact tail P(xi > u) = exp(-e^{u/rho}) for u >= 0, with the
mass below zero moved to an atom at 0. It is sampled by inversion:
xi = max(0, rho * log E) for E ~ Exp(1).

Functions:
    - sample_double_exponential: i.i.d. field on the vertices of a graph
    - a_scale: Leading order rho * loglog L of the maximum of L values
    - max_in_ball: Argmax and max of the field on a ball
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .graphs import Ball, RootedGraph
from .rng import stream

logger = logging.getLogger(__name__)

# e^e; a_L is flat below this volume
_EE = math.exp(math.e)


@dataclass(frozen=True, eq=False)
class Potential:
    """
    Nonnegative field xi on the vertices 0 .. n-1.

    Attributes:
        values: Field values, one per vertex.
        rho: Tail parameter of the double-exponential law.
        seed: Seed it was sampled from (None for hand-built fields).
    """

    values: np.ndarray
    rho: float
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64).ravel()
        if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0):
            raise ValueError("potential values must be finite and nonnegative")
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, x):
        return self.values[x]

    @classmethod
    def from_values(cls, values: "Sequence[float] | np.ndarray", rho: float = 1.0) -> "Potential":
        return cls(np.asarray(values, dtype=np.float64), rho)

    @classmethod
    def zeros(cls, n: int, rho: float = 1.0) -> "Potential":
        return cls(np.zeros(n), rho)

    def with_values(self, vertices: "Sequence[int] | np.ndarray",
                    values: "Sequence[float] | np.ndarray | float") -> "Potential":
        """Copy with ``values`` written at ``vertices`` (used to plant spikes and profiles)."""
        arr = self.values.copy()
        arr[np.asarray(vertices, dtype=np.int64)] = values
        return Potential(arr, self.rho, self.seed)

    def to_json_dict(self) -> dict:
        return {"rho": self.rho, "seed": self.seed, "values": self.values.tolist()}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Potential":
        return cls(np.asarray(data["values"], dtype=np.float64), float(data["rho"]),
                   data.get("seed"))

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_json_dict(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "Potential":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def sample_double_exponential(
    g: "RootedGraph | int",
    rho: float,
    seed: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> Potential:
    """
    Sample an i.i.d. double-exponential field.

    Args:
        g: Graph (or a vertex count).
        rho: Tail parameter (> 0).
        seed: Seed of the Philox stream (ignored when ``rng`` is given).
        rng: Stream to draw from.

    Returns:
        Potential with P(xi > u) = exp(-e^{u/rho}) for u >= 0 and
        P(xi = 0) = 1 - 1/e.

    Examples:
        >>> xi = sample_double_exponential(5, rho=1.0, seed=3)
        >>> bool((xi.values >= 0).all())
        True
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    n = g if isinstance(g, int) else g.n
    rng = rng if rng is not None else stream(seed)
    e = rng.standard_exponential(n)
    values = np.maximum(0.0, rho * np.log(e))
    return Potential(values, rho, seed)


def a_scale(L: int, rho: float) -> float:
    """
    a_L = rho * loglog(max(L, e^e)).

    Examples:
        >>> a_scale(10, 2.0)
        2.0
        >>> round(a_scale(10**6, 1.0), 4)
        2.6258
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if L <= _EE:
        return float(rho)
    return rho * math.log(math.log(float(L)))


def max_in_ball(xi: Potential, b: Ball) -> tuple[int, float]:
    """Argmax and max of xi on the ball; ties go to the smallest vertex id."""
    vals = xi.values[b.members]
    i = int(np.argmax(vals))
    return int(b.members[i]), float(vals[i])


def maximum_deviation_bound(r: int, rho: float, theta: float) -> float:
    """Scale 2 rho log r / (theta r) of the deviation of the ball maximum from a_{L_r}."""
    if r < 1 or theta <= 0:
        raise ValueError(f"need r >= 1 and theta > 0, got r={r}, theta={theta}")
    return 2.0 * rho * math.log(r) / (theta * r)
