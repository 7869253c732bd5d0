"""Particle ensembles and their CSV serialization."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch

# Round-trippable float format shared by every CSV writer so identical runs
# produce identical bytes.
FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class ParticleEnsemble:
    """n points in R^d stored as an (n, d) float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError(f"points must be a nonempty (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("ensemble contains non-finite entries")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def write_csv(self, path) -> None:
        """One row per particle, header x0..x{d-1}."""
        header = ",".join(f"x{j}" for j in range(self.d))
        np.savetxt(path, self.points, fmt=FLOAT_FORMAT, delimiter=",",
                   header=header, comments="")

    @classmethod
    def read_csv(cls, path) -> "ParticleEnsemble":
        path = Path(path)
        with path.open() as fh:
            header = fh.readline().strip()
        columns = header.split(",")
        if not all(name.strip().startswith("x") for name in columns):
            raise DimensionMismatch(f"{path}: expected header x0..x{{d-1}}, got {header!r}")
        pts = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if pts.shape[1] != len(columns):
            raise DimensionMismatch(
                f"{path}: header names {len(columns)} columns but rows have {pts.shape[1]}"
            )
        return cls(points=pts)
