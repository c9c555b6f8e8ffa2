"""Annular grid for the polar-coordinate wave solver."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AnnularGrid:
    """Node-centered annulus: radial lines x azimuthal samples.

    Radial nodes include both rims (``nr`` nodes, spacing
    ``dr = (r_max - r_min)/(nr - 1)``); the azimuth is periodic with ``nt``
    samples and no duplicated seam.
    """

    nr: int
    nt: int
    r_min: float
    r_max: float

    def __post_init__(self):
        if self.nr < 8 or self.nt < 8:
            raise ValueError("need at least 8 nodes per direction")
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError("need 0 < r_min < r_max")

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / (self.nr - 1)

    @property
    def dtheta(self) -> float:
        return 2.0 * math.pi / self.nt

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.nr)

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.nt) * self.dtheta

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(nr, nt) meshes of radius and azimuth."""
        return np.meshgrid(self.r, self.theta, indexing="ij")

    def refined(self, factor: int = 2) -> "AnnularGrid":
        """Same annulus with both resolutions multiplied by ``factor``."""
        return AnnularGrid((self.nr - 1) * factor + 1, self.nt * factor,
                           self.r_min, self.r_max)

    def cell_area(self) -> float:
        return self.dr * self.dtheta
