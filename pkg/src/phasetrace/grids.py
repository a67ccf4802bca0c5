"""Square phase-plane sampling grids shared by the symbol and transform code."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform n-by-n sampling of a centered square in the phase plane.

    Parameters
    ----------
    center : tuple of float
        Midpoint of the square, (x0, xi0).
    half_extent : float
        Half side length L; the grid covers [x0-L, x0+L) x [xi0-L, xi0+L).
    n : int
        Points per axis; must be a power of two (FFT paths rely on it).

    Notes
    -----
    Nodes are x0 - L + h*j for j = 0..n-1 with h = 2L/n, i.e. the right/top
    edge is excluded, which is the periodic convention the FFT routes expect.
    """

    center: tuple = (0.0, 0.0)
    half_extent: float = 16.0
    n: int = 1024

    def __post_init__(self):
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise ValueError("grid size n must be a power of two >= 4")
        if not self.half_extent > 0:
            raise ValueError("half_extent must be positive")

    @property
    def h(self):
        """Grid spacing (same in both axes)."""
        return 2.0 * self.half_extent / self.n

    def axes(self):
        """Return the two 1-D coordinate arrays (x, xi)."""
        x0, xi0 = self.center
        base = -self.half_extent + self.h * np.arange(self.n)
        return x0 + base, xi0 + base

    def mesh(self):
        """Return meshgrid arrays X, XI with shape (n, n), 'ij' indexing."""
        x, xi = self.axes()
        return np.meshgrid(x, xi, indexing="ij")

    def cell_area(self):
        return self.h * self.h
