"""Gauss-Legendre x uniform-longitude quadrature grids on the 2-sphere.

The product rule integrates spherical polynomials exactly up to
``exact_degree = min(2*n_theta - 1, n_phi - 1)``: the longitude trapezoid rule
is exact for trigonometric degree < n_phi and the colatitude Gauss rule for
polynomial degree <= 2*n_theta - 1 in cos(theta).  Grids are immutable and
safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FOUR_PI = 4.0 * math.pi


def gauss_legendre_nodes(n: int, tol: float = 1e-14, max_iter: int = 100):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].

    Newton iteration on P_n starting from Chebyshev-type initial guesses;
    raises RuntimeError if any node fails to converge to ``tol``.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    j = np.arange(1, n + 1)
    x = np.cos(math.pi * (j - 0.25) / (n + 0.5))

    def eval_pn(x):
        p_prev = np.ones_like(x)
        p_cur = x.copy()
        for k in range(2, n + 1):
            p_prev, p_cur = p_cur, ((2 * k - 1) * x * p_cur - (k - 1) * p_prev) / k
        dp = n * (p_prev - x * p_cur) / (1.0 - x * x)
        return p_cur, dp

    for _ in range(max_iter):
        p_cur, dp = eval_pn(x)
        dx = p_cur / dp
        x = x - dx
        if np.abs(dx).max() <= tol:
            break
    else:
        raise RuntimeError(f"Gauss-Legendre Newton iteration failed to reach {tol} for n={n}")
    _, dp = eval_pn(x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    return x, w


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature grid: Gauss-Legendre colatitudes x uniform longitudes."""

    n_theta: int
    n_phi: int
    theta_nodes: np.ndarray   # ascending colatitudes, radians
    cos_nodes: np.ndarray     # cos(theta_nodes), Gauss-Legendre points
    theta_weights: np.ndarray  # 1-d Gauss weights (sum to 2)
    exact_degree: int

    @property
    def phi_nodes(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def quad_weights(self) -> np.ndarray:
        """Combined per-cell weights (steradians), row-major theta x phi."""
        w = np.repeat(self.theta_weights * (2.0 * math.pi / self.n_phi), self.n_phi)
        return w

    @property
    def n_cells(self) -> int:
        return self.n_theta * self.n_phi


def build_grid(target_degree: int) -> SphereGrid:
    """Smallest product grid integrating spherical polynomials of the target
    degree exactly.  n_phi is rounded up to an even count."""
    if target_degree < 1:
        raise ValueError(f"target_degree must be >= 1, got {target_degree}")
    n_theta = (target_degree + 2) // 2  # ceil((d+1)/2)
    n_phi = target_degree + 1
    if n_phi % 2:
        n_phi += 1
    x, w = gauss_legendre_nodes(n_theta)
    order = np.argsort(-x)  # descending x = ascending theta
    x, w = x[order], w[order]
    return SphereGrid(
        n_theta=n_theta,
        n_phi=n_phi,
        theta_nodes=np.arccos(x),
        cos_nodes=x,
        theta_weights=w,
        exact_degree=min(2 * n_theta - 1, n_phi - 1),
    )


def integrate(grid: SphereGrid, values: np.ndarray) -> float:
    """Quadrature sum over the sphere of point values on the grid.

    Accepts a (n_theta, n_phi) array or its flattened row-major form.
    """
    values = np.asarray(values)
    if values.shape == (grid.n_theta, grid.n_phi):
        rows = values.sum(axis=1)
    elif values.shape == (grid.n_theta * grid.n_phi,):
        rows = values.reshape(grid.n_theta, grid.n_phi).sum(axis=1)
    else:
        raise ValueError(
            f"values shape {values.shape} does not match grid "
            f"({grid.n_theta}, {grid.n_phi})"
        )
    return float(np.dot(grid.theta_weights, rows) * (2.0 * math.pi / grid.n_phi))
