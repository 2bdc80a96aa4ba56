"""
Radial grids and sampled profiles on the unit ball
==================================================

A radial function on the ball B ⊂ R^N is sampled on nodes 0 < ρ_1 < … < ρ_n = 1.
The nodes are the image of the staggered grid s_k = (k − ½)h, h = 1/(n − ½),
under an odd map ρ = φ(s), the identity for uniform grids. The origin is never
a node. Because φ is odd, the even extension u(−ρ) = u(ρ) becomes the ghost
rule U(−s_k) = U(s_k), and the stencils at the origin stay symmetric.

Two weight vectors are attached to every grid:

    weights        high-order quadrature for ∫_B f dx at the nodes;
    face_weights   midpoint quadrature at the faces s = kh, used by the
                   gradient energy of odd orders.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.special import gamma

GRID_KINDS = ("uniform", "graded")

# Graded map φ(s) = s(1 + g s²)/(1 + g): spacing h/(1+g) at the origin, h(1+3g)/(1+g) at ρ = 1.
_GRADING = 2.0

# Fourth-order central weights in s: offsets −2..2 for the node rows,
# offsets −3/2..3/2 for the face gradient.
_CENTRAL_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_CENTRAL_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_FACE_D1 = np.array([1.0, -27.0, 27.0, -1.0]) / 24.0

# Points in the one-sided stencils next to ρ = 1.
_END_WIDTH = 6


class GridError(ValueError):
    """Raised for invalid grid parameters or mismatched profiles."""


def sphere_area(N: int) -> float:
    """Surface area ω_{N−1} of the unit sphere in R^N."""
    return float(2.0 * np.pi ** (N / 2.0) / gamma(N / 2.0))


def ball_volume(N: int) -> float:
    return sphere_area(N) / N


def fd_weights(stencil: np.ndarray, x0: float, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``x0``.

    Solves the moment system Σ_i w_i (x_i − x0)^m / m! = δ_{m,order} for
    m = 0..len(stencil)−1.
    """
    offsets = np.asarray(stencil, dtype=float) - x0
    size = offsets.size
    if order >= size:
        raise GridError(f"stencil of {size} points cannot resolve derivative order {order}")
    factorials = np.cumprod(np.r_[1.0, np.arange(1, size)])
    vander = offsets[None, :] ** np.arange(size)[:, None] / factorials[:, None]
    rhs = np.zeros(size)
    rhs[order] = 1.0
    return np.linalg.solve(vander, rhs)


def _fold(row: np.ndarray, columns: np.ndarray, weights: np.ndarray) -> None:
    """Scatter stencil weights into ``row``, reflecting ghost columns j < 0 onto −j−1."""
    np.add.at(row, np.where(columns < 0, -columns - 1, columns), weights)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Nodes, quadrature weights and the s-coordinate geometry of a radial grid.

    ``jacobian`` and ``curvature`` hold φ′ and φ″ at the nodes, ``face_jacobian``
    holds φ′ at the faces.
    """

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    faces: np.ndarray
    face_weights: np.ndarray
    jacobian: np.ndarray
    curvature: np.ndarray
    face_jacobian: np.ndarray
    kind: str = "uniform"
    spacing: float = 0.0

    def __post_init__(self) -> None:
        for name in ("nodes", "weights", "faces", "face_weights", "jacobian", "curvature", "face_jacobian"):
            getattr(self, name).setflags(write=False)

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def min_spacing(self) -> float:
        return float(np.min(np.diff(np.r_[0.0, self.nodes])))

    def integrate(self, values: np.ndarray) -> float:
        """∫_B f dx for node values of a radial f."""
        return float(np.dot(self.weights, values))

    @cached_property
    def laplacian_matrix(self) -> np.ndarray:
        """Dense matrix of the discrete radial Laplacian u'' + (N−1)/ρ u'.

        Rows 0..n−3 differentiate U(s) = u(φ(s)) with fourth-order central
        stencils and the even ghost rule, so the row at the first node is the
        pointwise Laplacian. Rows n−2 and n−1 use one-sided six-point stencils
        in ρ; the last one is exactly the combination of the boundary
        derivative rows of order two and one.
        """
        n, N, h = self.size, self.dimension, self.spacing
        rho, jac, curv = self.nodes, self.jacobian, self.curvature
        lap = np.zeros((n, n))
        offsets = np.arange(-2, 3)
        for k in range(n - 2):
            d2 = _CENTRAL_D2 / (h * h * jac[k] ** 2)
            d1 = _CENTRAL_D1 / h * ((N - 1) / (rho[k] * jac[k]) - curv[k] / jac[k] ** 3)
            _fold(lap[k], k + offsets, d2 + d1)
        stencil = rho[-_END_WIDTH:]
        lap[-2, -_END_WIDTH:] = fd_weights(stencil, rho[-2], 2) + (N - 1) / rho[-2] * fd_weights(stencil, rho[-2], 1)
        lap[-1] = self.boundary_derivative_row(2) + (N - 1) * self.boundary_derivative_row(1)
        lap.setflags(write=False)
        return lap

    @cached_property
    def gradient_matrix(self) -> np.ndarray:
        """Radial derivative at the faces s = kh, k = 1..n−1 (fourth order)."""
        n, h = self.size, self.spacing
        grad = np.zeros((n - 1, n))
        offsets = np.arange(-1, 3)
        for i in range(n - 2):
            _fold(grad[i], i + offsets, _FACE_D1 / h)
        s = (np.arange(n) + 0.5) * h
        s[-1] = 1.0
        grad[-1, -5:] = fd_weights(s[-5:], (n - 1) * h, 1)
        grad /= self.face_jacobian[:, None]
        grad.setflags(write=False)
        return grad

    def boundary_derivative_row(self, order: int) -> np.ndarray:
        """One-sided stencil for d^order/dρ^order at ρ = 1."""
        row = np.zeros(self.size)
        if order == 0:
            row[-1] = 1.0
            return row
        width = max(order + 4, _END_WIDTH)
        row[-width:] = fd_weights(self.nodes[-width:], 1.0, order)
        return row


@dataclass(frozen=True, eq=False)
class Profile:
    """Node values of a radial function on a RadialGrid."""

    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise GridError(
                f"profile has {values.size} values but grid has {self.grid.size} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise GridError("profile values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray) -> "Profile":
        return Profile(self.grid, values)

    def scaled(self, factor: float) -> "Profile":
        return Profile(self.grid, factor * self.values)

    def __add__(self, other: "Profile") -> "Profile":
        _check_same_grid(self, other)
        return Profile(self.grid, self.values + other.values)

    def __sub__(self, other: "Profile") -> "Profile":
        _check_same_grid(self, other)
        return Profile(self.grid, self.values - other.values)

    @classmethod
    def from_function(cls, grid: RadialGrid, fn) -> "Profile":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "Profile":
        return cls(grid, np.zeros(grid.size))


def _check_same_grid(a: Profile, b: Profile) -> None:
    if a.grid is not b.grid:
        raise GridError("profiles live on different grids")


def _stretch(s: np.ndarray, kind: str) -> tuple:
    """φ(s), φ′(s) and φ″(s) of the node map."""
    if kind == "uniform":
        return s.copy(), np.ones_like(s), np.zeros_like(s)
    g = _GRADING
    return (
        s * (1.0 + g * s * s) / (1.0 + g),
        (1.0 + 3.0 * g * s * s) / (1.0 + g),
        6.0 * g * s / (1.0 + g),
    )


def _end_coefficients(n: int) -> np.ndarray:
    """Midpoint weights on the staggered s-grid, corrected at s = 1.

    Nodes s_k = (k − ½)h cover [0, 1 − h/2] by the midpoint rule; the last node
    sits on s = 1. The tail [1 − h/2, 1] is integrated with the quadratic through
    the last three nodes and the midpoint rule's h²/24·f' end term is added back.
    """
    c = np.ones(n)
    c[-1] = 0.0
    c[-1] += 1.0 / 24.0 + 1.0 / 3.0
    c[-2] += -1.0 / 24.0 + 5.0 / 24.0
    c[-3] += -1.0 / 24.0
    return c


def make_radial_grid(N: int, n_nodes: int, kind: str = "uniform") -> RadialGrid:
    """Build a radial grid on the unit ball of R^N.

    Args:
        N: Space dimension.
        n_nodes: Number of nodes (at least 8).
        kind: ``"uniform"`` or ``"graded"`` (clustered towards the origin).

    Returns:
        RadialGrid whose quadrature reproduces the ball volume.
    """
    if N < 1:
        raise GridError(f"dimension must be >= 1, got {N}")
    if n_nodes < 8:
        raise GridError(f"need at least 8 nodes, got {n_nodes}")
    if kind not in GRID_KINDS:
        raise GridError(f"unknown grid kind {kind!r}; expected one of {GRID_KINDS}")

    h = 1.0 / (n_nodes - 0.5)
    s = (np.arange(1, n_nodes + 1) - 0.5) * h
    s[-1] = 1.0
    rho, jac, curv = _stretch(s, kind)
    rho[-1] = 1.0

    omega = sphere_area(N)
    weights = omega * h * _end_coefficients(n_nodes) * jac * rho ** (N - 1)

    face_s = np.arange(1, n_nodes) * h
    faces, face_jac, _ = _stretch(face_s, kind)
    face_weights = omega * h * face_jac * faces ** (N - 1)

    return RadialGrid(
        dimension=N,
        nodes=rho,
        weights=weights,
        faces=faces,
        face_weights=face_weights,
        jacobian=jac,
        curvature=curv,
        face_jacobian=face_jac,
        kind=kind,
        spacing=float(h),
    )


def grid_levels(N: int, levels, kind: str = "uniform") -> list:
    """One grid per node count in ``levels``."""
    return [make_radial_grid(N, int(n), kind) for n in levels]


def resolvable_epsilon(grid: RadialGrid, factor: float = 5.0) -> float:
    """Smallest concentration scale the grid resolves (``factor`` × min spacing)."""
    return factor * grid.min_spacing


def interior_mask(grid: RadialGrid, layer: int, rho_min: Optional[float] = None) -> np.ndarray:
    """Nodes away from the boundary layer of ``layer`` nodes (and optionally the origin)."""
    mask = np.ones(grid.size, dtype=bool)
    if layer > 0:
        mask[-layer:] = False
    if rho_min is not None:
        mask &= grid.nodes >= rho_min
    return mask
