"""Polyharmonic operators, boundary conditions and norms on radial grids."""

from enum import Enum
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import null_space

from radial.grid import GridError, Profile, RadialGrid
from settings import BC_TOL, make_logger

logger = make_logger("radial", "RADIAL")


class BoundaryConditionError(ValueError):
    """Raised when a profile violates the essential boundary conditions."""


class BoundaryCondition(str, Enum):
    """Boundary-condition family of the admissible space."""

    DIRICHLET = "dirichlet"  # H^r_0: u, u', ..., u^(r-1) vanish at ρ = 1
    NAVIER = "navier"  # H^r_θ: u, Δu, ..., Δ^(m-1) u vanish at ρ = 1, m = ⌈r/2⌉


def navier_count(r: int) -> int:
    """Number of essential Navier conditions, m = ⌈r/2⌉."""
    return (r + 1) // 2


def critical_exponent(N: int, r: int) -> float:
    """2*r = 2N/(N − 2r)."""
    if N <= 2 * r:
        raise GridError(f"critical exponent needs N > 2r, got N={N}, r={r}")
    return 2.0 * N / (N - 2 * r)


def conjugate_exponent(N: int, r: int) -> float:
    """Hölder conjugate of 2*r, i.e. 2N/(N + 2r)."""
    return 2.0 * N / (N + 2 * r)


# ---------------------------------------------------------------------------
# Laplacians
# ---------------------------------------------------------------------------

def radial_laplacian(u: Profile) -> Profile:
    return u.with_values(u.grid.laplacian_matrix @ u.values)


@lru_cache(maxsize=64)
def _neg_laplacian_power(grid: RadialGrid, j: int) -> np.ndarray:
    if j == 0:
        power = np.eye(grid.size)
    else:
        power = np.linalg.matrix_power(-grid.laplacian_matrix, j)
    power.setflags(write=False)
    return power


def iterated_laplacian(
    u: Profile,
    j: int,
    bc: Optional[BoundaryCondition] = None,
    r: Optional[int] = None,
) -> Profile:
    """Return (−Δ)^j u.

    With ``bc`` given, the boundary values are imposed before every
    application: the i-th iterate is projected onto the essential subspace it
    inherits from order ``r`` (Navier: order r − 2i, Dirichlet: only i = 0).
    With ``bc=None`` the operator is applied to ``u`` as is.
    """
    if j < 0:
        raise GridError(f"Laplacian power must be non-negative, got {j}")
    if r is not None and j > r:
        raise GridError(f"Laplacian power {j} exceeds order r={r}")
    if bc is None:
        return u.with_values(_neg_laplacian_power(u.grid, j) @ u.values)
    if r is None:
        raise GridError("order r is required when a boundary condition is given")
    lap = u.grid.laplacian_matrix
    for step in range(j):
        order = _inherited_order(bc, r, step)
        if order > 0:
            u = enforce_bc(u, order, bc)
        u = u.with_values(-(lap @ u.values))
    if j == 0:
        u = enforce_bc(u, r, bc)
    return u


def _inherited_order(bc: BoundaryCondition, r: int, step: int) -> int:
    """Order of the essential conditions (−Δ)^step u carries when u has order r."""
    if bc is BoundaryCondition.NAVIER:
        return max(r - 2 * step, 0)
    return r if step == 0 else 0


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def lp_norm(u: Profile, p: float) -> float:
    """(∫_B |u|^p dx)^{1/p} by grid quadrature."""
    if p < 1:
        raise GridError(f"L^p norm needs p >= 1, got {p}")
    return float(u.grid.integrate(np.abs(u.values) ** p) ** (1.0 / p))


@lru_cache(maxsize=64)
def energy_operator(grid: RadialGrid, r: int) -> Tuple[np.ndarray, np.ndarray]:
    """Matrix E and weights w with ‖u‖ᵣ² = Σ w (E u)².

    Even r: E = (−Δ)^{r/2} at the nodes with the quadrature weights.
    Odd r: E = ∂_ρ (−Δ)^{(r−1)/2} at the faces with the face weights.
    """
    if r < 1:
        raise GridError(f"order must be >= 1, got {r}")
    if r % 2 == 0:
        return _neg_laplacian_power(grid, r // 2), np.asarray(grid.weights)
    op = grid.gradient_matrix @ _neg_laplacian_power(grid, (r - 1) // 2)
    op.setflags(write=False)
    return op, np.asarray(grid.face_weights)


def hr_inner(u: Profile, v: Profile, r: int) -> float:
    """The bilinear form ⟨u, v⟩ᵣ underlying ‖·‖ᵣ."""
    op, w = energy_operator(u.grid, r)
    return float(np.dot(w, (op @ u.values) * (op @ v.values)))


def hr_seminorm_sq(
    u: Profile,
    r: int,
    bc: Optional[BoundaryCondition] = None,
    strict: bool = True,
) -> float:
    """‖u‖ᵣ² by quadrature.

    With ``strict`` and a ``bc``, a profile violating the essential boundary
    conditions beyond the BC tolerance raises BoundaryConditionError.
    """
    if strict and bc is not None:
        residual = bc_residual(u, r, bc)
        if residual > BC_TOL:
            raise BoundaryConditionError(
                f"{bc.value} boundary residual {residual:.3e} exceeds {BC_TOL:.1e} (r={r})"
            )
    return hr_inner(u, u, r)


# ---------------------------------------------------------------------------
# Boundary conditions
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def constraint_matrix(grid: RadialGrid, r: int, bc: BoundaryCondition) -> np.ndarray:
    """Rows of the discrete essential conditions at ρ = 1, normalized to unit length.

    Dirichlet rows also carry the Navier rows, which the continuous Dirichlet
    conditions imply; the discrete Dirichlet space is then a subspace of the
    discrete Navier space. Dependent rows are dropped by the null-space rank cut.
    """
    rows = [_neg_laplacian_power(grid, k)[-1] for k in range(navier_count(r))]
    if bc is BoundaryCondition.DIRICHLET:
        rows = [grid.boundary_derivative_row(k) for k in range(r)] + rows
    mat = np.vstack(rows)
    mat /= np.linalg.norm(mat, axis=1, keepdims=True)
    mat.setflags(write=False)
    return mat


# Relative singular-value cut separating independent constraint rows from dependent ones.
_RANK_RCOND = 1e-10


@lru_cache(maxsize=64)
def bc_basis(grid: RadialGrid, r: int, bc: BoundaryCondition) -> np.ndarray:
    """Orthonormal basis (columns) of the discrete essential-BC subspace."""
    basis = null_space(constraint_matrix(grid, r, bc), rcond=_RANK_RCOND)
    basis.setflags(write=False)
    logger.debug(f"{bc.value} subspace r={r}: {basis.shape[1]} of {grid.size} dofs")
    return basis


def enforce_bc(u: Profile, r: int, bc: BoundaryCondition) -> Profile:
    """Orthogonal projection onto the discrete essential-BC subspace."""
    basis = bc_basis(u.grid, r, bc)
    return u.with_values(basis @ (basis.T @ u.values))


def bc_residual(u: Profile, r: int, bc: BoundaryCondition) -> float:
    """Largest essential-BC violation, relative to max(1, ‖u‖∞)."""
    rows = constraint_matrix(u.grid, r, bc)
    scale = max(1.0, float(np.max(np.abs(u.values))))
    return float(np.max(np.abs(rows @ u.values)) / scale)


def dirichlet_residual(u: Profile, r: int) -> float:
    """Boundary-derivative residual against H^r_0, the "not in H^r_0" surrogate."""
    return bc_residual(u, r, BoundaryCondition.DIRICHLET)


def natural_navier_residual(u: Profile, r: int) -> float:
    """A-posteriori check of the natural Navier conditions Δ^k u(1) = 0, m ≤ k < r.

    Each (−Δ)^k u(1) is scaled by the interior magnitude of (−Δ)^k u.
    """
    worst = 0.0
    for k in range(navier_count(r), r):
        lap_k = _neg_laplacian_power(u.grid, k) @ u.values
        scale = max(float(np.max(np.abs(lap_k[:-1]))), 1e-300)
        worst = max(worst, abs(float(lap_k[-1])) / scale)
    return worst
