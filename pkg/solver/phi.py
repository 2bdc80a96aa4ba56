"""Test data φ for the three hypotheses of the gap theorem."""

import numpy as np
from scipy.linalg import lstsq

from radial.grid import Profile, RadialGrid
from radial.operators import BoundaryCondition, critical_exponent, energy_operator, enforce_bc, lp_norm
from radial.space import discrete_space
from solver.problem import ProblemError

PHI_KINDS = ("constant_sign_bump", "h0_member", "theta_orthogonal")

# Width of the Gaussian bump exp(−ρ²/(2σ²)).
BUMP_SIGMA = 0.5


def _scaled(values: np.ndarray, grid: RadialGrid, r: int, target_norm: float) -> Profile:
    u = Profile(grid, values)
    norm = lp_norm(u, critical_exponent(grid.dimension, r))
    if norm < 1e-14:
        raise ProblemError("seed profile vanishes; the target norm cannot be reached")
    return u.scaled(target_norm / norm)


def theta_orthogonal_seed(grid: RadialGrid, r: int) -> np.ndarray:
    """Navier-space profile with its Dirichlet-space component removed in ⟨·,·⟩ᵣ."""
    navier = enforce_bc(Profile(grid, 1.0 - grid.nodes ** 2), r, BoundaryCondition.NAVIER)
    dirichlet = discrete_space(grid, r, BoundaryCondition.DIRICHLET).basis
    op, w = energy_operator(grid, r)
    root = np.sqrt(w)[:, None] * op
    coeffs, *_ = lstsq(root @ dirichlet, root @ navier.values)
    residual = navier.values - dirichlet @ coeffs
    seed_energy = float(np.linalg.norm(root @ navier.values))
    if float(np.linalg.norm(root @ residual)) <= 1e-8 * max(seed_energy, 1e-300):
        raise ProblemError(
            f"the Navier and Dirichlet spaces coincide for r={r}; no orthogonal φ exists"
        )
    return residual


def make_phi(kind: str, target_norm: float, grid: RadialGrid, r: int) -> Profile:
    """Build φ of the requested kind with ‖φ‖_{L^{2*r}} = target_norm.

    Args:
        kind: ``constant_sign_bump`` (nonnegative Gaussian, not in H^r_0),
            ``h0_member`` (in the discrete Dirichlet space) or
            ``theta_orthogonal`` (Navier space, ⟨·,·⟩ᵣ-orthogonal to the Dirichlet space).
        target_norm: Positive L^{2*r} norm of the result.
        grid: Grid to sample on.
        r: Order of the problem.

    Raises:
        ProblemError: on a non-positive target, an unknown kind or a vanishing seed.
    """
    if not target_norm > 0:
        raise ProblemError(f"target norm must be positive, got {target_norm}")
    rho = grid.nodes
    if kind == "constant_sign_bump":
        values = np.exp(-rho ** 2 / (2.0 * BUMP_SIGMA ** 2))
    elif kind == "h0_member":
        seed = Profile(grid, (1.0 - rho ** 2) ** (r + 1))
        values = enforce_bc(seed, r, BoundaryCondition.DIRICHLET).values
    elif kind == "theta_orthogonal":
        values = theta_orthogonal_seed(grid, r)
    else:
        raise ProblemError(f"unknown phi kind {kind!r}; expected one of {PHI_KINDS}")
    return _scaled(values, grid, r, target_norm)
