"""Euler–Lagrange residuals and the multiplier identities of the constrained problem."""

import numpy as np

from radial.grid import Profile, interior_mask
from radial.operators import hr_inner, hr_seminorm_sq
from radial.space import discrete_space
from solver.problem import DegenerateMultiplierError, ProblemSpec, SolveResult, critical_nonlinearity

# Brackets closer to zero than this make the multiplier identity meaningless.
DEGENERATE_BRACKET = 1e-12


def boundary_layer(r: int) -> int:
    """Nodes next to ρ = 1 excluded from interior residuals."""
    return r + 3


def lagrange_multiplier_identity(u: Profile, phi: Profile, value: float, spec: ProblemSpec) -> float:
    """Λ = value / (1 − ∫ |u+φ|^{2*−2}(u+φ) φ).

    Raises:
        DegenerateMultiplierError: if the bracket is within 1e-12 of zero.
    """
    p = spec.exponent
    grid = u.grid
    bracket = 1.0 - grid.integrate(critical_nonlinearity(u.values + phi.values, p) * phi.values)
    if abs(bracket) < DEGENERATE_BRACKET:
        raise DegenerateMultiplierError(
            f"multiplier bracket {bracket:.3e} vanishes; Λ is undetermined"
        )
    return value / bracket


def el_residual(u: Profile, phi: Profile, lam: float, spec: ProblemSpec) -> float:
    """Relative interior residual of (−Δ)^r u = Λ |u+φ|^{2*−2}(u+φ).

    Uses the discrete (−Δ)^r that is consistent with ‖·‖ᵣ², measured in L² over
    the nodes outside the boundary layer and normalized by
    |Λ| ‖|u+φ|^{2*−1}‖_{L²} + ‖u‖ᵣ.
    """
    grid = u.grid
    space = discrete_space(grid, spec.r, spec.bc)
    forcing = critical_nonlinearity(u.values + phi.values, spec.exponent)
    residual = space.variational_operator(u.values) - lam * forcing

    mask = interior_mask(grid, boundary_layer(spec.r))
    w = grid.weights[mask]
    num = float(np.sqrt(np.dot(w, residual[mask] ** 2)))
    scale = abs(lam) * float(np.sqrt(np.dot(w, forcing[mask] ** 2)))
    scale += float(np.sqrt(max(hr_seminorm_sq(u, spec.r), 0.0)))
    if scale == 0.0:
        return num
    return num / scale


def energy_multiplier_identity(result: SolveResult, phi: Profile, spec: ProblemSpec) -> float:
    """‖u‖ᵣ² + ⟨u, φ⟩ᵣ, which equals Λ when φ lies in the admissible space."""
    u = result.minimizer
    return hr_seminorm_sq(u, spec.r) + hr_inner(u, phi, spec.r)
