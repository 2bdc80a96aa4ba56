"""Best-Sobolev-constant estimates and the bounds built on them."""

from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from bubble.profile import BubbleSpec, bubble_profile
from radial.grid import Profile, RadialGrid, make_radial_grid, resolvable_epsilon
from radial.operators import BoundaryCondition, critical_exponent, hr_seminorm_sq, lp_norm
from radial.space import discrete_space
from settings import make_logger
from solver.augmented_lagrangian import feasible_scale
from solver.problem import ProblemError, ProblemSpec, SobolevConstant, critical_nonlinearity

logger = make_logger("solver", "SOLVER")


def quotient(u: Profile, r: int) -> float:
    """‖u‖ᵣ² / ‖u‖²_{L^{2*r}}."""
    p = critical_exponent(u.grid.dimension, r)
    return hr_seminorm_sq(u, r) / lp_norm(u, p) ** 2


# Finest concentration scale admitted on a grid, in multiples of its minimum spacing.
RESOLVED_FACTOR = 10.0

# Largest bubble scale in the trial space.
LARGEST_SCALE = 0.5


def bubble_scales(grid: RadialGrid) -> np.ndarray:
    """Scales ε_min·2^k ≤ 0.5 of the trial bubbles, ε_min = 10 × min spacing."""
    floor = resolvable_epsilon(grid, RESOLVED_FACTOR)
    count = max(int(np.floor(np.log2(LARGEST_SCALE / floor))) + 1, 1)
    return floor * 2.0 ** np.arange(count)


def resolved_trial_space(grid: RadialGrid, r: int) -> np.ndarray:
    """Node-value synthesis matrix of the resolved subspace of the Dirichlet space.

    Columns span the cut-off bubbles at ``bubble_scales(grid)`` projected onto
    the discrete Dirichlet space, orthonormalized in ⟨·,·⟩ᵣ, so that
    ‖synthesis @ y‖ᵣ = |y|. Nothing in the span concentrates below the
    resolvable scale.
    """
    space = discrete_space(grid, r, BoundaryCondition.DIRICHLET)
    columns = [
        space.z_from_values(bubble_profile(BubbleSpec(epsilon=float(eps), cutoff=1.0), grid, r).values)
        for eps in bubble_scales(grid)
    ]
    orth, tri = np.linalg.qr(np.column_stack(columns))
    keep = np.abs(np.diag(tri)) > 1e-10 * np.max(np.abs(np.diag(tri)))
    return space.values_from_z(orth[:, keep])


def _minimize_quotient(grid: RadialGrid, r: int, max_iter: int) -> float:
    p = critical_exponent(grid.dimension, r)
    w = np.asarray(grid.weights)
    synthesis = resolved_trial_space(grid, r)

    def log_quotient(y: np.ndarray):
        u = synthesis @ y
        energy = float(np.dot(y, y))
        mass = float(np.dot(w, np.abs(u) ** p))
        grad = 2.0 * y / energy - 2.0 * (synthesis.T @ (w * critical_nonlinearity(u, p))) / mass
        return np.log(energy) - (2.0 / p) * np.log(mass), grad

    # the finest bubble is the first column
    y0 = np.zeros(synthesis.shape[1])
    y0[0] = 1.0
    res = minimize(
        log_quotient,
        y0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": 1e-15, "gtol": 1e-12},
    )
    if not res.success:
        logger.warning(f"Sobolev quotient minimization on n={grid.size}: {res.message}")
    return float(np.exp(res.fun))


def sobolev_constant_estimate(
    N: int,
    r: int,
    levels: Sequence[int],
    kind: str = "uniform",
    max_iter: int = 5000,
) -> SobolevConstant:
    """Minimize the Sobolev quotient over the resolved Dirichlet subspace per level.

    On a fixed grid the unrestricted discrete infimum concentrates at the
    mesh scale and falls below S_r, so each level minimizes over the span of
    bubbles no narrower than its resolvable scale ε_min. The continuum
    infimum is not attained on the ball, so level values approach S_r from
    above like S_r + c·ε_min^{N−2r}. The estimate is a Richardson
    extrapolation in ε_min with that exponent; it falls back to the finest
    level value when the extrapolation is not positive or exceeds it.
    """
    if N <= 2 * r:
        raise ProblemError(f"need N > 2r, got N={N}, r={r}")
    if not levels:
        raise ProblemError("at least one grid level is required")
    levels = sorted(int(n) for n in levels)
    values, scales = [], []
    for n in levels:
        grid = make_radial_grid(N, n, kind)
        values.append(_minimize_quotient(grid, r, max_iter))
        scales.append(float(bubble_scales(grid)[0]))
        logger.info(f"Sobolev quotient N={N} r={r} n={n} ε_min={scales[-1]:.4g}: {values[-1]:.10g}")

    estimate, extrapolated = values[-1], False
    if len(values) >= 2:
        q = float(N - 2 * r)
        e_f, e_c = scales[-1], scales[-2]
        guess = (values[-1] * e_c ** q - values[-2] * e_f ** q) / (e_c ** q - e_f ** q)
        if 0.0 < guess <= values[-1]:
            estimate, extrapolated = guess, True
    return SobolevConstant(
        N=N,
        r=r,
        estimate=estimate,
        levels=levels,
        level_values=values,
        extrapolated=extrapolated,
        scales=scales,
    )


def eps_upper_bound(phi: Profile, sob: SobolevConstant, spec: ProblemSpec) -> float:
    """Ŝ_r (1 − ‖φ‖^{2*r})^{(N−2r)/N}, the concentration upper bound on S_θ(φ)."""
    p = spec.exponent
    norm = lp_norm(phi, p)
    if norm >= 1.0:
        raise ProblemError(f"the upper bound needs ‖φ‖ < 1, got {norm:.6g}")
    return sob.estimate * (1.0 - norm ** p) ** ((spec.N - 2 * spec.r) / spec.N)


def bubble_competitor_bound(
    phi: Profile,
    sob: SobolevConstant,
    spec: ProblemSpec,
    epsilons: Sequence[float] = (0.4, 0.2, 0.1),
) -> List[dict]:
    """Energies c²‖u_ε‖ᵣ² of the feasible competitors φ + c·u_ε.

    Only scales the grid resolves are used; each row also carries the upper
    bound the competitors approach from above as ε shrinks.
    """
    grid = spec.grid
    p = spec.exponent
    bound = eps_upper_bound(phi, sob, spec)
    space = discrete_space(grid, spec.r, spec.bc)
    rows = []
    for eps in sorted(epsilons, reverse=True):
        if eps < resolvable_epsilon(grid):
            continue
        seed = bubble_profile(BubbleSpec(epsilon=eps, cutoff=1.0), grid, spec.r)
        direction = space.basis @ space.coeffs(seed)
        c = feasible_scale(direction, np.asarray(phi.values), np.asarray(grid.weights), p)
        if c is None:
            continue
        value = c * c * hr_seminorm_sq(Profile(grid, direction), spec.r)
        rows.append({"epsilon": eps, "scale": c, "value": value, "bound": bound})
    return rows


def deficit_bound(u: Profile, phi: Profile, sob: SobolevConstant, spec: ProblemSpec, samples: int = 21) -> Optional[float]:
    """Worst slack of S_θ − ‖s·u‖ᵣ² ≤ Ŝ_r [1 − ‖s·u + φ‖^{2*r}]^{2/2*r} over s ∈ [0, 1].

    S_θ is taken as ‖u‖ᵣ² of the given minimizer; values of s where
    ‖s·u + φ‖ ≥ 1 are skipped. Returns None when no s qualifies.
    """
    p = spec.exponent
    top = hr_seminorm_sq(u, spec.r)
    worst = None
    for s in np.linspace(0.0, 1.0, samples):
        v = u.scaled(float(s))
        mass = lp_norm(v + phi, p) ** p
        if mass >= 1.0:
            continue
        slack = sob.estimate * (1.0 - mass) ** (2.0 / p) - (top - hr_seminorm_sq(v, spec.r))
        worst = slack if worst is None else min(worst, slack)
    return worst


def multiplier_lower_bound(phi: Profile, value: float, spec: ProblemSpec) -> float:
    """S_θ(φ) / (1 − ‖φ‖^{2*r})^{1/2*r}, a lower bound on Λ for ‖φ‖ < 1.

    Equivalently ⟨u, φ⟩ᵣ = Λ − S_θ ≥ Λ [1 − (1 − ‖φ‖^{2*r})^{(N−2r)/2N}].
    """
    p = spec.exponent
    norm = lp_norm(phi, p)
    if norm >= 1.0:
        raise ProblemError(f"the multiplier bound needs ‖φ‖ < 1, got {norm:.6g}")
    return value / (1.0 - norm ** p) ** (1.0 / p)
