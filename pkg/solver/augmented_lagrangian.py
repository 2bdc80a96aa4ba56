"""
Augmented-Lagrangian solver
===========================

Minimizes ‖u‖ᵣ² over a discrete essential-BC space subject to

    g(u) = ∫_B |u + φ|^{2*} dx − 1 = 0,

working in whitened coordinates z (‖u‖ᵣ² = ‖z‖²). Outer iterations update the
multiplier estimate μ and the penalty ρ of

    F(z) = ‖z‖² − μ g + (ρ/2) g²,

inner iterations minimize F with L-BFGS-B. A few Newton steps on the KKT system
finish each run. The Euler–Lagrange multiplier of
(−Δ)^r u = Λ |u+φ|^{2*−2}(u+φ) is Λ = μ·2*/2.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize

from bubble.profile import BubbleSpec, bubble_profile
from radial.grid import Profile
from radial.operators import (
    BoundaryCondition,
    dirichlet_residual,
    hr_seminorm_sq,
    lp_norm,
    natural_navier_residual,
)
from radial.space import DiscreteSpace, discrete_space
from settings import make_logger
from solver.multiplier import el_residual, lagrange_multiplier_identity
from solver.problem import (
    DegenerateMultiplierError,
    ProblemSpec,
    SolveResult,
    StartRecord,
    critical_nonlinearity,
)

logger = make_logger("solver", "SOLVER")

# ---- Outer-loop constants ----
INITIAL_PENALTY = 10.0
PENALTY_GROWTH = 10.0
MAX_PENALTY = 1e8
SUFFICIENT_DECREASE = 0.25
NEWTON_STEPS = 12
NORM_ONE_TOL = 1e-10
TIE_TOL = 1e-8
DEFAULT_BUBBLE_SCALES = (0.2, 0.4)


class AugmentedLagrangian:
    """F(z; μ, ρ) and its gradient on one discrete space."""

    def __init__(self, space: DiscreteSpace, phi: Profile, p: float):
        self.space = space
        self.phi = np.asarray(phi.values)
        self.p = p
        self.weights = np.asarray(space.grid.weights)
        # Columns are the node values of the whitened basis vectors.
        self.synthesis = space.values_from_z(np.eye(space.dim))

    def values(self, z: np.ndarray) -> np.ndarray:
        return self.synthesis @ z

    def constraint(self, z: np.ndarray) -> Tuple[float, np.ndarray]:
        """g(z) and ∇_z g."""
        v = self.values(z) + self.phi
        g = float(np.dot(self.weights, np.abs(v) ** self.p)) - 1.0
        grad = self.synthesis.T @ (self.p * self.weights * critical_nonlinearity(v, self.p))
        return g, grad

    def constraint_hessian(self, z: np.ndarray) -> np.ndarray:
        v = self.values(z) + self.phi
        diag = self.p * (self.p - 1.0) * self.weights * np.abs(v) ** (self.p - 2.0)
        return (self.synthesis.T * diag) @ self.synthesis

    def __call__(self, z: np.ndarray, mu: float, rho: float) -> Tuple[float, np.ndarray]:
        g, dg = self.constraint(z)
        value = float(np.dot(z, z)) - mu * g + 0.5 * rho * g * g
        grad = 2.0 * z + (rho * g - mu) * dg
        return value, grad

    def kkt_residual(self, z: np.ndarray, mu: float) -> np.ndarray:
        g, dg = self.constraint(z)
        return np.r_[2.0 * z - mu * dg, g]


def _newton_polish(al: AugmentedLagrangian, z: np.ndarray, mu: float) -> Tuple[np.ndarray, float]:
    """Newton iterations on 2z − μ∇g = 0, g = 0 with a residual-decrease safeguard."""
    dim = z.size
    res = al.kkt_residual(z, mu)
    merit = float(np.linalg.norm(res))
    for _ in range(NEWTON_STEPS):
        if merit < 1e-13 * (1.0 + float(np.linalg.norm(z))):
            break
        _, dg = al.constraint(z)
        jac = np.zeros((dim + 1, dim + 1))
        jac[:dim, :dim] = 2.0 * np.eye(dim) - mu * al.constraint_hessian(z)
        jac[:dim, dim] = -dg
        jac[dim, :dim] = dg
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        while t > 1e-4:
            z_try, mu_try = z + t * step[:dim], mu + t * step[dim]
            res_try = al.kkt_residual(z_try, mu_try)
            merit_try = float(np.linalg.norm(res_try))
            if merit_try < merit:
                break
            t *= 0.5
        else:
            break
        z, mu, res, merit = z_try, mu_try, res_try, merit_try
    return z, mu


def _run_start(al: AugmentedLagrangian, z0: np.ndarray, spec: ProblemSpec) -> Tuple[np.ndarray, float, int, bool]:
    """One augmented-Lagrangian run from z0; returns (z, μ, outer iterations, converged)."""
    z, mu, rho = z0.copy(), 0.0, INITIAL_PENALTY
    previous = np.inf
    converged = False
    outer = 0
    for outer in range(1, spec.max_outer + 1):
        res = minimize(
            al,
            z,
            args=(mu, rho),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": spec.max_inner, "ftol": 1e-15, "gtol": spec.gradient_tol, "maxcor": 30},
        )
        z = res.x
        g, _ = al.constraint(z)
        logger.debug(f"outer {outer}: |g|={abs(g):.3e}, μ={mu:.6g}, ρ={rho:.1e}, inner={res.nit}")
        if abs(g) < spec.constraint_tol:
            converged = True
            break
        mu -= rho * g
        if abs(g) > SUFFICIENT_DECREASE * previous:
            rho = min(rho * PENALTY_GROWTH, MAX_PENALTY)
        previous = abs(g)

    z, mu = _newton_polish(al, z, mu)
    g, _ = al.constraint(z)
    return z, mu, outer, converged or abs(g) < spec.constraint_tol


def feasible_scale(direction: np.ndarray, phi: np.ndarray, weights: np.ndarray, p: float) -> Optional[float]:
    """Smallest |c| with ∫|c·d + φ|^p = 1, or None when no sign change is found."""

    def gap(c: float) -> float:
        return float(np.dot(weights, np.abs(c * direction + phi) ** p)) - 1.0

    base = gap(0.0)
    roots = []
    for sign in (1.0, -1.0):
        lo = 0.0
        for hi in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0):
            if gap(sign * hi) * base < 0:
                a, b = sorted((sign * lo, sign * hi))
                roots.append(brentq(gap, a, b, xtol=1e-14))
                break
            lo = hi
    if not roots:
        return None
    return min(roots, key=abs)


def _starts(
    spec: ProblemSpec,
    space: DiscreteSpace,
    al: AugmentedLagrangian,
    bubble_scales: Sequence[float],
) -> List[Tuple[str, np.ndarray]]:
    p = spec.exponent
    phi = al.phi
    starts = [("zero", np.zeros(space.dim))]
    directions = []
    for eps in bubble_scales:
        seed = bubble_profile(BubbleSpec(epsilon=eps, cutoff=1.0), spec.grid, spec.r)
        directions.append((f"bubble(eps={eps:g})", seed.values))
    if lp_norm(spec.phi, p) > 1.0:
        directions.append(("shrink", -phi))
    for label, seed in directions:
        z = space.z_from_values(seed)
        values = space.values_from_z(z)
        norm = float(np.dot(al.weights, np.abs(values) ** p)) ** (1.0 / p)
        if norm == 0.0:
            continue
        values = values / norm
        c = feasible_scale(values, phi, al.weights, p)
        if c is None:
            logger.debug(f"start {label}: no feasible scaling, skipped")
            continue
        starts.append((label, space.z_from_values(c * values)))
    return starts


def _norm_one_result(spec: ProblemSpec, phi_norm: float) -> SolveResult:
    grid = spec.grid
    zero = Profile.zeros(grid)
    logger.info(f"{spec.bc.value}: ‖φ‖={phi_norm:.12g} is 1, u = 0 is the minimizer")
    return SolveResult(
        value=0.0,
        minimizer=zero,
        multiplier=0.0,
        constraint_residual=abs(phi_norm - 1.0),
        el_residual=0.0,
        iterations=0,
        converged=True,
        bc=spec.bc,
        multiplier_identity=None,
        message="‖φ‖ = 1: infimum 0 attained at u = 0, multiplier degenerate",
    )


def _pick(records: List[Tuple[StartRecord, np.ndarray, float]]) -> Tuple[StartRecord, np.ndarray, float]:
    """Lowest value among converged starts; ties keep the smaller L² norm."""
    pool = [rec for rec in records if rec[0].converged] or records
    best = min(rec[0].value for rec in pool)
    ties = [rec for rec in pool if rec[0].value <= best + TIE_TOL * max(1.0, abs(best))]
    return min(ties, key=lambda rec: rec[0].l2_norm)


def solve(spec: ProblemSpec, bubble_scales: Sequence[float] = DEFAULT_BUBBLE_SCALES) -> SolveResult:
    """Compute the constrained infimum of ‖u‖ᵣ² with ‖u + φ‖_{L^{2*r}} = 1.

    Non-convergence after ``spec.max_outer`` outer iterations is reported through
    ``converged=False``; the value is still the best feasible-looking candidate.
    """
    p = spec.exponent
    phi_norm = lp_norm(spec.phi, p)
    if abs(phi_norm - 1.0) < NORM_ONE_TOL:
        return _norm_one_result(spec, phi_norm)

    space = discrete_space(spec.grid, spec.r, spec.bc)
    al = AugmentedLagrangian(space, spec.phi, p)

    records = []
    for label, z0 in _starts(spec, space, al, bubble_scales):
        z, mu, outer, converged = _run_start(al, z0, spec)
        u = Profile(spec.grid, al.values(z))
        value = hr_seminorm_sq(u, spec.r)
        residual = abs(lp_norm(u + spec.phi, p) - 1.0)
        record = StartRecord(
            label=label,
            value=value,
            converged=converged,
            l2_norm=lp_norm(u, 2.0),
            constraint_residual=residual,
            outer_iterations=outer,
        )
        logger.debug(f"start {label}: value={value:.10g}, converged={converged}, outer={outer}")
        records.append((record, z, mu))

    best, z, mu = _pick(records)
    u = Profile(spec.grid, al.values(z))
    value = hr_seminorm_sq(u, spec.r)
    lam = 0.5 * p * mu

    try:
        identity = lagrange_multiplier_identity(u, spec.phi, value, spec)
    except DegenerateMultiplierError as e:
        logger.warning(f"{spec.bc.value}: {e}")
        identity = None

    el = el_residual(u, spec.phi, lam, spec)
    converged = best.converged and best.constraint_residual < spec.constraint_tol and el < spec.el_tol
    message = ""
    if not best.converged:
        message = f"constraint not met after {spec.max_outer} outer iterations"
    elif el >= spec.el_tol:
        message = f"Euler–Lagrange residual {el:.2e} above {spec.el_tol:.1e}"
    if identity is not None and lam != 0.0 and abs(identity - lam) > 0.01 * abs(lam):
        logger.warning(
            f"{spec.bc.value}: multiplier estimate {lam:.8g} and identity {identity:.8g} differ by more than 1%"
        )

    natural = natural_navier_residual(u, spec.r) if spec.bc is BoundaryCondition.NAVIER else 0.0
    result = SolveResult(
        value=value,
        minimizer=u,
        multiplier=lam,
        constraint_residual=best.constraint_residual,
        el_residual=el,
        iterations=best.outer_iterations,
        converged=converged,
        bc=spec.bc,
        multiplier_identity=identity,
        natural_bc_residual=natural,
        dirichlet_bc_residual=dirichlet_residual(u, spec.r),
        starts=[rec[0] for rec in records],
        message=message,
    )
    level = logger.info if converged else logger.warning
    level(
        f"{spec.bc.value} N={spec.N} r={spec.r} ‖φ‖={phi_norm:.4g} n={spec.grid.size}: "
        f"value={value:.10g}, Λ={lam:.8g}, el={el:.2e}, converged={converged}"
    )
    return result
