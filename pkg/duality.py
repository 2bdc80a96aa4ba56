"""
Convex duality for the regime ‖φ‖_{L^{2*r}} > 1
================================================

With E the energy map (‖u‖ᵣ² = Σ w (Eu)²) the Lagrangian is

    L(u, p) = −½ ‖p‖² − ⟨E u, p⟩_w,

whose supremum over p is ½‖u‖ᵣ², attained at p = −E u. A dual variable p
induces the representer p̃ = W⁻¹ Eᵀ (w p), so that ⟨E u, p⟩_w = ∫ p̃ u. The
dual objective is −½‖p‖² − β(p) with

    β(p) = sup { ∫ p̃ u : u admissible, ‖u + φ‖_{L^{2*r}} ≤ 1 }.

On the grid, p̃ is only determined up to multiples of W⁻¹Cᵀ (C the essential
boundary rows), which pair to zero with admissible u. β is the Hölder value
‖p̃‖_{q′} − ∫ p̃ φ minimized over that class, so boundary terms never enter.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from radial.grid import Profile, RadialGrid, interior_mask
from radial.operators import (
    BoundaryCondition,
    bc_basis,
    conjugate_exponent,
    constraint_matrix,
    critical_exponent,
    energy_operator,
    enforce_bc,
    hr_seminorm_sq,
    lp_norm,
)
from radial.space import discrete_space
from settings import make_logger
from solver.multiplier import boundary_layer
from solver.problem import ProblemError, ProblemSpec, SolveResult, critical_nonlinearity

logger = make_logger("duality", "DUALITY")

WEAK_DUALITY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class DualPoint:
    """Dual variable p on the range of the energy map (nodes for even r, faces for odd r)."""

    grid: RadialGrid
    r: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        op, _ = energy_operator(self.grid, self.r)
        values = np.array(self.values, dtype=float)
        if values.shape != (op.shape[0],):
            raise ProblemError(f"dual point needs {op.shape[0]} values, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise ProblemError("dual point values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def witness(cls, u: Profile, r: int) -> "DualPoint":
        """p_θ = −E u."""
        op, _ = energy_operator(u.grid, r)
        return cls(u.grid, r, -(op @ u.values))

    @classmethod
    def from_potential(cls, psi: Profile, r: int) -> "DualPoint":
        op, _ = energy_operator(psi.grid, r)
        return cls(psi.grid, r, op @ psi.values)

    @classmethod
    def zeros(cls, grid: RadialGrid, r: int) -> "DualPoint":
        op, _ = energy_operator(grid, r)
        return cls(grid, r, np.zeros(op.shape[0]))

    @property
    def weights(self) -> np.ndarray:
        return energy_operator(self.grid, self.r)[1]

    @property
    def representer(self) -> Profile:
        op, w = energy_operator(self.grid, self.r)
        return Profile(self.grid, (op.T @ (w * self.values)) / self.grid.weights)

    def scaled(self, factor: float) -> "DualPoint":
        return DualPoint(self.grid, self.r, factor * self.values)

    def sq_norm(self) -> float:
        return float(np.dot(self.weights, self.values ** 2))


@dataclass
class BetaPair:
    closed_theta: float
    closed_zero: float
    direct_theta: float
    direct_zero: float


@dataclass
class DualReport:
    """Duality diagnostics at the Navier witness p_θ = −E u_θ."""

    dual_value: float
    primal_value: float
    gap: float
    beta_theta: float
    beta_zero: float
    relative_gap: float = 0.0
    weak_duality_samples: int = 0
    weak_duality_violations: int = 0
    worst_weak_margin: float = -np.inf
    holder_attainment_error: float = 0.0
    beta_direct_theta: Optional[float] = None
    beta_direct_zero: Optional[float] = None
    la_lhs: float = 0.0
    la_rhs: float = 0.0
    la_error: float = 0.0
    notes: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict[str, object]:
        return dict(vars(self))


# ---------------------------------------------------------------------------
# Hölder dual
# ---------------------------------------------------------------------------

def _lq(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    return float(np.dot(weights, np.abs(values) ** q)) ** (1.0 / q)


def holder_dual_sup(ptilde: Profile, q: float) -> Tuple[float, float]:
    """sup {∫ p̃ v : ‖v‖_{L^q} ≤ 1} = ‖p̃‖_{L^{q′}}.

    Returns the closed form and the value attained by the explicit maximizer
    v* ∝ sign(p̃)|p̃|^{q′−1}.
    """
    if q <= 1:
        raise ProblemError(f"Hölder exponent must exceed 1, got {q}")
    qc = q / (q - 1.0)
    closed = lp_norm(ptilde, qc)
    if closed == 0.0:
        return 0.0, 0.0
    grid = ptilde.grid
    v = np.sign(ptilde.values) * np.abs(ptilde.values) ** (qc - 1.0)
    v = v / _lq(v, grid.weights, q)
    return closed, grid.integrate(ptilde.values * v)


def holder_maximizer(ptilde: Profile, q: float) -> Profile:
    qc = q / (q - 1.0)
    v = np.sign(ptilde.values) * np.abs(ptilde.values) ** (qc - 1.0)
    norm = _lq(v, ptilde.grid.weights, q)
    return Profile(ptilde.grid, v / norm if norm > 0 else v)


# ---------------------------------------------------------------------------
# Lagrangian and dual objective
# ---------------------------------------------------------------------------

def lagrangian(u: Profile, p: DualPoint, spec: ProblemSpec) -> float:
    """L(u, p) = −½‖p‖² − ⟨E u, p⟩_w."""
    op, w = energy_operator(u.grid, spec.r)
    return -0.5 * p.sq_norm() - float(np.dot(w, (op @ u.values) * p.values))


def maximize_lagrangian(u: Profile, spec: ProblemSpec) -> Tuple[float, DualPoint]:
    """sup_p L(u, p) by L-BFGS in the scaled variable √w·p."""
    op, w = energy_operator(u.grid, spec.r)
    root = np.sqrt(w)
    field_values = root * (op @ u.values)

    def negative(x: np.ndarray):
        return 0.5 * float(np.dot(x, x)) + float(np.dot(field_values, x)), x + field_values

    res = minimize(
        negative,
        np.zeros_like(field_values),
        jac=True,
        method="L-BFGS-B",
        options={"gtol": 1e-14, "ftol": 1e-16, "maxiter": 200},
    )
    return -float(res.fun), DualPoint(u.grid, spec.r, res.x / root)


def closed_form_beta(ptilde: Profile, phi: Profile, spec: ProblemSpec) -> float:
    """‖p̃‖_{q′} − ∫ p̃ φ, the same for both boundary families."""
    value, _ = holder_dual_sup(ptilde, spec.exponent)
    return value - ptilde.grid.integrate(ptilde.values * phi.values)


def beta_value(p: DualPoint, phi: Profile, spec: ProblemSpec, bc: Optional[BoundaryCondition] = None) -> float:
    """β(p) over the discrete ``bc`` space: the Hölder value minimized over boundary shifts of p̃."""
    bc = bc or spec.bc
    grid = p.grid
    qc = conjugate_exponent(spec.N, spec.r)
    weights = np.asarray(grid.weights)
    base = p.representer.values
    phi_values = np.asarray(phi.values)
    shifts = (constraint_matrix(grid, spec.r, bc) / weights).T

    def h(x: np.ndarray) -> float:
        return _lq(x, weights, qc) - float(np.dot(weights, x * phi_values))

    unshifted = h(base)
    norm = _lq(base, weights, qc)
    col_norms = np.array([_lq(shifts[:, k], weights, qc) for k in range(shifts.shape[1])])
    scale = (norm if norm > 0 else 1.0) / col_norms
    cols = shifts * scale

    def objective(a: np.ndarray):
        x = base - cols @ a
        nx = _lq(x, weights, qc)
        d_norm = np.zeros_like(x)
        if nx > 0:
            d_norm = weights * np.sign(x) * np.abs(x) ** (qc - 1.0) * nx ** (1.0 - qc)
        value = nx - float(np.dot(weights, x * phi_values))
        grad = -cols.T @ d_norm + cols.T @ (weights * phi_values)
        return value, grad

    res = minimize(objective, np.zeros(cols.shape[1]), jac=True, method="L-BFGS-B",
                   options={"gtol": 1e-14, "ftol": 1e-16, "maxiter": 500})
    return min(unshifted, float(res.fun))


def dual_objective(p: DualPoint, phi: Profile, spec: ProblemSpec) -> float:
    """−½‖p‖² − β(p)."""
    return -0.5 * p.sq_norm() - beta_value(p, phi, spec)


def _direct_sup(ptilde: Profile, r: int, bc: BoundaryCondition, q: float) -> float:
    """sup over the discrete ``bc`` space of ∫ p̃ v / ‖v‖_{L^q}, by L-BFGS."""
    grid = ptilde.grid
    if not np.any(ptilde.values):
        return 0.0
    basis = bc_basis(grid, r, bc)
    weights = np.asarray(grid.weights)
    target = basis.T @ (weights * ptilde.values)

    def negative_ratio(c: np.ndarray):
        v = basis @ c
        nv = _lq(v, weights, q)
        pairing = float(np.dot(target, c))
        d_norm = nv ** (1.0 - q) * (basis.T @ (weights * critical_nonlinearity(v, q)))
        grad = -(target * nv - pairing * d_norm) / nv ** 2
        return -pairing / nv, grad

    c0 = basis.T @ holder_maximizer(ptilde, q).values
    res = minimize(negative_ratio, c0, jac=True, method="L-BFGS-B",
                   options={"gtol": 1e-12, "ftol": 1e-15, "maxiter": 2000})
    return -float(res.fun)


def beta_pair(p: DualPoint, phi: Profile, spec: ProblemSpec) -> BetaPair:
    """β_θ and β₀ in closed form (identical) and by direct maximization over each space.

    The direct estimates assume φ lies in both discrete spaces, so that u + φ
    ranges over the space itself.
    """
    ptilde = p.representer
    closed = closed_form_beta(ptilde, phi, spec)
    pairing = ptilde.grid.integrate(ptilde.values * phi.values)
    q = spec.exponent
    return BetaPair(
        closed_theta=closed,
        closed_zero=closed,
        direct_theta=_direct_sup(ptilde, spec.r, BoundaryCondition.NAVIER, q) - pairing,
        direct_zero=_direct_sup(ptilde, spec.r, BoundaryCondition.DIRICHLET, q) - pairing,
    )


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def random_dual_points(spec: ProblemSpec, count: int, seed: int, magnitudes: Tuple[float, float] = (-5.0, 4.0)) -> List[DualPoint]:
    """Smooth Navier-compatible dual points E ψ with log-uniform magnitudes."""
    rng = np.random.default_rng(seed)
    grid = spec.grid
    rho = grid.nodes
    modes = [
        enforce_bc(Profile(grid, (1.0 - rho ** 2) * rho ** (2 * k)), spec.r, BoundaryCondition.NAVIER)
        for k in range(5)
    ]
    points = []
    for _ in range(count):
        coeffs = rng.standard_normal(len(modes))
        psi = Profile(grid, sum(c * m.values for c, m in zip(coeffs, modes)))
        p = DualPoint.from_potential(psi, spec.r)
        norm = np.sqrt(p.sq_norm())
        if norm == 0.0:
            continue
        points.append(p.scaled(10.0 ** rng.uniform(*magnitudes) / norm))
    return points


def la_check(result: SolveResult, spec: ProblemSpec) -> Tuple[float, float]:
    """(‖(−Δ)^r u‖_{L^{q′}} over the interior, |Λ|)."""
    u = result.minimizer
    grid = u.grid
    space = discrete_space(grid, spec.r, spec.bc)
    mask = interior_mask(grid, boundary_layer(spec.r))
    lhs = _lq(space.variational_operator(u.values)[mask], grid.weights[mask], spec.conjugate)
    return lhs, abs(result.multiplier)


def inequality_reformulation_check(spec: ProblemSpec, result: SolveResult, samples: int = 21) -> Dict[str, object]:
    """Equality and inequality constrained infima coincide for ‖φ‖ > 1.

    The minimizer u is feasible for ‖u + φ‖ ≤ 1, and along the segment from u
    to −Pφ (P the projection onto the admissible space) every point stays
    feasible while the energy never drops below ‖u‖ᵣ².
    """
    p = spec.exponent
    phi = spec.phi
    if lp_norm(phi, p) <= 1.0:
        raise ProblemError("the inequality reformulation is stated for ‖φ‖ > 1")
    u = result.minimizer
    target = enforce_bc(phi, spec.r, spec.bc).scaled(-1.0)
    base = hr_seminorm_sq(u, spec.r)
    worst_drop, max_norm = 0.0, 0.0
    for t in np.linspace(0.0, 1.0, samples)[1:]:
        w = u.scaled(1.0 - t) + target.scaled(float(t))
        max_norm = max(max_norm, lp_norm(w + phi, p))
        worst_drop = max(worst_drop, base - hr_seminorm_sq(w, spec.r))
    phi_in_space = float(np.max(np.abs(target.values + phi.values))) < 1e-10 * max(1.0, float(np.max(np.abs(phi.values))))
    return {
        "feasible": lp_norm(u + phi, p) <= 1.0 + spec.constraint_tol,
        "segment_max_norm": max_norm,
        "segment_feasible": max_norm <= 1.0 + spec.constraint_tol,
        "worst_energy_drop": worst_drop,
        "energy_monotone": worst_drop <= 1e-10 * max(1.0, base),
        "phi_in_space": phi_in_space,
    }


def dual_report(spec: ProblemSpec, result: SolveResult, n_random: int = 200, seed: int = 0) -> DualReport:
    """Weak duality sweep, witness gap, Hölder attainment, β-pair and the (−Δ)^r u vs |Λ| check."""
    phi = spec.phi
    p_exp = critical_exponent(spec.N, spec.r)
    if lp_norm(phi, p_exp) <= 1.0:
        raise ProblemError("the duality report covers the regime ‖φ‖ > 1")
    primal = result.value
    witness = DualPoint.witness(result.minimizer, spec.r)
    dual = dual_objective(witness, phi, spec)
    gap = 0.5 * primal - dual
    rel_gap = gap / (0.5 * primal) if primal > 0 else abs(gap)

    violations, worst = 0, -np.inf
    points = random_dual_points(spec, n_random, seed)
    for p in points:
        margin = dual_objective(p, phi, spec) - 0.5 * primal
        worst = max(worst, margin)
        if margin > WEAK_DUALITY_TOL:
            violations += 1

    closed, attained = holder_dual_sup(witness.representer, p_exp)
    holder_err = abs(closed - attained) / closed if closed > 0 else 0.0
    betas = beta_pair(witness, phi, spec)
    lhs, rhs = la_check(result, spec)

    report = DualReport(
        dual_value=dual,
        primal_value=primal,
        gap=gap,
        beta_theta=betas.closed_theta,
        beta_zero=betas.closed_zero,
        relative_gap=rel_gap,
        weak_duality_samples=len(points),
        weak_duality_violations=violations,
        worst_weak_margin=worst,
        holder_attainment_error=holder_err,
        beta_direct_theta=betas.direct_theta,
        beta_direct_zero=betas.direct_zero,
        la_lhs=lhs,
        la_rhs=rhs,
        la_error=abs(lhs - rhs) / rhs if rhs > 0 else lhs,
    )
    if gap < -WEAK_DUALITY_TOL:
        report.notes.append(f"negative duality gap {gap:.3e}")
    logger.info(
        f"N={spec.N} r={spec.r}: dual={dual:.10g}, ½primal={0.5 * primal:.10g}, "
        f"relative gap={rel_gap:.2e}, weak-duality violations={violations}/{len(points)}"
    )
    return report
