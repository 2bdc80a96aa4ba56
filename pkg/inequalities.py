"""Scalar inequalities and the function h(t) used in the multiplier-sign argument."""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from radial.grid import Profile
from radial.operators import hr_seminorm_sq
from settings import make_logger
from solver.problem import ProblemSpec, SolveResult, critical_nonlinearity

logger = make_logger("inequalities", "INEQUALITY")

ArrayLike = Union[float, np.ndarray]

# Defects are compared against −POWER_TOL·max(1, (x+y)^p).
POWER_TOL = 1e-12


class DomainError(ValueError):
    """Raised when arguments leave an inequality's domain."""


@dataclass
class InequalityReport:
    samples: int
    violations: int
    worst_defect: float
    worst_location: Tuple[float, ...]
    constant_estimate: Optional[float] = None


def power_inequality_defect(x: ArrayLike, y: ArrayLike, p: ArrayLike) -> ArrayLike:
    """(x+y)^p − x^p − y^p − p x^{p−1} y − p x y^{p−1} for x, y ≥ 0 and p ≥ 3."""
    xa, ya, pa = np.asarray(x, float), np.asarray(y, float), np.asarray(p, float)
    if np.any(xa < 0) or np.any(ya < 0):
        raise DomainError("the power inequality needs x, y >= 0")
    if np.any(pa < 3):
        raise DomainError("the power inequality needs p >= 3")
    out = (xa + ya) ** pa - xa ** pa - ya ** pa - pa * xa ** (pa - 1) * ya - pa * xa * ya ** (pa - 1)
    return float(out) if out.ndim == 0 else out


def bn_lemma_defect(x: ArrayLike, y: ArrayLike, p: float) -> Tuple[ArrayLike, ArrayLike]:
    """Left side and C = 1 majorant of the two-term expansion bound for |x+y|^p.

    lhs = | |x+y|^p − |x|^p − |y|^p − p x y (|x|^{p−2} + |y|^{p−2}) |,
    bound = |x|^{p−1}|y| if |x| ≤ |y|, else |x||y|^{p−1}.
    """
    if p <= 2:
        raise DomainError(f"the expansion bound needs p > 2, got {p}")
    xa, ya = np.asarray(x, float), np.asarray(y, float)
    ax, ay = np.abs(xa), np.abs(ya)
    lhs = np.abs(
        np.abs(xa + ya) ** p - ax ** p - ay ** p - p * xa * ya * (ax ** (p - 2) + ay ** (p - 2))
    )
    bound = np.where(ax <= ay, ax ** (p - 1) * ay, ax * ay ** (p - 1))
    if lhs.ndim == 0:
        return float(lhs), float(bound)
    return lhs, bound


def power_inequality_sweep(
    n_samples: int = 10_000,
    seed: int = 0,
    p_range: Tuple[float, float] = (3.0, 6.0),
    box: float = 10.0,
) -> InequalityReport:
    """Random (x, y) ∈ [0, box]², p ∈ p_range plus the edges x = 0, y = 0 and x = y."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, box, n_samples)
    y = rng.uniform(0.0, box, n_samples)
    p = rng.uniform(*p_range, n_samples)
    edge = np.linspace(0.0, box, 51)
    edge_p = np.linspace(*p_range, 51)
    x = np.r_[x, edge, np.zeros(51), edge]
    y = np.r_[y, np.zeros(51), edge, edge]
    p = np.r_[p, edge_p, edge_p, edge_p]

    defect = power_inequality_defect(x, y, p)
    scale = np.maximum(1.0, (x + y) ** p)
    relative = defect / scale
    worst = int(np.argmin(relative))
    violations = int(np.sum(relative < -POWER_TOL))
    if violations:
        logger.warning(f"power inequality violated at {violations} of {x.size} samples")
    return InequalityReport(
        samples=int(x.size),
        violations=violations,
        worst_defect=float(defect[worst]),
        worst_location=(float(x[worst]), float(y[worst]), float(p[worst])),
    )


def lemma_constant_estimate(p: float, n_samples: int = 100_000, seed: int = 0, box: float = 5.0) -> InequalityReport:
    """Empirical Ĉ(p) = max lhs/bound over random (x, y) ∈ [−box, box]².

    The ratio is 0-homogeneous; for p > 3 it is unbounded as |x|/|y| → 0, so
    estimates are meaningful on (2, 3].
    """
    if p > 3:
        logger.warning(f"p={p} > 3: the expansion constant is not bounded")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-box, box, n_samples)
    y = rng.uniform(-box, box, n_samples)
    lhs, bound = bn_lemma_defect(x, y, p)
    keep = bound > 0
    ratio = lhs[keep] / bound[keep]
    worst = int(np.argmax(ratio))
    return InequalityReport(
        samples=int(keep.sum()),
        violations=int(np.sum(ratio > 1.0)),
        worst_defect=float(ratio[worst]),
        worst_location=(float(x[keep][worst]), float(y[keep][worst])),
        constant_estimate=float(ratio[worst]),
    )


def h_function(t: float, u: Profile, phi: Profile, spec: ProblemSpec) -> Tuple[float, float]:
    """h(t) = ∫|t u + φ|^{2*r} and h′(t) = 2*r ∫|t u + φ|^{2*r−2}(t u + φ) u."""
    p = spec.exponent
    grid = u.grid
    v = t * u.values + phi.values
    h = grid.integrate(np.abs(v) ** p)
    hprime = p * grid.integrate(critical_nonlinearity(v, p) * u.values)
    return h, hprime


def h_convexity_defect(u: Profile, phi: Profile, spec: ProblemSpec, ts: Optional[Sequence[float]] = None) -> float:
    """Smallest second difference of h over an equispaced t grid (≥ 0 when h is convex)."""
    ts = np.linspace(-1.0, 2.0, 31) if ts is None else np.asarray(ts, float)
    values = np.array([h_function(float(t), u, phi, spec)[0] for t in ts])
    return float(np.min(values[2:] - 2.0 * values[1:-1] + values[:-2]))


def energy_identity_check(result: SolveResult, phi: Profile, spec: ProblemSpec) -> Tuple[float, float, float]:
    """‖u‖ᵣ² against (Λ/2*r)·h′(1); returns (lhs, rhs, relative error)."""
    u = result.minimizer
    lhs = hr_seminorm_sq(u, spec.r)
    _, hprime = h_function(1.0, u, phi, spec)
    rhs = result.multiplier / spec.exponent * hprime
    denom = max(abs(lhs), abs(rhs))
    return lhs, rhs, (abs(lhs - rhs) / denom if denom > 0 else 0.0)
