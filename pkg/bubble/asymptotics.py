"""ε-asymptotics of bubble norms, the oracle comparison and the constant D."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import beta

from bubble.profile import BubbleSpec, bubble_polyharmonic, bubble_profile
from radial.grid import RadialGrid, resolvable_epsilon, sphere_area
from radial.operators import critical_exponent, hr_seminorm_sq, iterated_laplacian, lp_norm
from settings import make_logger

logger = make_logger("bubble", "BUBBLE")


class UnderResolvedError(ValueError):
    """Raised when a bubble scale is below what the grid can resolve."""


def constant_D_integral(N: int, r: int) -> float:
    """ω_{N−1} ∫₀^∞ ρ^{N−1} (1 + ρ²)^{−(N+2r)/2} dρ by adaptive quadrature."""
    if N < 1 or r < 1:
        raise ValueError(f"constant D needs N >= 1 and r >= 1, got N={N}, r={r}")
    value, err = quad(
        lambda rho: rho ** (N - 1) * (1.0 + rho * rho) ** (-(N + 2 * r) / 2.0),
        0.0,
        np.inf,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    if err > 1e-8:
        logger.warning(f"constant D quadrature error estimate {err:.2e} for N={N}, r={r}")
    return sphere_area(N) * value


def constant_D_beta(N: int, r: int) -> float:
    """Beta-function value B(N/2, r)·ω_{N−1}/2 of the same integral."""
    return float(beta(N / 2.0, r)) * sphere_area(N) / 2.0


# ---------------------------------------------------------------------------
# Oracle comparison
# ---------------------------------------------------------------------------

def closed_form_errors(
    grid: RadialGrid,
    r: int,
    epsilon: float,
    window: Tuple[float, float] = (0.05, 0.8),
    variant: str = "corrected",
) -> Dict[int, float]:
    """Normwise relative error of the closed form against the finite-difference
    iterated Laplacian of the pure bubble, per j = 1..r, on the window."""
    N = grid.dimension
    spec = BubbleSpec(epsilon=epsilon)
    u = bubble_profile(spec, grid, r)
    mask = (grid.nodes >= window[0]) & (grid.nodes <= window[1])
    errors = {}
    for j in range(1, r + 1):
        fd = iterated_laplacian(u, j).values[mask]
        closed = bubble_polyharmonic(spec, N, r, j, grid.nodes[mask], variant=variant)
        errors[j] = float(np.max(np.abs(fd - closed)) / np.max(np.abs(fd)))
    return errors


# ---------------------------------------------------------------------------
# Norm asymptotics
# ---------------------------------------------------------------------------

@dataclass
class BubbleNormReport:
    """Per-ε norms of the bubble with extrapolated limits.

    ``K_hat`` is the two-point Richardson limit in ε^{N−2r}, ``K_hat_structured``
    the least-squares limit of K + ε^{N−2r}(c₁ + c₂ε²) and ``K_hat_free`` the
    limit of the free-exponent fit whose exponent is ``exponent``. With a
    cutoff, ``cutoff_excess`` holds the seminorm minus that of the uncut bubble
    and ``cutoff_rate`` its fitted decay exponent.
    """

    N: int
    r: int
    epsilons: List[float]
    seminorm_sq: List[float]
    lp_sq: List[float]
    K_hat: float
    K_hat_structured: float
    K_hat_free: float
    exponent: float
    lp_limit: float
    sobolev_ratio: float
    lp_drift: float
    cutoff: Optional[float] = None
    cutoff_excess: List[float] = field(default_factory=list)
    cutoff_rate: float = math.nan
    notes: List[str] = field(default_factory=list)

    @property
    def extrapolation_spread(self) -> float:
        """Relative distance between the Richardson and structured limits."""
        return abs(self.K_hat - self.K_hat_structured) / abs(self.K_hat_structured)


def richardson(eps: Sequence[float], values: Sequence[float], q: float) -> float:
    """Two-point extrapolation of v(ε) = L + c ε^q from the two smallest ε."""
    order = np.argsort(eps)
    e_f, e_c = eps[order[0]], eps[order[1]]
    v_f, v_c = values[order[0]], values[order[1]]
    return (v_f * e_c ** q - v_c * e_f ** q) / (e_c ** q - e_f ** q)


def structured_limit(eps: Sequence[float], values: Sequence[float], q: float) -> float:
    """Least-squares limit L of v(ε) = L + ε^q (c₁ + c₂ ε²); needs three ε."""
    e = np.asarray(eps, dtype=float)
    if e.size < 3:
        return math.nan
    design = np.column_stack([np.ones_like(e), e ** q, e ** (q + 2.0)])
    coeffs, *_ = np.linalg.lstsq(design, np.asarray(values, dtype=float), rcond=None)
    return float(coeffs[0])


def fit_exponent(eps: Sequence[float], values: Sequence[float]) -> Tuple[float, float]:
    """Free-exponent fit of v(ε) = L + c ε^q through the three smallest ε.

    Returns (L, q); (nan, nan) when the differences do not bracket a root.
    """
    order = np.argsort(eps)[:3][::-1]
    e0, e1, e2 = (float(eps[k]) for k in order)
    v0, v1, v2 = (float(values[k]) for k in order)
    d01, d12 = v0 - v1, v1 - v2
    if d12 == 0 or d01 / d12 <= 0:
        return math.nan, math.nan
    target = d01 / d12

    def mismatch(q: float) -> float:
        return (e0 ** q - e1 ** q) / (e1 ** q - e2 ** q) - target

    lo, hi = 1e-3, 30.0
    if mismatch(lo) * mismatch(hi) > 0:
        return math.nan, math.nan
    q = brentq(mismatch, lo, hi, xtol=1e-12)
    c = d12 / (e1 ** q - e2 ** q)
    return v2 - c * e2 ** q, q


def _decay_rate(eps: Sequence[float], values: Sequence[float]) -> float:
    """Exponent of |v| ∝ ε^rate through the two smallest ε."""
    order = np.argsort(eps)
    e_f, e_c = float(eps[order[0]]), float(eps[order[1]])
    v_f, v_c = abs(float(values[order[0]])), abs(float(values[order[1]]))
    if v_f == 0.0 or v_c == 0.0:
        return math.nan
    return math.log(v_c / v_f) / math.log(e_c / e_f)


def bubble_norms(
    epsilons: Sequence[float],
    N: int,
    r: int,
    grid: RadialGrid,
    cutoff: Optional[float] = None,
) -> BubbleNormReport:
    """‖u_ε‖ᵣ² and ‖u_ε‖²_{L^{2*r}} over a decreasing ε sweep with fitted limits.

    The norms are integrals over the ball. Without a cutoff they approach
    their whole-space limits like ε^{N−2r} (seminorm) and ε^N (L^{2*r} norm),
    and the tail corrections continue in steps of ε², which the structured
    fit models. A cutoff radius fixed at R adds an ε^{N−2r} excess of its own;
    it is reported against the uncut bubble.

    Raises:
        UnderResolvedError: if some ε is below 5 × the grid's minimum spacing.
    """
    if grid.dimension != N:
        raise ValueError(f"grid dimension {grid.dimension} does not match N={N}")
    if len(epsilons) < 2:
        raise ValueError("need at least two ε values to extrapolate")
    floor = resolvable_epsilon(grid)
    for eps in epsilons:
        if eps < floor:
            raise UnderResolvedError(f"ε={eps} is below the resolvable scale {floor:.4g}")

    p = critical_exponent(N, r)
    semis, lps, excess = [], [], []
    for eps in epsilons:
        u = bubble_profile(BubbleSpec(epsilon=eps, cutoff=cutoff), grid, r)
        semis.append(hr_seminorm_sq(u, r))
        lps.append(lp_norm(u, p) ** 2)
        if cutoff is not None:
            excess.append(semis[-1] - hr_seminorm_sq(bubble_profile(BubbleSpec(epsilon=eps), grid, r), r))
        logger.debug(f"ε={eps:g}: ‖u‖ᵣ²={semis[-1]:.10g}, ‖u‖²={lps[-1]:.10g}")

    q = float(N - 2 * r)
    K_hat = richardson(epsilons, semis, q)
    K_structured = structured_limit(epsilons, semis, q)
    notes = []
    if len(epsilons) >= 3:
        K_free, q_free = fit_exponent(epsilons, semis)
        if math.isnan(q_free):
            notes.append("free-exponent fit did not bracket a root")
    else:
        K_free, q_free = math.nan, math.nan
        notes.append("structured and free fits need three ε values")

    lp_limit = richardson(epsilons, lps, float(N))
    drift = (max(lps) - min(lps)) / float(np.mean(lps))
    report = BubbleNormReport(
        N=N,
        r=r,
        epsilons=list(epsilons),
        seminorm_sq=semis,
        lp_sq=lps,
        K_hat=K_hat,
        K_hat_structured=K_structured,
        K_hat_free=K_free,
        exponent=q_free,
        lp_limit=lp_limit,
        sobolev_ratio=K_hat / lp_limit,
        lp_drift=drift,
        cutoff=cutoff,
        cutoff_excess=excess,
        cutoff_rate=_decay_rate(epsilons, excess) if excess else math.nan,
        notes=notes,
    )
    logger.info(
        f"bubble norms N={N} r={r}: K̂={K_hat:.8g}, structured K̂={K_structured:.8g}, "
        f"free K̂={K_free:.8g}, exponent={q_free:.3f}, Ŝ≈{report.sobolev_ratio:.8g}"
    )
    return report


def bubble_quotient(grid: RadialGrid, r: int, epsilon: float, cutoff: Optional[float] = 1.0) -> float:
    """Sobolev quotient ‖u_ε‖ᵣ² / ‖u_ε‖²_{L^{2*r}} of one bubble on the grid."""
    u = bubble_profile(BubbleSpec(epsilon=epsilon, cutoff=cutoff), grid, r)
    return hr_seminorm_sq(u, r) / lp_norm(u, critical_exponent(grid.dimension, r)) ** 2
