"""Bubble profiles, the smooth cutoff and the closed-form polyharmonic values."""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from bubble.coefficients import build_table
from radial.grid import Profile, RadialGrid

ArrayLike = Union[float, np.ndarray]

VARIANTS = ("corrected", "printed")


class BubbleError(ValueError):
    """Raised for invalid bubble specifications or unsupported evaluations."""


@dataclass(frozen=True)
class BubbleSpec:
    """Bubble centred at the origin with scale ε and an optional cutoff radius R."""

    epsilon: float
    cutoff: Optional[float] = None
    center: float = 0.0

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise BubbleError(f"epsilon must be positive, got {self.epsilon}")
        if self.cutoff is not None and not 0 < self.cutoff <= 1:
            raise BubbleError(f"cutoff radius must lie in (0, 1], got {self.cutoff}")
        if self.center != 0.0:
            raise BubbleError("only bubbles centred at the origin are radial")

    def without_cutoff(self) -> "BubbleSpec":
        return BubbleSpec(epsilon=self.epsilon)


def _flat(x: np.ndarray) -> np.ndarray:
    """exp(−1/x) for x > 0, 0 otherwise."""
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def cutoff_factor(t: ArrayLike, R: float) -> np.ndarray:
    """C^∞ cutoff ξ: 1 on [0, R/2], 0 on [R, ∞), glued from two flat exponentials."""
    t = np.asarray(t, dtype=float)
    s = np.clip((t - 0.5 * R) / (0.5 * R), 0.0, 1.0)
    down, up = _flat(1.0 - s), _flat(s)
    return down / (down + up)


def _check_t(t: np.ndarray) -> None:
    if np.any(t < 0):
        raise BubbleError("bubble is evaluated at radii t >= 0")


def bubble_eval(spec: BubbleSpec, N: int, r: int, t: ArrayLike) -> ArrayLike:
    """ε^{(N−2r)/2} ξ(t) / (ε² + t²)^{(N−2r)/2}."""
    t_arr = np.asarray(t, dtype=float)
    _check_t(t_arr)
    a = 0.5 * (N - 2 * r)
    eps = spec.epsilon
    value = eps ** a / (eps * eps + t_arr * t_arr) ** a
    if spec.cutoff is not None:
        value = value * cutoff_factor(t_arr, spec.cutoff)
    return float(value) if np.ndim(t) == 0 else value


def bubble_profile(spec: BubbleSpec, grid: RadialGrid, r: int) -> Profile:
    return Profile(grid, bubble_eval(spec, grid.dimension, r, grid.nodes))


def bubble_polyharmonic(
    spec: BubbleSpec,
    N: int,
    r: int,
    j: int,
    t: ArrayLike,
    variant: str = "corrected",
) -> ArrayLike:
    """Closed-form (−Δ)^j of the pure bubble.

    ``variant="corrected"`` uses the oracle-validated table (with the ε^{−2i}
    factor), ``"printed"`` evaluates the formula exactly as written.
    """
    if spec.cutoff is not None:
        raise BubbleError("the closed form holds for the pure bubble only; drop the cutoff")
    if not 1 <= j <= r:
        raise BubbleError(f"closed form needs 1 <= j <= r, got j={j}, r={r}")
    if variant not in VARIANTS:
        raise BubbleError(f"unknown coefficient variant {variant!r}")
    t_arr = np.asarray(t, dtype=float)
    _check_t(t_arr)

    table = build_table(N, r)
    eps = spec.epsilon
    power = 0.5 * (N - 2 * r) + 2 * j
    total = np.zeros_like(t_arr)
    for i, coeff in enumerate(table.row(j, variant)):
        scale = eps ** (-2 * i) if variant == "corrected" else 1.0
        total = total + float(coeff) * scale * t_arr ** (2 * i)
    value = eps ** power * total / (eps * eps + t_arr * t_arr) ** power
    return float(value) if np.ndim(t) == 0 else value
