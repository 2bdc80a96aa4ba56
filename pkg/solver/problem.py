"""Problem and result types for the constrained critical-exponent minimization."""

from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from radial.grid import Profile, RadialGrid
from radial.operators import BoundaryCondition, conjugate_exponent, critical_exponent
from settings import CONSTRAINT_TOL, EL_TOL, MAX_OUTER


class ProblemError(ValueError):
    """Raised for inconsistent problem specifications."""


class DegenerateMultiplierError(RuntimeError):
    """Raised when the multiplier identity has a vanishing bracket."""


@dataclass(frozen=True)
class ProblemSpec:
    """inf ‖u‖ᵣ² over the ``bc`` space subject to ‖u + φ‖_{L^{2*r}} = 1."""

    N: int
    r: int
    bc: BoundaryCondition
    phi: Profile
    constraint_tol: float = CONSTRAINT_TOL
    gradient_tol: float = 1e-10
    el_tol: float = EL_TOL
    max_outer: int = MAX_OUTER
    max_inner: int = 5000

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ProblemError(f"order r must be positive, got {self.r}")
        if self.N <= 2 * self.r:
            raise ProblemError(f"need N > 2r, got N={self.N}, r={self.r}")
        if self.phi.grid.dimension != self.N:
            raise ProblemError(
                f"phi lives on a grid of dimension {self.phi.grid.dimension}, expected {self.N}"
            )
        if not isinstance(self.bc, BoundaryCondition):
            object.__setattr__(self, "bc", BoundaryCondition(self.bc))
        if self.max_outer < 1 or self.max_inner < 1:
            raise ProblemError("iteration limits must be positive")

    @property
    def grid(self) -> RadialGrid:
        return self.phi.grid

    @property
    def exponent(self) -> float:
        """2*r."""
        return critical_exponent(self.N, self.r)

    @property
    def conjugate(self) -> float:
        return conjugate_exponent(self.N, self.r)

    def with_bc(self, bc: BoundaryCondition) -> "ProblemSpec":
        return replace(self, bc=bc)

    def with_phi(self, phi: Profile) -> "ProblemSpec":
        return replace(self, phi=phi)


@dataclass
class StartRecord:
    """Outcome of one multi-start run."""

    label: str
    value: float
    converged: bool
    l2_norm: float
    constraint_residual: float
    outer_iterations: int


@dataclass
class SolveResult:
    value: float
    minimizer: Profile
    multiplier: float
    constraint_residual: float
    el_residual: float
    iterations: int
    converged: bool
    bc: BoundaryCondition = BoundaryCondition.NAVIER
    multiplier_identity: Optional[float] = None
    natural_bc_residual: float = 0.0
    dirichlet_bc_residual: float = 0.0
    starts: List[StartRecord] = field(default_factory=list)
    message: str = ""

    @property
    def degenerate(self) -> bool:
        return self.multiplier_identity is None

    def summary(self) -> dict:
        return {
            "bc": self.bc.value,
            "value": self.value,
            "multiplier": self.multiplier,
            "multiplier_identity": self.multiplier_identity,
            "constraint_residual": self.constraint_residual,
            "el_residual": self.el_residual,
            "natural_bc_residual": self.natural_bc_residual,
            "dirichlet_bc_residual": self.dirichlet_bc_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "starts": [vars(s) for s in self.starts],
            "message": self.message,
        }


@dataclass
class SobolevConstant:
    """Discrete estimate of the best Sobolev constant S_r."""

    N: int
    r: int
    estimate: float
    levels: List[int]
    level_values: List[float]
    extrapolated: bool
    uncertainty: float = 0.05
    scales: List[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not np.isfinite(self.estimate) or self.estimate <= 0:
            raise ProblemError(f"Sobolev estimate must be positive, got {self.estimate}")

    @property
    def finest(self) -> float:
        return self.level_values[-1]


def critical_nonlinearity(values: np.ndarray, p: float) -> np.ndarray:
    """|v|^{p−2} v, continuous at v = 0 for p > 2."""
    return np.abs(values) ** (p - 2.0) * values
