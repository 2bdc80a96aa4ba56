"""Whitened coordinates on a discrete essential-BC subspace.

Profiles in the subspace are written u = B c with B orthonormal. The energy
factor R (upper triangular, from a QR of diag(√w)·E·B) turns the seminorm into
a Euclidean norm, ‖u‖ᵣ² = ‖R c‖², so optimizers work in z = R c where the
problem is well conditioned.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import qr, solve_triangular

from radial.grid import Profile, RadialGrid
from radial.operators import BoundaryCondition, bc_basis, energy_operator


@dataclass(frozen=True, eq=False)
class DiscreteSpace:
    grid: RadialGrid
    r: int
    bc: BoundaryCondition
    basis: np.ndarray
    factor: np.ndarray
    energy_map: np.ndarray
    energy_weights: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def coeffs(self, u: Profile) -> np.ndarray:
        return self.basis.T @ u.values

    def profile(self, c: np.ndarray) -> Profile:
        return Profile(self.grid, self.basis @ c)

    def whiten(self, c: np.ndarray) -> np.ndarray:
        return self.factor @ c

    def unwhiten(self, z: np.ndarray) -> np.ndarray:
        return solve_triangular(self.factor, z)

    def unwhiten_adjoint(self, g: np.ndarray) -> np.ndarray:
        """R^{-T} g, used to pull node-space gradients back to z."""
        return solve_triangular(self.factor, g, trans="T")

    def values_from_z(self, z: np.ndarray) -> np.ndarray:
        return self.basis @ self.unwhiten(z)

    def z_from_values(self, values: np.ndarray) -> np.ndarray:
        return self.factor @ (self.basis.T @ values)

    def gradient_to_z(self, node_gradient: np.ndarray) -> np.ndarray:
        """Chain rule for u = B R^{-1} z."""
        return self.unwhiten_adjoint(self.basis.T @ node_gradient)

    def energy_values(self, values: np.ndarray) -> np.ndarray:
        """E u, the field whose weighted square integral is ‖u‖ᵣ²."""
        return self.energy_map @ values

    def variational_operator(self, values: np.ndarray) -> np.ndarray:
        """W^{-1} Eᵀ diag(w) E u, the discrete (−Δ)^r consistent with ‖·‖ᵣ²."""
        flux = self.energy_weights * (self.energy_map @ values)
        return (self.energy_map.T @ flux) / self.grid.weights


@lru_cache(maxsize=64)
def discrete_space(grid: RadialGrid, r: int, bc: BoundaryCondition) -> DiscreteSpace:
    basis = bc_basis(grid, r, bc)
    op, w = energy_operator(grid, r)
    scaled = np.sqrt(w)[:, None] * (op @ basis)
    _, factor = qr(scaled, mode="economic")
    return DiscreteSpace(
        grid=grid,
        r=r,
        bc=bc,
        basis=basis,
        factor=factor,
        energy_map=op,
        energy_weights=w,
    )
