"""Tests for the Lagrangian, β and the duality report in the regime ‖φ‖ > 1."""

import numpy as np
import pytest

from duality import (
    DualPoint,
    beta_pair,
    beta_value,
    closed_form_beta,
    dual_report,
    holder_dual_sup,
    inequality_reformulation_check,
    lagrangian,
    maximize_lagrangian,
    random_dual_points,
)
from radial.grid import Profile, make_radial_grid
from radial.operators import BoundaryCondition, enforce_bc, hr_seminorm_sq
from solver.augmented_lagrangian import solve
from solver.phi import make_phi
from solver.problem import ProblemError, ProblemSpec

NAVIER = BoundaryCondition.NAVIER


@pytest.fixture(scope="module")
def grid():
    return make_radial_grid(5, 80)


@pytest.fixture(scope="module")
def large_phi(grid):
    """N = 5, r = 2, φ in the Dirichlet space with ‖φ‖ = 1.5, and its Navier solve."""
    spec = ProblemSpec(N=5, r=2, bc=NAVIER, phi=make_phi("h0_member", 1.5, grid, 2))
    return spec, solve(spec)


def _random_admissible(grid, seed):
    rng = np.random.default_rng(seed)
    return enforce_bc(Profile(grid, rng.standard_normal(grid.size)), 2, NAVIER)


class TestDualPoint:
    def test_shape_checked(self, grid):
        with pytest.raises(ProblemError):
            DualPoint(grid, 2, np.zeros(3))

    def test_non_finite_rejected(self, grid):
        values = np.zeros(grid.size)
        values[0] = np.inf
        with pytest.raises(ProblemError):
            DualPoint(grid, 2, values)

    @pytest.mark.parametrize("r", [1, 2])
    def test_representer_pairs_with_energy(self, r):
        """⟨E u, p⟩_w = ∫ p̃ u for any nodal u."""
        grid = make_radial_grid(7, 60)
        rng = np.random.default_rng(10 + r)
        u = Profile(grid, rng.standard_normal(grid.size))
        p = DualPoint.from_potential(Profile(grid, rng.standard_normal(grid.size)), r)
        lhs = -lagrangian(u, p, ProblemSpec(N=7, r=r, bc=NAVIER, phi=Profile.zeros(grid))) - 0.5 * p.sq_norm()
        rhs = grid.integrate(p.representer.values * u.values)
        assert lhs == pytest.approx(rhs, rel=1e-10)


class TestLagrangian:
    def test_witness_attains_half_energy(self, grid, large_phi):
        spec, _ = large_phi
        u = _random_admissible(grid, 0)
        value = lagrangian(u, DualPoint.witness(u, 2), spec)
        assert value == pytest.approx(0.5 * hr_seminorm_sq(u, 2), rel=1e-12)

    def test_maximization_attains_half_energy(self, grid, large_phi):
        spec, _ = large_phi
        u = _random_admissible(grid, 1)
        value, p = maximize_lagrangian(u, spec)
        assert value == pytest.approx(0.5 * hr_seminorm_sq(u, 2), rel=1e-8)
        assert lagrangian(u, p, spec) == pytest.approx(value, rel=1e-10)

    def test_other_points_do_not_exceed_witness(self, grid, large_phi):
        spec, _ = large_phi
        u = _random_admissible(grid, 2)
        best = lagrangian(u, DualPoint.witness(u, 2), spec)
        for p in random_dual_points(spec, 20, seed=3):
            assert lagrangian(u, p, spec) <= best * (1.0 + 1e-12)


class TestBeta:
    def test_holder_closed_form_attained(self, large_phi):
        _, result = large_phi
        ptilde = DualPoint.witness(result.minimizer, 2).representer
        closed, attained = holder_dual_sup(ptilde, 10.0)
        assert closed > 0
        assert attained == pytest.approx(closed, rel=1e-10)

    def test_holder_rejects_small_exponent(self, grid):
        with pytest.raises(ProblemError):
            holder_dual_sup(Profile.zeros(grid), 1.0)

    def test_shifted_beta_never_exceeds_closed_form(self, large_phi):
        spec, result = large_phi
        p = DualPoint.witness(result.minimizer, 2)
        assert beta_value(p, spec.phi, spec) <= closed_form_beta(p.representer, spec.phi, spec)

    def test_pair_closed_forms_coincide(self, large_phi):
        spec, result = large_phi
        pair = beta_pair(DualPoint.witness(result.minimizer, 2), spec.phi, spec)
        assert pair.closed_theta == pair.closed_zero
        scale = max(1.0, abs(pair.closed_theta))
        assert pair.direct_theta <= pair.closed_theta + 1e-8 * scale
        assert pair.direct_zero <= pair.closed_zero + 1e-8 * scale


class TestReport:
    def test_weak_and_strong_duality(self, large_phi):
        spec, result = large_phi
        assert result.converged
        report = dual_report(spec, result, n_random=50, seed=0)
        assert report.weak_duality_samples == 50
        assert report.weak_duality_violations == 0
        assert abs(report.relative_gap) < 0.02
        assert report.holder_attainment_error < 1e-8
        assert report.beta_theta == report.beta_zero
        assert {"dual_value", "primal_value", "la_error"} <= set(report.as_dict())

    def test_report_deterministic_in_seed(self, large_phi):
        spec, result = large_phi
        first = dual_report(spec, result, n_random=10, seed=4)
        second = dual_report(spec, result, n_random=10, seed=4)
        assert first.worst_weak_margin == second.worst_weak_margin

    def test_small_phi_rejected(self, grid):
        spec = ProblemSpec(N=5, r=2, bc=NAVIER, phi=make_phi("h0_member", 0.5, grid, 2))
        result = solve(spec)
        with pytest.raises(ProblemError):
            dual_report(spec, result)
        with pytest.raises(ProblemError):
            inequality_reformulation_check(spec, result)

    def test_inequality_reformulation(self, large_phi):
        spec, result = large_phi
        flags = inequality_reformulation_check(spec, result)
        assert flags["feasible"]
        assert flags["segment_feasible"]
        assert flags["energy_monotone"]
        assert flags["phi_in_space"]

    def test_weak_duality_full_sweep(self, large_phi):
        spec, result = large_phi
        report = dual_report(spec, result, n_random=200, seed=1)
        assert report.weak_duality_samples == 200
        assert report.weak_duality_violations == 0


def _fine_pair(n):
    grid = make_radial_grid(5, n)
    spec = ProblemSpec(N=5, r=2, bc=NAVIER, phi=make_phi("h0_member", 1.5, grid, 2))
    p = random_dual_points(spec, 1, seed=7)[0]
    pairing = grid.integrate(p.representer.values * spec.phi.values)
    return beta_pair(p, spec.phi, spec), pairing


@pytest.mark.slow
class TestBetaRefinement:
    def test_direct_matches_closed_form(self):
        pair, pairing = _fine_pair(400)
        scale = abs(pair.closed_theta) + abs(pairing)
        assert abs(pair.direct_theta - pair.closed_theta) <= 0.02 * scale
        assert abs(pair.direct_zero - pair.closed_zero) <= 0.02 * scale

    def test_direct_estimates_converge(self):
        values = [_fine_pair(n)[0].direct_zero for n in (100, 200, 400)]
        assert abs(values[2] - values[1]) <= abs(values[1] - values[0]) + 1e-3 * abs(values[2])
