"""Tests for the constrained solver, multipliers, φ builders and Sobolev estimates."""

import numpy as np
import pytest
from scipy.special import gamma

from bubble.profile import BubbleSpec, bubble_profile
from inequalities import energy_identity_check
from radial.grid import Profile, make_radial_grid, resolvable_epsilon
from radial.operators import (
    BoundaryCondition,
    bc_residual,
    critical_exponent,
    enforce_bc,
    hr_inner,
    hr_seminorm_sq,
    lp_norm,
)
from radial.space import discrete_space
from solver.augmented_lagrangian import AugmentedLagrangian, feasible_scale, solve
from solver.multiplier import el_residual, energy_multiplier_identity, lagrange_multiplier_identity
from solver.phi import make_phi
from solver.problem import ProblemError, ProblemSpec, critical_nonlinearity
from solver.sobolev import (
    bubble_scales,
    eps_upper_bound,
    quotient,
    resolved_trial_space,
    sobolev_constant_estimate,
)

NAVIER = BoundaryCondition.NAVIER
DIRICHLET = BoundaryCondition.DIRICHLET


def _spec(grid, r, norm, kind="constant_sign_bump", bc=NAVIER):
    return ProblemSpec(N=grid.dimension, r=r, bc=bc, phi=make_phi(kind, norm, grid, r))


@pytest.fixture(scope="module")
def signs_n3(grid3):
    """Navier and Dirichlet solves for N = 3, r = 1 at ‖φ‖ = 0.5 and 1.5."""
    out = {}
    for norm in (0.5, 1.5):
        spec = _spec(grid3, 1, norm)
        out[norm] = (spec, solve(spec), solve(spec.with_bc(DIRICHLET)))
    return out


@pytest.fixture(scope="module")
def gap_n5(grid5):
    """Constant-sign φ, N = 5, r = 2, ‖φ‖ = 0.5."""
    spec = _spec(grid5, 2, 0.5)
    return spec, solve(spec), solve(spec.with_bc(DIRICHLET))


class TestProblemSpec:
    def test_subcritical_dimension_rejected(self, grid3):
        phi = Profile.zeros(grid3)
        with pytest.raises(ProblemError):
            ProblemSpec(N=3, r=2, bc=NAVIER, phi=phi)

    def test_dimension_mismatch_rejected(self, grid5):
        with pytest.raises(ProblemError):
            ProblemSpec(N=3, r=1, bc=NAVIER, phi=Profile.zeros(grid5))

    def test_string_bc_is_coerced(self, grid3):
        spec = ProblemSpec(N=3, r=1, bc="dirichlet", phi=Profile.zeros(grid3))
        assert spec.bc is DIRICHLET
        assert spec.exponent == pytest.approx(6.0)
        assert spec.conjugate == pytest.approx(1.2)

    def test_critical_nonlinearity(self):
        v = np.array([-2.0, 0.0, 3.0])
        assert np.allclose(critical_nonlinearity(v, 4.0), [-8.0, 0.0, 27.0])


class TestAugmentedLagrangian:
    @pytest.mark.parametrize("N,r", [(3, 1), (5, 2), (7, 3)])
    def test_gradient_matches_central_differences(self, N, r):
        grid = make_radial_grid(N, 60)
        space = discrete_space(grid, r, NAVIER)
        phi = make_phi("constant_sign_bump", 0.7, grid, r)
        al = AugmentedLagrangian(space, phi, critical_exponent(N, r))
        rng = np.random.default_rng(0)
        z = 0.1 * rng.standard_normal(space.dim)
        d = rng.standard_normal(space.dim)
        d /= np.linalg.norm(d)
        mu, rho = 0.3, 5.0
        _, grad = al(z, mu, rho)
        h = 1e-6
        fd = (al(z + h * d, mu, rho)[0] - al(z - h * d, mu, rho)[0]) / (2.0 * h)
        assert fd == pytest.approx(float(np.dot(grad, d)), rel=1e-6, abs=1e-9)

    def test_constraint_vanishes_on_feasible_point(self, grid3):
        space = discrete_space(grid3, 1, NAVIER)
        phi = make_phi("constant_sign_bump", 1.0, grid3, 1)
        al = AugmentedLagrangian(space, phi, 6.0)
        g, _ = al.constraint(np.zeros(space.dim))
        assert g == pytest.approx(0.0, abs=1e-12)

    def test_feasible_scale_on_constant(self, grid3):
        weights = np.asarray(grid3.weights)
        c = feasible_scale(np.ones(grid3.size), np.zeros(grid3.size), weights, 6.0)
        assert c == pytest.approx(float(np.sum(weights)) ** (-1.0 / 6.0), rel=1e-10)

    def test_feasible_scale_without_root(self, grid3):
        assert feasible_scale(np.zeros(grid3.size), np.zeros(grid3.size), np.asarray(grid3.weights), 6.0) is None


class TestSolve:
    def test_norm_one_has_zero_minimizer(self, grid3):
        spec = _spec(grid3, 1, 1.0)
        for bc in (NAVIER, DIRICHLET):
            result = solve(spec.with_bc(bc))
            assert result.value < 1e-10
            assert not np.any(result.minimizer.values)
            assert result.converged
            assert result.degenerate

    def test_sign_trichotomy(self, signs_n3):
        for norm, (_, navier, dirichlet) in signs_n3.items():
            for result in (navier, dirichlet):
                assert result.converged, result.message
                assert np.sign(result.multiplier) == np.sign(1.0 - norm)

    def test_constraint_and_bc_satisfied(self, signs_n3):
        for spec, navier, dirichlet in signs_n3.values():
            p = spec.exponent
            for result, bc in ((navier, NAVIER), (dirichlet, DIRICHLET)):
                assert abs(lp_norm(result.minimizer + spec.phi, p) - 1.0) < 1e-8
                assert bc_residual(result.minimizer, spec.r, bc) < 1e-8
                assert result.el_residual < spec.el_tol

    def test_spaces_coincide_for_first_order(self, signs_n3):
        for _, navier, dirichlet in signs_n3.values():
            assert navier.value == pytest.approx(dirichlet.value, rel=1e-6)

    def test_multiplier_identity_matches_estimate(self, signs_n3):
        for spec, navier, _ in signs_n3.values():
            identity = lagrange_multiplier_identity(navier.minimizer, spec.phi, navier.value, spec)
            assert identity == pytest.approx(navier.multiplier, rel=1e-4)
            assert navier.multiplier_identity == pytest.approx(identity)

    def test_energy_identity(self, signs_n3):
        for spec, navier, dirichlet in signs_n3.values():
            for result in (navier, dirichlet):
                _, _, err = energy_identity_check(result, spec.phi, spec.with_bc(result.bc))
                assert err < 0.01

    def test_navier_below_dirichlet(self, gap_n5):
        _, navier, dirichlet = gap_n5
        assert navier.converged and dirichlet.converged
        assert navier.value < dirichlet.value * (1.0 - 1e-6)
        assert navier.multiplier > 0 and dirichlet.multiplier > 0

    def test_navier_minimizer_leaves_dirichlet_space(self, gap_n5):
        _, navier, _ = gap_n5
        assert navier.dirichlet_bc_residual > 1e-7

    def test_summary_is_serializable(self, gap_n5):
        _, navier, _ = gap_n5
        summary = navier.summary()
        assert summary["bc"] == "navier"
        assert summary["starts"] and {"label", "value", "converged"} <= set(summary["starts"][0])


class TestMultipliers:
    def test_energy_identity_for_phi_in_space(self, grid5):
        spec = _spec(grid5, 2, 1.5, kind="h0_member")
        result = solve(spec)
        assert result.converged
        assert energy_multiplier_identity(result, spec.phi, spec) == pytest.approx(result.multiplier, rel=1e-4)
        assert result.multiplier < 0

    def test_nested_values_for_phi_in_dirichlet_space(self, grid5):
        spec = _spec(grid5, 2, 1.5, kind="h0_member")
        navier, dirichlet = solve(spec), solve(spec.with_bc(DIRICHLET))
        assert navier.value <= dirichlet.value * (1.0 + 1e-8)


class TestPhi:
    @pytest.mark.parametrize("kind", ["constant_sign_bump", "h0_member", "theta_orthogonal"])
    def test_target_norm(self, grid5, kind):
        phi = make_phi(kind, 0.8, grid5, 2)
        assert lp_norm(phi, critical_exponent(5, 2)) == pytest.approx(0.8, rel=1e-12)

    def test_h0_member_satisfies_dirichlet(self, grid5):
        phi = make_phi("h0_member", 1.5, grid5, 2)
        assert bc_residual(phi, 2, DIRICHLET) < 1e-10

    def test_constant_sign_bump_is_positive(self, grid3):
        assert np.all(make_phi("constant_sign_bump", 0.5, grid3, 1).values > 0)

    def test_theta_orthogonal_is_orthogonal(self, grid5):
        phi = make_phi("theta_orthogonal", 1.0, grid5, 2)
        assert bc_residual(phi, 2, NAVIER) < 1e-10
        rng = np.random.default_rng(5)
        for _ in range(5):
            v = enforce_bc(Profile(grid5, rng.standard_normal(grid5.size)), 2, DIRICHLET)
            scale = np.sqrt(hr_seminorm_sq(phi, 2) * hr_seminorm_sq(v, 2))
            assert abs(hr_inner(phi, v, 2)) < 1e-8 * scale

    def test_theta_orthogonal_trivial_for_first_order(self, grid3):
        with pytest.raises(ProblemError):
            make_phi("theta_orthogonal", 1.0, grid3, 1)

    def test_invalid_requests(self, grid3):
        with pytest.raises(ProblemError):
            make_phi("constant_sign_bump", 0.0, grid3, 1)
        with pytest.raises(ProblemError):
            make_phi("gaussian", 1.0, grid3, 1)


@pytest.fixture(scope="module")
def estimate():
    return sobolev_constant_estimate(3, 1, [50, 100, 200])


class TestSobolev:
    def test_levels_and_estimate(self, estimate):
        assert estimate.levels == [50, 100, 200]
        assert all(v > 0 for v in estimate.level_values)
        assert 0 < estimate.estimate <= estimate.finest

    def test_level_values_decrease(self, estimate):
        values = estimate.level_values
        assert all(b <= a * (1.0 + 1e-10) for a, b in zip(values, values[1:]))

    def test_scales_shrink_with_levels(self, estimate):
        assert len(estimate.scales) == 3
        assert all(b < a for a, b in zip(estimate.scales, estimate.scales[1:]))

    def test_estimate_matches_three_dimensional_constant(self, estimate):
        assert estimate.estimate == pytest.approx(SOBOLEV_3_1, rel=0.05)

    def test_level_values_stay_above_constant(self, estimate):
        assert min(estimate.level_values) > SOBOLEV_3_1 * (1.0 - 0.01)

    @pytest.mark.parametrize("n,kind", [(60, "uniform"), (200, "uniform"), (200, "graded")])
    def test_bubble_scales_are_resolved(self, n, kind):
        grid = make_radial_grid(3, n, kind)
        scales = bubble_scales(grid)
        assert scales.size >= 1
        assert scales[0] >= resolvable_epsilon(grid)
        assert np.all(scales <= 0.5)
        assert np.allclose(scales[1:] / scales[:-1], 2.0)

    def test_trial_space_is_orthonormal_in_energy(self):
        grid = make_radial_grid(5, 100)
        synthesis = resolved_trial_space(grid, 2)
        gram = np.array(
            [[hr_inner(Profile(grid, a), Profile(grid, b), 2) for b in synthesis.T] for a in synthesis.T]
        )
        assert np.allclose(gram, np.eye(synthesis.shape[1]), atol=1e-8)
        for column in synthesis.T:
            assert bc_residual(Profile(grid, column), 2, DIRICHLET) < 1e-8

    def test_quotient_of_minimizing_bubble_is_above_estimate(self, estimate):
        grid = make_radial_grid(3, 200)
        u = bubble_profile(BubbleSpec(epsilon=0.2, cutoff=1.0), grid, 1)
        assert quotient(u, 1) >= estimate.finest * (1.0 - 1e-8)

    def test_eps_bound_requires_small_phi(self, estimate, grid3):
        spec = _spec(grid3, 1, 1.5)
        with pytest.raises(ProblemError):
            eps_upper_bound(spec.phi, estimate, spec)

    def test_eps_bound_holds(self, estimate, signs_n3):
        spec, navier, _ = signs_n3[0.5]
        bound = eps_upper_bound(spec.phi, estimate, spec)
        assert navier.value <= bound * (1.0 + 0.02 + estimate.uncertainty)

    def test_rejects_empty_levels(self):
        with pytest.raises(ProblemError):
            sobolev_constant_estimate(3, 1, [])

    @pytest.mark.slow
    def test_estimate_matches_second_order_constant(self):
        """S₂ in R⁵ from the Gamma-function formula, about 102.38."""
        result = sobolev_constant_estimate(5, 2, [100, 200, 400])
        assert result.estimate == pytest.approx(sobolev_exact(5, 2), rel=0.10)


def sobolev_exact(N, r):
    """(4π)^r Γ(N/2+r)/Γ(N/2−r) (Γ(N/2)/Γ(N))^{2r/N}."""
    return (
        (4.0 * np.pi) ** r
        * gamma(N / 2.0 + r)
        / gamma(N / 2.0 - r)
        * (gamma(N / 2.0) / gamma(float(N))) ** (2.0 * r / N)
    )


SOBOLEV_3_1 = 0.75 * (2.0 * np.pi ** 2) ** (2.0 / 3.0)


class TestResidualSensitivity:
    def test_noise_raises_el_residual(self, signs_n3):
        spec, navier, _ = signs_n3[0.5]
        u = navier.minimizer
        clean = el_residual(u, spec.phi, navier.multiplier, spec)
        rng = np.random.default_rng(11)
        noise = 0.01 * float(np.max(np.abs(u.values))) * rng.standard_normal(u.grid.size)
        noisy = enforce_bc(u + Profile(u.grid, noise), spec.r, NAVIER)
        perturbed = el_residual(noisy, spec.phi, navier.multiplier, spec)
        assert perturbed >= 10.0 * clean
        assert perturbed > 0.0


class TestFeasibleGradient:
    @pytest.mark.parametrize("N,r", [(3, 1), (5, 2), (7, 3)])
    def test_gradient_at_feasible_point(self, N, r):
        grid = make_radial_grid(N, 60)
        p = critical_exponent(N, r)
        space = discrete_space(grid, r, NAVIER)
        phi = make_phi("constant_sign_bump", 0.7, grid, r)
        al = AugmentedLagrangian(space, phi, p)
        rng = np.random.default_rng(3)
        direction = rng.standard_normal(space.dim)
        direction /= lp_norm(Profile(grid, al.values(direction)), p)
        c = feasible_scale(al.values(direction), np.asarray(phi.values), np.asarray(grid.weights), p)
        assert c is not None
        z = c * direction
        assert abs(al.constraint(z)[0]) < 1e-10

        d = rng.standard_normal(space.dim)
        d /= np.linalg.norm(d)
        mu, rho = 1.3, 10.0
        _, grad = al(z, mu, rho)
        h = 1e-6
        fd = (al(z + h * d, mu, rho)[0] - al(z - h * d, mu, rho)[0]) / (2.0 * h)
        assert fd == pytest.approx(float(np.dot(grad, d)), rel=1e-5, abs=1e-8)
