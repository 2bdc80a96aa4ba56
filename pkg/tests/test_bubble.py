"""Tests for bubble profiles, coefficient tables and norm asymptotics."""

from fractions import Fraction

import numpy as np
import pytest

from bubble.asymptotics import (
    UnderResolvedError,
    bubble_norms,
    bubble_quotient,
    closed_form_errors,
    constant_D_beta,
    constant_D_integral,
    fit_exponent,
    richardson,
    structured_limit,
)
from bubble.coefficients import (
    build_table,
    coeff_D,
    coeff_E,
    coeff_K,
    coefficient_defects,
    corrected_coefficients,
    printed_G,
)
from bubble.profile import BubbleError, BubbleSpec, bubble_eval, bubble_polyharmonic, cutoff_factor
from radial.grid import make_radial_grid

MATRIX = [(3, 1), (5, 2), (7, 3)]


class TestCoefficients:
    def test_factor_products(self):
        assert coeff_K(0, 7, 3) == 1
        assert coeff_K(2, 7, 3) == 1 * 3
        assert coeff_D(0, 2, 3) == 1
        assert coeff_D(1, 2, 3) == 3 * 2
        assert coeff_E(0, 2, 5) == 5 * 7
        assert coeff_E(1, 1, 5) == 1
        assert coeff_E(2, 1, 5) == 0

    def test_factor_domain(self):
        with pytest.raises(ValueError):
            coeff_D(3, 2, 3)
        with pytest.raises(ValueError):
            coeff_E(-1, 2, 5)

    @pytest.mark.parametrize("N,r", MATRIX)
    def test_first_laplacian_by_hand(self, N, r):
        """−Δ (1+τ²)^{−b} = [2Nb + 2b(2r−2)τ²] (1+τ²)^{−b−2}, b = (N−2r)/2."""
        table = corrected_coefficients(N, r)
        assert table[(0, 1)] == Fraction(N * (N - 2 * r))
        assert table[(1, 1)] == Fraction((N - 2 * r) * (2 * r - 2))

    @pytest.mark.parametrize("N,r", MATRIX)
    def test_printed_constant_term_agrees(self, N, r):
        assert Fraction(printed_G(0, 1, N, r)) == corrected_coefficients(N, r)[(0, 1)]

    @pytest.mark.parametrize("N,r", MATRIX)
    def test_printed_table_is_defective(self, N, r):
        rows = coefficient_defects(N, r)
        assert any(row["mismatch"] for row in rows)
        assert all(row["missing_scale"] == (row["i"] > 0) for row in rows)

    def test_table_is_deterministic(self):
        assert build_table(5, 2) is build_table(5, 2)
        assert build_table(5, 2).row(2) == build_table(5, 2).row(2, "corrected")

    def test_table_rejects_subcritical(self):
        with pytest.raises(ValueError):
            build_table(4, 2)


class TestProfile:
    def test_peak_value(self):
        spec = BubbleSpec(epsilon=0.2)
        # ε^{a} / ε^{2a} with a = (N−2r)/2
        assert bubble_eval(spec, 5, 2, 0.0) == pytest.approx(0.2 ** -0.5)

    def test_cutoff_factor(self):
        values = cutoff_factor(np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.2]), 1.0)
        assert np.allclose(values[:3], 1.0)
        assert np.allclose(values[4:], 0.0)
        assert 0.0 < values[3] < 1.0
        assert np.all(np.diff(values) <= 0)

    def test_invalid_specs(self):
        with pytest.raises(BubbleError):
            BubbleSpec(epsilon=0.0)
        with pytest.raises(BubbleError):
            BubbleSpec(epsilon=0.1, cutoff=1.5)
        with pytest.raises(BubbleError):
            BubbleSpec(epsilon=0.1, center=0.3)
        with pytest.raises(BubbleError):
            bubble_eval(BubbleSpec(epsilon=0.1), 3, 1, -0.5)

    def test_closed_form_rejects_cutoff_and_order(self):
        with pytest.raises(BubbleError):
            bubble_polyharmonic(BubbleSpec(epsilon=0.3, cutoff=1.0), 5, 2, 1, 0.5)
        with pytest.raises(BubbleError):
            bubble_polyharmonic(BubbleSpec(epsilon=0.3), 5, 2, 3, 0.5)
        with pytest.raises(BubbleError):
            bubble_polyharmonic(BubbleSpec(epsilon=0.3), 5, 2, 1, 0.5, variant="draft")

    def test_closed_form_three_dimensional_laplacian(self):
        """In R³, −Δ of ε^{1/2}(ε²+t²)^{−1/2} is 3 ε^{5/2} (ε²+t²)^{−5/2}."""
        eps = 0.3
        t = np.linspace(0.0, 1.0, 11)
        expected = 3.0 * eps ** 2.5 / (eps ** 2 + t ** 2) ** 2.5
        actual = bubble_polyharmonic(BubbleSpec(epsilon=eps), 3, 1, 1, t)
        assert np.allclose(actual, expected, rtol=1e-13)


class TestOracle:
    @pytest.mark.parametrize("N,r", MATRIX)
    def test_corrected_table_matches_finite_differences(self, N, r):
        grid = make_radial_grid(N, 800, "graded")
        errors = closed_form_errors(grid, r, 0.3)
        assert set(errors) == set(range(1, r + 1))
        assert max(errors.values()) < 1e-4

    @pytest.mark.parametrize("N,r", MATRIX)
    def test_printed_table_fails_oracle(self, N, r):
        grid = make_radial_grid(N, 400, "graded")
        errors = closed_form_errors(grid, r, 0.3, variant="printed")
        assert max(errors.values()) > 1e-3


class TestAsymptotics:
    @pytest.mark.parametrize("N,r", MATRIX)
    def test_constant_D_quadrature_matches_beta(self, N, r):
        assert constant_D_integral(N, r) == pytest.approx(constant_D_beta(N, r), rel=1e-8)

    def test_richardson_exact_on_model(self):
        eps = [0.4, 0.2, 0.1]
        values = [2.0 + 3.0 * e ** 1.5 for e in eps]
        assert richardson(eps, values, 1.5) == pytest.approx(2.0, rel=1e-12)

    def test_fit_exponent_recovers_rate(self):
        eps = [0.4, 0.2, 0.1]
        values = [2.0 + 3.0 * e ** 1.5 for e in eps]
        limit, q = fit_exponent(eps, values)
        assert q == pytest.approx(1.5, rel=1e-8)
        assert limit == pytest.approx(2.0, rel=1e-8)

    def test_fit_exponent_reports_nan_without_bracket(self):
        limit, q = fit_exponent([0.4, 0.2, 0.1], [1.0, 2.0, 1.0])
        assert np.isnan(limit) and np.isnan(q)

    def test_under_resolved_scale_rejected(self):
        grid = make_radial_grid(3, 50)
        with pytest.raises(UnderResolvedError):
            bubble_norms([0.4, 0.01], 3, 1, grid)

    def test_quotient_approaches_sobolev_constant_from_above(self):
        """N = 3, r = 1: S = (3/4)(2π²)^{2/3}."""
        sobolev = 0.75 * (2.0 * np.pi ** 2) ** (2.0 / 3.0)
        grid = make_radial_grid(3, 800, "graded")
        wide = bubble_quotient(grid, 1, 0.4)
        narrow = bubble_quotient(grid, 1, 0.1)
        assert narrow < wide
        assert narrow > 0.99 * sobolev

    def test_structured_limit_exact_on_model(self):
        eps = [0.4, 0.2, 0.1]
        values = [2.0 + 3.0 * e ** 1.5 - 0.5 * e ** 3.5 for e in eps]
        assert structured_limit(eps, values, 1.5) == pytest.approx(2.0, rel=1e-10)

    def test_structured_limit_needs_three_scales(self):
        assert np.isnan(structured_limit([0.2, 0.1], [1.0, 0.5], 1.0))

    @pytest.mark.slow
    @pytest.mark.parametrize("N,r", MATRIX)
    def test_seminorm_extrapolations_agree(self, N, r):
        grid = make_radial_grid(N, 800, "graded")
        report = bubble_norms([0.4, 0.2, 0.1], N, r, grid)
        assert report.extrapolation_spread < 0.03
        assert abs(report.exponent - (N - 2 * r)) <= 0.7
        assert report.cutoff is None and report.cutoff_excess == []

    @pytest.mark.slow
    def test_seminorm_limit_three_dimensional(self):
        """∫_{R³} |∇u|² of the unit bubble is 3π²/4."""
        grid = make_radial_grid(3, 800, "graded")
        report = bubble_norms([0.4, 0.2, 0.1], 3, 1, grid)
        assert report.K_hat_structured == pytest.approx(0.75 * np.pi ** 2, rel=0.02)

    @pytest.mark.slow
    def test_sobolev_ratio_three_dimensional(self):
        sobolev = 0.75 * (2.0 * np.pi ** 2) ** (2.0 / 3.0)
        grid = make_radial_grid(3, 800, "graded")
        report = bubble_norms([0.2, 0.1, 0.05], 3, 1, grid)
        assert report.sobolev_ratio == pytest.approx(sobolev, rel=0.05)
        assert report.lp_drift < 0.02

    @pytest.mark.slow
    def test_cutoff_excess_decays_like_seminorm_tail(self):
        grid = make_radial_grid(3, 800, "graded")
        report = bubble_norms([0.2, 0.1, 0.05], 3, 1, grid, cutoff=1.0)
        assert report.cutoff == 1.0
        assert len(report.cutoff_excess) == 3
        assert abs(report.cutoff_rate - 1.0) < 0.2


class TestBubbleShape:
    def test_profile_decreases_in_radius(self):
        t = np.linspace(0.0, 0.9, 50)
        values = bubble_eval(BubbleSpec(epsilon=0.15), 5, 2, t)
        assert np.all(np.diff(values) < 0)

    @pytest.mark.parametrize("N,r", MATRIX)
    def test_profile_is_self_similar(self, N, r):
        """u_ε(t) = ε^{−a} u_1(t/ε), a = (N − 2r)/2."""
        eps = 0.25
        a = 0.5 * (N - 2 * r)
        t = np.linspace(0.0, 1.0, 21)
        scaled = eps ** -a * bubble_eval(BubbleSpec(epsilon=1.0), N, r, t / eps)
        assert np.allclose(bubble_eval(BubbleSpec(epsilon=eps), N, r, t), scaled, rtol=1e-13)

    def test_constant_D_one_dimensional(self):
        """ω₀ = 2 and ∫₀^∞ (1 + ρ²)^{−3/2} dρ = 1."""
        assert constant_D_integral(1, 1) == pytest.approx(2.0, rel=1e-10)

    @pytest.mark.parametrize("N", [3, 5, 7])
    def test_constant_D_decreases_with_order(self, N):
        assert constant_D_integral(N, 2) < constant_D_integral(N, 1)

    def test_constant_D_domain(self):
        with pytest.raises(ValueError):
            constant_D_integral(3, 0)


class TestCoefficientScript:
    def test_frame_covers_matrix(self):
        from scripts.coefficient_table import coefficient_frame

        frame = coefficient_frame()
        assert set(zip(frame["N"], frame["r"])) == set(MATRIX)
        assert frame["mismatch"].any()
