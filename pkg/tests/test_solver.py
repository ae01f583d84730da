import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitgrow import (InvalidParameterError, NoConvergenceError,
                       PartitionWeights, RankDeficientError, Regime, RegimeError,
                       SplittingWeights, WeightModel, constant_weight_density,
                       fixed_point_densities, make_grafting, make_preferential,
                       make_table, make_uniform, residuals, solve_finite)
from splitgrow import pref_attachment_densities
from conftest import random_case3_model, random_linear_table


def pref_i():
    return make_preferential(SplittingWeights(1.0, 0.0))


def constant_uniform():
    pw = PartitionWeights(lambda i, j: 2.0 / ((i + j - 2) * (i + j - 1))
                          if i + j - 2 >= 1 else 0.0)
    return WeightModel(pw, SplittingWeights(0.0, 1.0), leaf_mass_limit=0.0)


class TestFixedPoint:
    def test_hand_iterates(self):
        # first sweep: a_1 = s/(w_2+s) = 1/3, everything else 0;
        # second sweep: a_2 = (1/(w_2+w_2)) * 1 * w[2,1] * a_1 = 1/12
        sol = fixed_point_densities(pref_i(), K=16, tol=1e-13, record_iterates=True)
        hist = sol.iterates
        assert hist[0] == pytest.approx(np.zeros(16))
        assert hist[1][0] == pytest.approx(1 / 3, abs=1e-15)
        assert hist[1][1:] == pytest.approx(np.zeros(15))
        assert hist[2][1] == pytest.approx(1 / 12, abs=1e-15)

    def test_plane_recursive_densities(self):
        sol = fixed_point_densities(pref_i(), K=400, tol=1e-14)
        assert sol.regime is Regime.CASE_III and sol.s == pytest.approx(1.0)
        for k, expect in ((1, 2 / 3), (2, 1 / 6), (3, 1 / 15)):
            assert sol[k] == pytest.approx(expect, abs=1e-10)

    def test_recursive_tree_densities(self):
        sol = fixed_point_densities(make_grafting(0.0, 1.0), K=128, tol=1e-14)
        expect = 2.0 ** -np.arange(1, 41)
        assert np.max(np.abs(sol.densities[:40] - expect)) <= 1e-10

    def test_monotone_for_unbounded_families(self):
        for m in (pref_i(), make_uniform(0.0), make_grafting(0.5, 0.5)):
            sol = fixed_point_densities(m, K=128, tol=1e-12)
            assert sol.monotone_ok, m.family

    def test_bounded_table_overshoots_then_settles(self, dmax3):
        # the shifted first row carries coefficient -s at the top degree, so
        # a_1 starts at s/(w_2+s) = 1/3 above its limit 1/4: convergence is
        # correct but not monotone
        sol = fixed_point_densities(dmax3, K=3, tol=1e-14, record_iterates=True)
        assert sol.densities == pytest.approx([0.25, 0.5, 0.25], abs=1e-11)
        assert sol.iterates[1][0] == pytest.approx(1 / 3)
        assert not sol.monotone_ok
        assert sol.monotone_violation > 1e-6

    def test_bounded_truncation_is_forced(self, dmax3):
        sol = fixed_point_densities(dmax3, K=50)
        assert sol.K == 3
        assert any("d_max" in w for w in sol.warnings)

    def test_iterate_sums_bounded(self):
        for m in (pref_i(), make_uniform(0.0), make_grafting(0.5, 0.5)):
            sol = fixed_point_densities(m, K=64, tol=1e-10, record_iterates=True)
            sums = sol.iterates.sum(axis=1)
            moments = (sol.iterates * np.arange(1, 65)).sum(axis=1)
            assert (sums <= 1 + 1e-12).all()
            assert (moments <= 2 + 1e-12).all()

    def test_truncation_stability(self):
        a = fixed_point_densities(pref_i(), K=256, tol=1e-13).densities
        b = fixed_point_densities(pref_i(), K=512, tol=1e-13).densities
        assert np.max(np.abs(a[:128] - b[:128])) <= 1e-9
        u = fixed_point_densities(make_uniform(0.0), K=64, tol=1e-13).densities
        v = fixed_point_densities(make_uniform(0.0), K=128, tol=1e-13).densities
        assert np.max(np.abs(u[:32] - v[:32])) <= 1e-12

    def test_adaptive_mode(self):
        sol = fixed_point_densities(make_uniform(0.5), K=64, tol=1e-12, adaptive=True)
        assert any("adaptive" in w for w in sol.warnings)
        assert sol.sum_a == pytest.approx(1.0, abs=1e-9)

    def test_case2_raises_without_override(self):
        with pytest.raises(RegimeError):
            fixed_point_densities(constant_uniform(), K=64)

    def test_case2_forced_matches_known_solution(self):
        # informational only: the truncated linear solve reproduces
        # a_k = e^{-1}/(k-1)! even though no census limit is guaranteed
        sol = fixed_point_densities(constant_uniform(), K=64, force_unsupported=True)
        assert sol.unsupported and sol.method == "linear-truncated"
        expect = np.array([constant_weight_density(k) for k in range(1, 21)])
        assert np.max(np.abs(sol.densities[:20] - expect)) <= 1e-10

    def test_no_convergence_raises(self):
        with pytest.raises(NoConvergenceError):
            fixed_point_densities(pref_i(), K=64, tol=1e-15, max_iter=3)

    def test_nonlinear_table_warns(self):
        m = make_table(3, [(1, 2, 1.0), (1, 3, 0.5), (2, 2, 1.0), (2, 3, 1.3)])
        sol = fixed_point_densities(m, max_iter=200_000)
        assert any("not linear" in w for w in sol.warnings)
        # without linear weights the shifted fixed point is not normalised
        assert abs(sol.sum_a - 1.0) > 0.1


class TestSolveFinite:
    def test_hand_solved_table(self, dmax3):
        # 3 rho_1 = rho_1 + rho_2 and 8 rho_1 = rho_1 + 2 rho_2 + 3 rho_3
        # give rho = (1/4, 1/2, 1/4); the degree sum is then exactly 2
        sol = solve_finite(dmax3)
        assert sol.densities == pytest.approx([0.25, 0.5, 0.25], abs=1e-12)
        assert sol.sum_ka == pytest.approx(2.0, abs=1e-12)
        assert sol.method == "linear"

    def test_cross_method_agreement(self, dmax3):
        lin = solve_finite(dmax3).densities
        fp = fixed_point_densities(dmax3, K=3, tol=1e-14).densities
        assert np.max(np.abs(lin - fp)) <= 1e-12

    def test_degenerate_dmax2_absorbing(self):
        # degree-2 vertices never split, so all mass drifts into degree 2
        m = make_table(2, [(1, 2, 1.0)])
        sol = solve_finite(m)
        assert sol.densities == pytest.approx([0.0, 1.0], abs=1e-12)
        assert any("zero" in w for w in sol.warnings)

    def test_rank_deficient_raises(self):
        m = make_table(3, [(1, 2, 1.0)])
        with pytest.raises(RankDeficientError):
            solve_finite(m)

    def test_unbounded_model_rejected(self):
        with pytest.raises(InvalidParameterError):
            solve_finite(make_uniform(0.0))

    def test_random_linear_tables_cross_method(self):
        rng = np.random.default_rng(2024)
        for _ in range(25):
            m = random_linear_table(rng, int(rng.integers(2, 8)))
            lin = solve_finite(m)
            fp = fixed_point_densities(m, tol=1e-14, max_iter=300_000)
            assert np.max(np.abs(lin.densities - fp.densities)) <= 1e-10
            assert lin.sum_ka == pytest.approx(2.0, abs=1e-8)


class TestResiduals:
    def test_exact_solution_small_residual(self):
        sw = SplittingWeights(1.0, 0.0)
        exact = pref_attachment_densities(sw, 400)
        rep = residuals(pref_i(), exact)
        assert rep.max_abs <= 1e-10
        assert rep.sum_dev <= 1e-10 and rep.moment_dev <= 1e-9

    def test_zero_vector_flags_trivial_solution(self):
        rep = residuals(pref_i(), np.zeros(64))
        assert rep.max_abs == 0.0
        assert rep.sum_dev == pytest.approx(1.0)

    def test_hand_table_solution_exact(self, dmax3):
        rep = residuals(dmax3, np.array([0.25, 0.5, 0.25]))
        assert rep.max_abs <= 1e-15
        assert rep.sum_dev <= 1e-15 and rep.moment_dev <= 1e-15

    def test_solution_reports_attached(self):
        sol = fixed_point_densities(make_uniform(0.0), K=128)
        assert sol.residuals.max_abs <= 1e-11
        assert sol.residuals.tail_mass >= 0.0

    def test_converged_residual_tracks_tolerance(self):
        tol = 1e-13
        for m in (pref_i(), make_uniform(0.0), make_grafting(0.5, 1.0)):
            sol = fixed_point_densities(m, K=256, tol=tol)
            assert sol.residuals.max_abs <= 10 * tol + sol.residuals.tail_mass + 1e-10

    def test_solution_bounds(self):
        for m in (pref_i(), make_uniform(-0.5), make_grafting(0.5, 0.5)):
            sol = fixed_point_densities(m, K=256)
            d = sol.densities
            assert (d >= 0).all() and (d <= 1).all()
            assert sol.sum_a <= 1 + 1e-9
            assert sol.sum_ka <= 2 + 1e-9


class TestMonotoneConstruction:
    """The from-below iteration has nonnegative coefficients exactly when no
    band mass sits below s, which holds for the unbounded two-banded class;
    randomised instances of it must produce nondecreasing iterates."""

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_random_case3_models_monotone(self, seed):
        rng = np.random.default_rng(seed)
        m = random_case3_model(rng)
        sol = fixed_point_densities(m, K=48, tol=1e-11, record_iterates=True,
                                    max_iter=200_000)
        diffs = np.diff(sol.iterates, axis=0)
        assert diffs.min() >= -1e-15
        assert sol.monotone_ok
