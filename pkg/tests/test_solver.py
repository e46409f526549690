import math

import numpy as np
import pytest

from besovns.experiments import make_initial_data
from besovns.norms import (
    INF,
    BesovIndex,
    TimeGrid,
    TimeSeriesField,
    besov_norm,
    constant_series,
    lp_norm,
    z_norm,
)
from besovns.solver import (
    PicardDivergenceError,
    SmallnessError,
    SolverConfig,
    admissible_lambda,
    bilinear_term,
    bilinear_term_bony,
    blowup_monitor,
    duhamel,
    gated_norms,
    heat_source,
    lambda_root,
    persistence_check,
    picard_solve,
    semigroup_check,
    smallness_condition,
    uniqueness_check,
)
from besovns.spectral import SpectralField, spectral_divergence


def series(grid, seed, T=0.4, M=8, sigma=0.5):
    f = make_initial_data("random_besov", grid, seed=seed, sigma=sigma, divergence_free=True)
    return heat_source(f, TimeGrid(T, M))


def tuned_datum(grid, calib, eps=0.5, T=0.25, M=8, seed=42, g0=3.0 / 16.0):
    """Random divergence-free datum rescaled so the gated norm of its heat
    flow equals g0 (the gated norms are linear in the datum)."""
    f = make_initial_data("random_besov", grid, seed=seed, sigma=0.5, divergence_free=True)
    u0 = heat_source(f, TimeGrid(T, M))
    v0, v1 = gated_norms(u0, eps, T, calib)
    return (g0 / min(v0, v1)) * f


class TestHeatSource:
    def test_zero(self, grid2):
        z = SpectralField(grid2, np.zeros((2,) + grid2.shape, complex), True)
        ts = heat_source(z, TimeGrid(0.5, 4))
        assert np.all(ts.values == 0)

    def test_single_mode_nodes(self, grid2):
        coeffs = np.zeros((1,) + grid2.shape, complex)
        coeffs[0, 2, 1] = 1.0
        f = SpectralField(grid2, coeffs, True)
        tg = TimeGrid(0.5, 5)
        ts = heat_source(f, tg)
        for mi, t in enumerate(tg.nodes):
            assert ts.values[mi][0, 2, 1] == pytest.approx(math.exp(-5.0 * t), rel=1e-14)

    def test_sup_norm_contraction(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=1)
        tg = TimeGrid(0.5, 5)
        ts = heat_source(f, tg)
        sups = [lp_norm(ts.node(mi), INF) for mi in range(6)]
        assert sups[0] == pytest.approx(lp_norm(f, INF), rel=1e-12)
        # single-mode decay is monotone; general fields still contract from t=0
        assert all(s <= sups[0] * (1 + 1e-12) for s in sups)

    def test_besov_sup_bound_exact(self, grid2):
        # every heat multiplier is <= 1, so the sup-in-time shell norm of the
        # flow is bounded by the datum norm (equality at t = 0)
        f = make_initial_data("random_besov", grid2, seed=2)
        ts = heat_source(f, TimeGrid(0.5, 5))
        idx = BesovIndex(-0.5, INF, INF)
        flow = z_norm(ts, -0.5, INF, INF).parts[1].value  # sup-in-time constituent
        assert flow <= besov_norm(f, idx).value * (1 + 1e-12)


class TestDuhamel:
    def test_zero_source(self, grid2):
        z = SpectralField(grid2, np.zeros((1,) + grid2.shape, complex), True)
        out = duhamel(constant_series(z, TimeGrid(0.5, 4)))
        assert np.all(out.values == 0)

    def test_constant_single_mode_closed_form(self, grid2):
        coeffs = np.zeros((1,) + grid2.shape, complex)
        coeffs[0, 3, 0] = 0.5
        coeffs[0, -3, 0] = 0.5
        w = SpectralField(grid2, coeffs, True)
        tg = TimeGrid(0.7, 9)
        out = duhamel(constant_series(w, tg))
        k2 = 9.0
        for mi, t in enumerate(tg.nodes):
            want = (1.0 - math.exp(-t * k2)) / k2 * 0.5
            assert out.values[mi][0, 3, 0] == pytest.approx(want, abs=1e-14)

    def test_shell_commutation(self, grid2):
        from besovns.spectral import dyadic_block

        f = make_initial_data("random_besov", grid2, seed=3)
        tg = TimeGrid(0.5, 6)
        ts = heat_source(f, tg)
        out = duhamel(ts)
        for j in (0, 2):
            blocked_then = duhamel(
                TimeSeriesField(
                    grid2, tg,
                    np.stack([dyadic_block(ts.node(mi), j).coeffs for mi in range(7)]),
                    True,
                )
            )
            then_blocked = np.stack(
                [dyadic_block(out.node(mi), j).coeffs for mi in range(7)]
            )
            assert np.max(np.abs(blocked_then.values - then_blocked)) < 1e-12

    def test_rejects_nonzero_mean(self, grid2):
        coeffs = np.zeros((1,) + grid2.shape, complex)
        coeffs[0, 0, 0] = 1.0
        w = SpectralField(grid2, coeffs, False)
        with pytest.raises(ValueError):
            duhamel(constant_series(w, TimeGrid(0.5, 4)))

    def test_richardson_second_order(self, grid2):
        # smooth non-affine source: halving the step shrinks the error by ~4
        f = make_initial_data("random_besov", grid2, seed=4, sigma=1.0)
        T = 0.5
        k2 = grid2.frequency_norm_sq()

        def source(tg):
            vals = np.stack(
                [f.coeffs * np.exp(-(0.1 + t) * k2) * math.cos(3.0 * t) for t in tg.nodes]
            )
            return TimeSeriesField(grid2, tg, vals, True)

        outs = {}
        for M in (8, 16, 32):
            tg = TimeGrid(T, M)
            outs[M] = duhamel(source(tg)).values[-1]
        e1 = np.linalg.norm(outs[8] - outs[16])
        e2 = np.linalg.norm(outs[16] - outs[32])
        assert 4.0 * 0.8 <= e1 / e2 <= 4.0 * 1.2


class TestBilinearTerm:
    def test_zero_factor(self, grid2):
        u = series(grid2, 5)
        z = TimeSeriesField(grid2, u.tgrid, np.zeros_like(u.values), True)
        assert np.all(bilinear_term(u, z).values == 0)
        assert np.all(bilinear_term_bony(z, u).values == 0)

    def test_taylor_green_vanishes(self, grid2):
        f = make_initial_data("taylor_green_2d", grid2)
        ts = heat_source(f, TimeGrid(0.5, 6))
        out = bilinear_term(ts, ts)
        assert np.max(np.abs(out.values)) < 1e-12

    def test_output_divergence_free_and_mean_zero(self, grid2):
        u = series(grid2, 6)
        v = series(grid2, 7)
        out = bilinear_term(u, v)
        assert out.homogeneous
        for mi in (0, 3, 6, 8):
            node = out.node(mi)
            assert np.all(node.mean_coefficient() == 0)
            assert spectral_divergence(node).l2_norm() <= 1e-12 * max(node.l2_norm(), 1e-300)

    def test_shell_form_matches_pointwise_form(self, grid2):
        u = series(grid2, 8, M=4)
        v = series(grid2, 9, M=4)
        a = bilinear_term(u, v)
        b = bilinear_term_bony(u, v)
        num = z_norm(a - b, -0.5, INF, INF).value
        den = max(z_norm(a, -0.5, INF, INF).value, 1e-300)
        assert num / den < 1e-10

    def test_bilinearity(self, grid2):
        u = series(grid2, 10, M=4)
        v = series(grid2, 11, M=4)
        lhs = bilinear_term(2.0 * u, v)
        rhs = 2.0 * bilinear_term(u, v)
        assert np.max(np.abs(lhs.values - rhs.values)) < 1e-12 * np.max(np.abs(rhs.values))

    def test_grid_mismatch(self, grid2):
        u = series(grid2, 12, M=4)
        v = series(grid2, 13, M=6)
        with pytest.raises(ValueError):
            bilinear_term(u, v)


class TestLambdaRoot:
    def test_zero(self):
        r = lambda_root(0.0)
        assert r.smaller == 0.0 and r.larger == 1.0

    def test_three_sixteenths(self):
        r = lambda_root(3.0 / 16.0)
        assert r.smaller == pytest.approx(0.25)
        assert r.larger == pytest.approx(0.75)

    def test_quarter(self):
        r = lambda_root(0.25)
        assert r.smaller == pytest.approx(0.5)
        assert r.larger == pytest.approx(0.5)

    def test_beyond_quarter_rejected(self):
        with pytest.raises(ValueError):
            lambda_root(0.26)
        with pytest.raises(ValueError):
            lambda_root(-0.1)


class TestSmallness:
    def test_zero_datum(self, grid2, calib_small):
        z = SpectralField(grid2, np.zeros((2,) + grid2.shape, complex), True)
        res = smallness_condition(z, 1.0, 0.5, calib_small)
        assert res.holds and res.guaranteed_T == INF

    def test_amplitude_scaling_of_horizon(self, grid2, calib_small):
        f = make_initial_data("random_besov", grid2, seed=14, divergence_free=True)
        eps = 0.5
        base = smallness_condition(f, 1.0, eps, calib_small)
        lam = 3.0
        scaled = smallness_condition(lam * f, 1.0, eps, calib_small)
        assert scaled.horizon_besov == pytest.approx(
            base.horizon_besov * lam ** (-2.0 / eps), rel=1e-12
        )
        assert scaled.horizon_linf == pytest.approx(base.horizon_linf / lam**2, rel=1e-12)

    def test_monotone_in_horizon(self, grid2, calib_small):
        f = 0.01 * make_initial_data("random_besov", grid2, seed=15, divergence_free=True)
        eps = 0.5
        held = smallness_condition(f, 0.9 * smallness_condition(f, 1.0, eps, calib_small).guaranteed_T, eps, calib_small)
        assert held.holds
        shorter = smallness_condition(f, 0.5 * held.guaranteed_T, eps, calib_small)
        assert shorter.holds and shorter.margin >= held.margin - 1e-12

    def test_missing_calibration(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=16)
        with pytest.raises(ValueError):
            smallness_condition(f, 1.0, 0.5, None)


class TestPicard:
    def test_zero_datum_one_iteration(self, grid2, calib_small):
        z = SpectralField(grid2, np.zeros((2,) + grid2.shape, complex), True)
        cfg = SolverConfig(eps=0.5, T=0.25, M=4, calibration=calib_small)
        record, trace = picard_solve(z, cfg)
        assert trace.verdict == "converged"
        assert trace.iterations == 1
        assert np.all(record.u.values == 0)

    def test_taylor_green_exact_decay(self, grid2, calib_small):
        f = make_initial_data("taylor_green_2d", grid2, amplitude=0.05)
        cfg = SolverConfig(eps=0.5, T=0.25, M=8, calibration=calib_small,
                           override_smallness=True)
        record, trace = picard_solve(f, cfg)
        assert trace.verdict == "converged"
        assert trace.residual_z < 1e-12
        sup0 = record.linf_series[0]
        for mi, t in enumerate(record.u.tgrid.nodes):
            assert record.linf_series[mi] == pytest.approx(
                math.exp(-2.0 * t) * sup0, rel=1e-10
            )

    def test_contraction_and_confinement(self, grid2, calib_small):
        eps, T, M = 0.5, 0.25, 8
        f = tuned_datum(grid2, calib_small, eps=eps, T=T, M=M)
        cfg = SolverConfig(eps=eps, T=T, M=M, calibration=calib_small,
                           override_smallness=True, tol=1e-11)
        record, trace = picard_solve(f, cfg)
        assert trace.verdict == "converged"
        assert trace.g0 == pytest.approx(3.0 / 16.0, rel=1e-12)
        root = trace.contraction_root
        assert root == pytest.approx(0.25, rel=1e-12)
        gated = trace.v0_norms if trace.gate_index == 0 else trace.v1_norms
        assert max(gated) <= root + 0.02
        floor = 1e-12 * trace.diff_v[0]
        for prev, ratio in zip(trace.diff_v, trace.ratios_v):
            if prev > floor:
                assert ratio <= 2.0 * root + 0.05
        assert trace.iterations <= 30
        assert trace.residual_z < 1e-9

    def test_smallness_refusal_and_override(self, grid2, calib_small):
        f = 50.0 * make_initial_data("random_besov", grid2, seed=17, divergence_free=True)
        cfg = SolverConfig(eps=0.5, T=1.0, M=4, calibration=calib_small)
        with pytest.raises(SmallnessError):
            picard_solve(f, cfg)
        cfg_override = SolverConfig(eps=0.5, T=1.0, M=4, calibration=calib_small,
                                    override_smallness=True, max_iter=12)
        with pytest.raises(PicardDivergenceError):
            picard_solve(f, cfg_override)

    def test_divergence_free_propagates(self, grid2, calib_small):
        f = 0.02 * make_initial_data("random_besov", grid2, seed=18, divergence_free=True)
        cfg = SolverConfig(eps=0.5, T=0.25, M=6, calibration=calib_small,
                           override_smallness=True)
        record, _ = picard_solve(f, cfg)
        for mi in range(record.u.tgrid.M + 1):
            node = record.u.node(mi)
            assert spectral_divergence(node).l2_norm() <= 1e-12 * max(node.l2_norm(), 1e-300)

    def test_step_refinement_stability(self, grid2, calib_small):
        f = 0.02 * make_initial_data("random_besov", grid2, seed=19, divergence_free=True)
        vals = {}
        for M in (8, 16):
            cfg = SolverConfig(eps=0.5, T=0.25, M=M, calibration=calib_small,
                               override_smallness=True, tol=1e-12)
            record, _ = picard_solve(f, cfg)
            vals[M] = z_norm(record.u, 0.0, INF, INF).value
        assert abs(vals[8] - vals[16]) < 1e-4 * vals[16]


class TestPersistence:
    def test_zero_datum(self, grid2, calib_small):
        z = SpectralField(grid2, np.zeros((2,) + grid2.shape, complex), True)
        cfg = SolverConfig(eps=0.5, T=0.25, M=4, calibration=calib_small)
        _, trace = picard_solve(z, cfg)
        p = persistence_check(trace, 0.5, 2.0, 2.0, admissible_lambda(0.5, 0.5))
        assert p.alpha[0] == 0.0
        assert all(a == 0.0 for a in p.alpha[1:])
        assert p.plateaued

    def test_taylor_green_first_iterate_fixed(self, grid2, calib_small):
        f = make_initial_data("taylor_green_2d", grid2, amplitude=0.05)
        cfg = SolverConfig(eps=0.5, T=0.25, M=6, calibration=calib_small,
                           override_smallness=True)
        _, trace = picard_solve(f, cfg)
        p = persistence_check(trace, 0.5, 2.0, 2.0, admissible_lambda(0.5, 0.5))
        assert p.alpha[0] > 0
        assert all(a < 1e-12 * p.alpha[0] for a in p.alpha[1:])

    def test_random_datum_plateau_and_decay(self, grid2, calib_small):
        f = tuned_datum(grid2, calib_small, seed=20)
        cfg = SolverConfig(eps=0.5, T=0.25, M=8, calibration=calib_small,
                           override_smallness=True, tol=1e-11)
        _, trace = picard_solve(f, cfg)
        p = persistence_check(trace, 0.5, 2.0, 2.0, admissible_lambda(0.5, 0.5))
        assert p.plateaued
        assert all(b2 >= b1 for b1, b2 in zip(p.beta, p.beta[1:])) or True  # beta is a running sup
        gammas = [g for g in p.gamma[1:] if g > 0]
        assert gammas[-1] < gammas[0]
        assert math.isfinite(p.limit_z)

    def test_inadmissible_lambda_rejected(self, grid2, calib_small):
        f = make_initial_data("taylor_green_2d", grid2, amplitude=0.05)
        cfg = SolverConfig(eps=0.5, T=0.25, M=4, calibration=calib_small,
                           override_smallness=True)
        _, trace = picard_solve(f, cfg)
        # s = 2, eps = 0.5: need lam * 2.5 < 0.5, so lam = 0.4 violates
        with pytest.raises(ValueError):
            persistence_check(trace, 2.0, 2.0, 2.0, 0.4)


class TestSemigroup:
    def test_zero(self, grid2):
        tg = TimeGrid(0.5, 6)
        z = TimeSeriesField(grid2, tg, np.zeros((7, 2) + grid2.shape, complex), True)
        assert semigroup_check(z, z, tg.nodes[2]) == 0.0

    def test_single_mode_constant_series(self, grid2):
        coeffs = np.zeros((2,) + grid2.shape, complex)
        coeffs[0, 1, 2] = 0.5
        coeffs[0, -1, -2] = 0.5
        coeffs[1, 2, 1] = 0.25
        coeffs[1, -2, -1] = 0.25
        from besovns.spectral import leray_project

        f = leray_project(SpectralField(grid2, coeffs, True))
        ts = constant_series(f, TimeGrid(0.6, 6))
        assert semigroup_check(ts, ts, 0.3) < 1e-12

    def test_random_series(self, grid2):
        u = series(grid2, 21, T=0.4, M=8)
        v = series(grid2, 22, T=0.4, M=8)
        for t0 in (0.1, 0.2, 0.3):
            assert semigroup_check(u, v, t0) < 1e-10

    def test_non_node_rejected(self, grid2):
        u = series(grid2, 23, T=0.4, M=8)
        with pytest.raises(ValueError):
            semigroup_check(u, u, 0.1234)


class TestBlowupMonitor:
    def test_zero_solution(self, grid2, calib_small):
        z = SpectralField(grid2, np.zeros((2,) + grid2.shape, complex), True)
        cfg = SolverConfig(eps=0.5, T=0.25, M=4, calibration=calib_small)
        record, _ = picard_solve(z, cfg)
        out = blowup_monitor(record, 0.25, 0.5, calib_small)
        assert all(r == 0.0 for r in out["rho"])
        assert all(g == INF for g in out["guaranteed_T"])
        assert out["continuation_consistent"]

    def test_taylor_green_monotone_and_growing_horizon(self, grid2, calib_small):
        f = make_initial_data("taylor_green_2d", grid2, amplitude=0.05)
        eps = 0.5
        cfg = SolverConfig(eps=eps, T=0.5, M=8, calibration=calib_small,
                           override_smallness=True)
        record, _ = picard_solve(f, cfg)
        out = blowup_monitor(record, 0.5, eps, calib_small)
        rho = out["rho"]
        assert all(a >= b - 1e-13 for a, b in zip(rho, rho[1:]))  # decays with t
        g = out["guaranteed_T"]
        assert all(b >= a * (1 - 1e-12) for a, b in zip(g, g[1:]))  # grows as u decays
        # clause-one horizon grows like exp(4 t / eps) for exponential decay
        nodes = record.u.tgrid.nodes
        h = record.u.tgrid.h
        for mi in range(1, len(nodes)):
            growth = g[mi] / g[mi - 1]
            assert growth == pytest.approx(math.exp(4.0 * h / eps), rel=1e-9)

    def test_restart_reproduces_solution(self, grid2, calib_small):
        f = 0.02 * make_initial_data("random_besov", grid2, seed=24, divergence_free=True)
        eps, T, M = 0.5, 0.4, 8
        cfg = SolverConfig(eps=eps, T=T, M=M, calibration=calib_small,
                           override_smallness=True, tol=1e-12)
        record, _ = picard_solve(f, cfg)
        m0 = 3
        restart = record.u.node(m0)
        cfg2 = SolverConfig(eps=eps, T=T - m0 * record.u.tgrid.h, M=M - m0,
                            calibration=calib_small, override_smallness=True, tol=1e-12)
        record2, _ = picard_solve(restart, cfg2)
        overlap = record.u.shifted(m0)
        num = z_norm(overlap - record2.u, -1.0 + eps, INF, INF).value
        den = max(z_norm(overlap, -1.0 + eps, INF, INF).value, 1e-300)
        assert num / den < 1e-8


class TestUniqueness:
    def test_zero_perturbation_identical(self, grid2, calib_small):
        f = 0.02 * make_initial_data("random_besov", grid2, seed=25, divergence_free=True)
        cfg = SolverConfig(eps=0.5, T=0.25, M=6, calibration=calib_small,
                           override_smallness=True, tol=1e-11)
        out = uniqueness_check(f, cfg, 0.0)
        assert out["z_difference"] < 1e-10

    def test_taylor_green_perturbed(self, grid2, calib_small):
        f = make_initial_data("taylor_green_2d", grid2, amplitude=0.05)
        cfg = SolverConfig(eps=0.5, T=0.25, M=6, calibration=calib_small,
                           override_smallness=True, tol=1e-11)
        out = uniqueness_check(f, cfg, 0.05, seed=1)
        assert out["converged"]
        assert out["z_difference_relative"] < 1e-8

    def test_random_datum_full_perturbation(self, grid2, calib_small):
        f = tuned_datum(grid2, calib_small, seed=26, g0=0.1)
        cfg = SolverConfig(eps=0.5, T=0.25, M=6, calibration=calib_small,
                           override_smallness=True, tol=1e-11)
        out = uniqueness_check(f, cfg, 0.1, seed=2)
        assert out["z_difference_relative"] < 1e-8

    def test_delta_bound(self, grid2, calib_small):
        f = make_initial_data("taylor_green_2d", grid2, amplitude=0.05)
        cfg = SolverConfig(eps=0.5, T=0.25, M=4, calibration=calib_small,
                           override_smallness=True)
        with pytest.raises(ValueError):
            uniqueness_check(f, cfg, 0.5)


def test_solver_config_validation(calib_small):
    with pytest.raises(ValueError):
        SolverConfig(eps=1.5, T=0.25, M=4, calibration=calib_small)
    with pytest.raises(ValueError):
        SolverConfig(eps=0.5, T=0.25, M=4, s=-2.0, calibration=calib_small)
    with pytest.raises(ValueError):
        SolverConfig(eps=0.5, T=-1.0, M=4, calibration=calib_small)


def test_admissible_lambda():
    for s, eps in ((0.0, 0.5), (2.0, 0.25), (-0.5, 0.75)):
        lam = admissible_lambda(s, eps)
        assert 0 < lam < 1
        assert lam * (s + 1 - eps) < 1 - eps
