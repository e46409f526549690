import math

import numpy as np
import pytest

from besovns.spectral import (
    Grid,
    SpectralField,
    apply_first_order_symbol,
    bernstein_ratio,
    build_cutoffs,
    dyadic_block,
    dyadic_range,
    forward_transform,
    gradient,
    heat_flow,
    hermitian_symmetrize,
    inverse_transform,
    leray_project,
    low_pass,
    lp_norm,
    partial_derivative_symbol,
    projected_divergence,
    reconstruct_from_shells,
    smoothstep,
    spectral_divergence,
    to_physical,
)
from besovns.experiments import make_initial_data


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(1, 32)
    with pytest.raises(ValueError):
        Grid(2, 48)
    with pytest.raises(ValueError):
        Grid(2, 4)
    g = Grid(2, 16)
    assert g.shape == (16, 16)


def test_frequency_convention():
    g = Grid(2, 16)
    k = g.frequencies()
    # Nyquist index maps to +N/2, everything else to (-N/2, N/2)
    assert k[0, 8, 0] == 8.0
    assert k[0, 9, 0] == -7.0
    assert k[0, 1, 0] == 1.0
    assert k[1, 0, 15] == -1.0


class TestCutoffs:
    def test_smoothstep_endpoints(self):
        for order in (1, 2, 4, 6):
            assert smoothstep(0.0, order) == 0.0
            assert smoothstep(1.0, order) == 1.0

    def test_chi_plateau_and_support(self):
        cut = build_cutoffs()
        assert cut.chi(0.0) == 1.0
        assert cut.chi(0.75) == 1.0
        assert cut.chi(4.0 / 3.0) == 0.0
        assert cut.chi(10.0) == 0.0

    def test_phi_telescopes_to_one(self):
        cut = build_cutoffs()
        total = sum(cut.phi(1.0 / 2.0**j) for j in range(-8, 8))
        assert abs(total - 1.0) < 1e-15

    def test_phi_outside_support(self):
        cut = build_cutoffs()
        assert cut.phi(3.0) == 0.0
        assert cut.phi(0.5) == 0.0

    def test_order_validation(self):
        with pytest.raises(ValueError):
            build_cutoffs(order=0)

    def test_axioms_dense_sampling(self):
        cut = build_cutoffs()
        rng = np.random.default_rng(3)
        r = np.concatenate([[0.0], rng.uniform(0, 10, 100_000)])
        chi = cut.chi(r)
        phi = cut.phi(r)
        assert np.all((0 <= chi) & (chi <= 1))
        assert np.all((0 <= phi) & (phi <= 1))
        assert np.max(np.abs(chi[r <= 0.75] - 1)) < 1e-12
        assert np.max(np.abs(chi[r >= 4 / 3])) < 1e-12
        assert np.max(np.abs(phi[(r < 0.75) | (r > 8 / 3)])) < 1e-12
        # chi monotone nonincreasing
        order = np.argsort(r)
        assert np.max(np.diff(chi[order])) <= 1e-12
        # partition of unity over shells, positive radii
        pos = r[r > 0.01]
        total = sum(cut.phi(pos / 2.0**j) for j in range(-12, 10))
        assert np.max(np.abs(total - 1)) < 1e-12

    def test_support_disjointness_two_shells(self):
        cut = build_cutoffs()
        r = np.linspace(0.0, 40.0, 20_000)
        for j in range(-2, 5):
            for jp in range(j + 2, 5):
                overlap = cut.phi(r / 2.0**j) * cut.phi(r / 2.0**jp)
                assert np.max(overlap) == 0.0


def test_dyadic_range_covers_grid(grid2, grid3):
    for g in (grid2, grid3):
        cut = build_cutoffs()
        rng = dyadic_range(g)
        knorm = g.frequency_norm()
        pos = knorm[knorm > 0]
        cover = np.zeros_like(pos)
        counts = np.zeros_like(pos)
        for j in rng.shells():
            vals = cut.phi(pos / 2.0**j)
            cover += vals
            counts += (vals > 0).astype(float)
        assert np.max(np.abs(cover - 1)) < 1e-12
        assert np.min(counts) >= 1
        assert np.max(counts) <= 2


class TestTransforms:
    def test_constant_field(self, grid2):
        f = forward_transform(grid2, np.full(grid2.shape, 3.25))
        assert f.coeffs[0, 0, 0] == pytest.approx(3.25)
        rest = np.abs(f.coeffs).sum() - abs(f.coeffs[0, 0, 0])
        assert rest < 1e-12

    def test_single_mode(self, grid2):
        x = grid2.coordinates()
        samples = np.exp(1j * (2 * x[0] + 5 * x[1]))
        f = forward_transform(grid2, samples[None].real + 1j * samples[None].imag)
        assert abs(f.coeffs[0, 2, 5] - 1.0) < 1e-13
        f.coeffs[0, 2, 5] = 0.0
        assert np.max(np.abs(f.coeffs)) < 1e-13

    def test_roundtrip(self, grid2):
        rng = np.random.default_rng(0)
        samples = rng.standard_normal((2,) + grid2.shape)
        f = forward_transform(grid2, samples)
        back = to_physical(f)
        assert np.max(np.abs(back - samples)) < 1e-12 * np.max(np.abs(samples))

    def test_shape_mismatch(self, grid2):
        with pytest.raises(ValueError):
            forward_transform(grid2, np.zeros((16, 16)))

    def test_parseval(self, grid2):
        rng = np.random.default_rng(1)
        samples = rng.standard_normal((1,) + grid2.shape)
        f = forward_transform(grid2, samples)
        quad = grid2.cell_volume * np.sum(samples**2)
        assert f.l2_norm() ** 2 == pytest.approx(quad, rel=1e-12)
        assert lp_norm(f, 2.0) == pytest.approx(f.l2_norm(), rel=1e-12)


class TestBlocks:
    def test_constant_killed(self, grid2):
        f = forward_transform(grid2, np.full(grid2.shape, 2.0))
        assert dyadic_block(f, 2).l2_norm() == 0.0

    def test_plateau_mode_unchanged(self, grid2):
        coeffs = np.zeros((1,) + grid2.shape, complex)
        coeffs[0, 3, 0] = 0.5
        coeffs[0, -3, 0] = 0.5  # |k| = 3 sits on the plateau of shell j=1
        f = SpectralField(grid2, coeffs, True)
        blk = dyadic_block(f, 1)
        assert np.max(np.abs(blk.coeffs - f.coeffs)) < 1e-15

    def test_reconstruction(self, grid2, grid3):
        for g in (grid2, grid3):
            f = make_initial_data("random_besov", g, seed=5, sigma=0.4)
            rec = reconstruct_from_shells(f)
            assert (rec - f).l2_norm() / f.l2_norm() < 1e-10

    def test_block_orthogonality(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=6)
        rng = dyadic_range(grid2)
        for j in rng.shells():
            for jp in rng.shells():
                if abs(j - jp) >= 2:
                    assert dyadic_block(dyadic_block(f, jp), j).l2_norm() == 0.0

    def test_lowpass_difference_is_shell(self, grid2):
        # chi(r/2) - chi(r) = phi(r) pointwise on the frequency grid
        cut = build_cutoffs()
        knorm = grid2.frequency_norm()
        for j in (-1, 0, 1, 2, 3):
            lhs = cut.chi(knorm / 2.0 ** (j + 1)) - cut.chi(knorm / 2.0**j)
            rhs = cut.phi(knorm / 2.0**j)
            assert np.max(np.abs(lhs - rhs)) < 1e-15
        f = make_initial_data("random_besov", grid2, seed=7)
        for j in (0, 2):
            diff = low_pass(f, j + 1) - low_pass(f, j)
            blk = dyadic_block(f, j)
            assert (diff - blk).l2_norm() < 1e-12 * f.l2_norm()

    def test_lowpass_limits(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=8)
        assert (low_pass(f, 40) - f).l2_norm() < 1e-14 * f.l2_norm()
        assert low_pass(f, -40).l2_norm() == 0.0


class TestHeatFlow:
    def test_identity_at_zero(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=9)
        assert (heat_flow(f, 0.0) - f).l2_norm() == 0.0

    def test_single_mode_decay(self, grid2):
        coeffs = np.zeros((1,) + grid2.shape, complex)
        coeffs[0, 2, 1] = 1.0
        f = SpectralField(grid2, coeffs, True)
        out = heat_flow(f, 0.3)
        assert out.coeffs[0, 2, 1] == pytest.approx(math.exp(-0.3 * 5.0), rel=1e-14)

    def test_negative_time_rejected(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=10)
        with pytest.raises(ValueError):
            heat_flow(f, -0.1)

    def test_semigroup(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=11)
        a = heat_flow(heat_flow(f, 0.2), 0.35)
        b = heat_flow(f, 0.55)
        assert (a - b).l2_norm() < 1e-12 * f.l2_norm()

    def test_shell_decay_bound(self, grid2):
        # on shell j every |k| exceeds (3/4) 2^j, so the L2 norm decays at
        # least like exp(-(9/16) t 4^j)
        f = make_initial_data("random_besov", grid2, seed=12)
        t = 0.21
        for j in dyadic_range(grid2).shells():
            blk = dyadic_block(f, j)
            nb = blk.l2_norm()
            if nb == 0:
                continue
            assert heat_flow(blk, t).l2_norm() <= math.exp(-0.5625 * t * 4.0**j) * nb * (
                1 + 1e-12
            )


class TestLeray:
    def test_gradient_killed(self, grid2):
        g = make_initial_data("gradient_field", grid2, seed=13)
        assert leray_project(g).l2_norm() < 1e-12 * g.l2_norm()

    def test_divfree_fixed(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=14, divergence_free=True)
        assert (leray_project(f) - f).l2_norm() < 1e-12 * f.l2_norm()

    def test_idempotent(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=15)
        once = leray_project(f)
        twice = leray_project(once)
        assert (twice - once).l2_norm() < 1e-12 * max(once.l2_norm(), 1e-300)

    def test_component_count(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=16, components=3)
        with pytest.raises(ValueError):
            leray_project(f)


class TestProjectedDivergence:
    def test_zero(self, grid2):
        W = SpectralField(grid2, np.zeros((4,) + grid2.shape, complex), True)
        assert projected_divergence(W).l2_norm() == 0.0

    def test_taylor_green_annihilated(self, grid2):
        # the advective term of the vortex pair is a pure gradient; verified
        # symbolically in test_taylor_green_is_gradient below
        from besovns.paraproduct import pointwise_tensor

        u = make_initial_data("taylor_green_2d", grid2)
        W = pointwise_tensor(u, u)
        assert projected_divergence(W).l2_norm() < 1e-12

    def test_output_divergence_free(self, grid2):
        rng = np.random.default_rng(17)
        coeffs = hermitian_symmetrize(
            rng.standard_normal((4,) + grid2.shape)
            + 1j * rng.standard_normal((4,) + grid2.shape)
        )
        for axis in range(2):
            sl = [slice(None)] * 3
            sl[axis + 1] = grid2.N // 2
            coeffs[tuple(sl)] = 0.0
        W = SpectralField(grid2, coeffs, False)  # nonzero mean is fine
        out = projected_divergence(W)
        assert out.homogeneous
        assert spectral_divergence(out).l2_norm() < 1e-12 * out.l2_norm()

    def test_component_count(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=18)
        with pytest.raises(ValueError):
            projected_divergence(f)


def test_taylor_green_is_gradient():
    # symbolic oracle: the curl of (u . grad) u vanishes for the vortex pair
    import sympy as sp

    x, y = sp.symbols("x y")
    u1 = sp.cos(x) * sp.sin(y)
    u2 = -sp.sin(x) * sp.cos(y)
    adv1 = sp.diff(u1 * u1, x) + sp.diff(u1 * u2, y)
    adv2 = sp.diff(u2 * u1, x) + sp.diff(u2 * u2, y)
    curl = sp.simplify(sp.diff(adv2, x) - sp.diff(adv1, y))
    assert curl == 0


class TestFirstOrderSymbol:
    def test_partial_derivative(self, grid2):
        coeffs = np.zeros((1,) + grid2.shape, complex)
        coeffs[0, 2, 1] = 1.0
        f = SpectralField(grid2, coeffs, True)
        out = apply_first_order_symbol(partial_derivative_symbol(0), f)
        assert out.coeffs[0, 2, 1] == pytest.approx(2j)

    def test_degree_one_homogeneity(self, grid2):
        sym = lambda k: 1j * (2.0 * k[0] - k[1]) / np.sqrt(np.sum(k**2, axis=0)) * np.sqrt(
            np.sum(k**2, axis=0)
        )
        k = grid2.frequencies().copy()
        k[:, 0, 0] = 1.0
        vals = sym(k)
        assert np.max(np.abs(sym(2.0 * k) - 2.0 * vals)) < 1e-12 * np.max(np.abs(vals))

    def test_blockwise_sum_matches(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=19, components=1)
        sym = partial_derivative_symbol(1)
        direct = apply_first_order_symbol(sym, f)
        acc = None
        for j in dyadic_range(grid2).shells():
            piece = apply_first_order_symbol(sym, dyadic_block(f, j))
            acc = piece if acc is None else acc + piece
        assert (acc - direct).l2_norm() / direct.l2_norm() < 1e-10

    def test_rejects_nonzero_mean(self, grid2):
        coeffs = np.zeros((1,) + grid2.shape, complex)
        coeffs[0, 0, 0] = 1.0
        f = SpectralField(grid2, coeffs, False)
        with pytest.raises(ValueError):
            apply_first_order_symbol(partial_derivative_symbol(0), f)


class TestBernstein:
    def test_l2_gradient_band(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=20)
        for j in dyadic_range(grid2).shells():
            if dyadic_block(f, j).l2_norm() == 0:
                continue
            r = bernstein_ratio(f, j, 2.0, 2.0, 1)
            assert 0.75 - 1e-12 <= r <= 8.0 / 3.0 + 1e-12

    def test_zeroth_order_same_p(self, grid2):
        f = make_initial_data("random_besov", grid2, seed=21)
        r = bernstein_ratio(f, 2, 2.0, 2.0, 0)
        assert r == pytest.approx(1.0, rel=1e-12)

    def test_reverse_inequality_constant(self, grid2):
        # || block ||_2 <= (4/3) 2^-j || grad block ||_2
        f = make_initial_data("random_besov", grid2, seed=22)
        for j in dyadic_range(grid2).shells():
            blk = dyadic_block(f, j)
            if blk.l2_norm() == 0:
                continue
            lhs = lp_norm(blk, 2.0)
            rhs = (4.0 / 3.0) * 2.0 ** (-j) * lp_norm(gradient(blk), 2.0)
            assert lhs <= rhs * (1 + 1e-12)

    def test_zero_block_rejected(self, grid2):
        coeffs = np.zeros((1,) + grid2.shape, complex)
        coeffs[0, 1, 0] = 1.0
        coeffs[0, -1, 0] = 1.0
        f = SpectralField(grid2, coeffs, True)
        with pytest.raises(ValueError):
            bernstein_ratio(f, 5, 2.0, 2.0, 1)


def test_hermitian_symmetrize_exact(grid2):
    rng = np.random.default_rng(23)
    raw = rng.standard_normal((2,) + grid2.shape) + 1j * rng.standard_normal((2,) + grid2.shape)
    sym = hermitian_symmetrize(raw)
    f = SpectralField(grid2, sym, False)
    assert f.is_hermitian(tol=1e-14)
    # symmetric spectra have real physical samples
    samples = inverse_transform(f)
    assert np.max(np.abs(samples.imag)) < 1e-12 * np.max(np.abs(samples))


def test_homogeneous_flag_enforced(grid2):
    coeffs = np.zeros((1,) + grid2.shape, complex)
    coeffs[0, 0, 0] = 1.0
    with pytest.raises(ValueError):
        SpectralField(grid2, coeffs, True)
