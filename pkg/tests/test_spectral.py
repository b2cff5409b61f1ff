import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from voigtbq import spectral
from voigtbq.errors import ConfigError, ConstraintViolation
from voigtbq.spectral import VoigtParams, make_grid

from conftest import random_real_field


class TestGrid:
    @pytest.mark.parametrize("N, cut", [(8, 2), (64, 21), (16, 5), (128, 42)])
    def test_mask_cutoff(self, N, cut):
        grid = make_grid(N)
        assert grid.kmax_retained == cut
        kept = grid.dealias_mask
        assert np.all(np.abs(grid.k1[kept]) <= cut)
        assert np.all(np.abs(grid.k2[kept]) <= cut)
        assert kept.sum() == (2 * cut + 1) ** 2

    @pytest.mark.parametrize("N", [7, 6, 0, -8, 9])
    def test_rejects_bad_sizes(self, N):
        with pytest.raises(ConfigError):
            make_grid(N)

    def test_rejects_non_integer(self):
        with pytest.raises(ConfigError):
            make_grid(16.0)

    def test_lattice_range(self):
        grid = make_grid(8)
        assert grid.k1.min() == -3 and grid.k1.max() == 4
        assert grid.kd1.max() == 3  # Nyquist zeroed for derivatives

    @pytest.mark.parametrize("N", [8, 16, 32])
    def test_mask_symmetric(self, N):
        grid = make_grid(N)
        m = grid.dealias_mask
        assert np.array_equal(spectral.hermitian_partner(m), m)

    def test_arrays_read_only(self):
        grid = make_grid(16)
        with pytest.raises(ValueError):
            grid.kmag[0, 0] = 3.0


class TestTransforms:
    def test_constant(self):
        grid = make_grid(16)
        c = spectral.forward_transform(grid, np.full(grid.shape, 2.5))
        assert c[0, 0] == pytest.approx(2.5, abs=1e-15)
        rest = c.copy()
        rest[0, 0] = 0
        assert np.max(np.abs(rest)) < 1e-15

    def test_sine(self):
        grid = make_grid(16)
        x1, _ = grid.coordinates()
        c = spectral.forward_transform(grid, np.sin(x1))
        assert c[grid.index_of((1, 0))] == pytest.approx(1 / 2j, abs=1e-15)
        assert c[grid.index_of((-1, 0))] == pytest.approx(-1 / 2j, abs=1e-15)
        c[grid.index_of((1, 0))] = 0
        c[grid.index_of((-1, 0))] = 0
        assert np.max(np.abs(c)) < 1e-15

    def test_round_trip(self, rng):
        grid = make_grid(64)
        f = rng.standard_normal(grid.shape)
        back = spectral.inverse_transform(grid, spectral.forward_transform(grid, f))
        assert np.max(np.abs(back - f)) / np.max(np.abs(f)) < 1e-13

    def test_axis_convention(self):
        grid = make_grid(16)
        _, x2 = grid.coordinates()
        c = spectral.forward_transform(grid, np.cos(3 * x2))
        assert c[grid.index_of((0, 3))] == pytest.approx(0.5, abs=1e-15)

    def test_shape_mismatch(self):
        grid = make_grid(16)
        with pytest.raises(ValueError):
            spectral.forward_transform(grid, np.zeros((16, 8)))
        with pytest.raises(ValueError):
            spectral.inverse_transform(grid, np.zeros((8, 8), complex))


class TestMultiplier:
    def test_zero_mode(self):
        for eps in (0.0, 0.3, 5.0):
            assert spectral.voigt_inverse_multiplier((0, 0), VoigtParams(eps, 1, 1), 1.7) == 1.0

    def test_pythagorean(self):
        assert spectral.voigt_inverse_multiplier((3, 4), VoigtParams(1, 1, 1), 1.0) == pytest.approx(1 / 6)

    def test_unregularized(self):
        p = VoigtParams(0.0, 2.5, 0.3)
        for k in [(1, 0), (7, -3), (21, 21)]:
            assert spectral.voigt_inverse_multiplier(k, p, 2.5) == 1.0

    def test_array_matches_scalar(self):
        grid = make_grid(16)
        p = VoigtParams(0.7, 4 / 3, 2 / 3)
        sym = spectral.voigt_symbol(grid, p.epsilon, p.alpha)
        for k in [(0, 0), (1, 2), (-5, 3), (8, 8)]:
            assert sym[grid.index_of(k)] == pytest.approx(spectral.voigt_inverse_multiplier(k, p, p.alpha), rel=1e-15)

    @given(
        eps=st.floats(1e-3, 10.0),
        exponent=st.floats(0.0, 4.0),
        a=st.floats(0.0, 100.0),
        b=st.floats(0.0, 100.0),
    )
    def test_monotone_in_k(self, eps, exponent, a, b):
        lo, hi = sorted((a, b))
        p = VoigtParams(eps, exponent, exponent)
        assert spectral.voigt_inverse_multiplier((hi, 0), p, exponent) <= spectral.voigt_inverse_multiplier((lo, 0), p, exponent)

    def test_params_validation(self):
        with pytest.raises(ConfigError, match="epsilon"):
            VoigtParams(-1.0, 1, 1)
        with pytest.raises(ConfigError, match="beta"):
            VoigtParams(1.0, 1, float("nan"))


class TestBiotSavart:
    def test_zero(self):
        grid = make_grid(16)
        u1, u2 = spectral.biot_savart(grid, grid.zeros())
        assert not u1.any() and not u2.any()

    @pytest.mark.parametrize(
        "omega, expected",
        [
            # psi = -sin x1 solves Delta psi = sin x1; u = (-d2 psi, d1 psi) = (0, -cos x1)
            (lambda x1, x2: np.sin(x1), lambda x1, x2: (0 * x1, -np.cos(x1))),
            # psi = -sin x2; u = (cos x2, 0)
            (lambda x1, x2: np.sin(x2), lambda x1, x2: (np.cos(x2), 0 * x2)),
            # psi = -sin x1 sin x2 / 2; u = (sin x1 cos x2 / 2, -cos x1 sin x2 / 2)
            (
                lambda x1, x2: np.sin(x1) * np.sin(x2),
                lambda x1, x2: (0.5 * np.sin(x1) * np.cos(x2), -0.5 * np.cos(x1) * np.sin(x2)),
            ),
        ],
    )
    def test_streamfunction_cases(self, omega, expected):
        grid = make_grid(16)
        x1, x2 = grid.coordinates()
        w = spectral.forward_transform(grid, omega(x1, x2))
        u1_hat, u2_hat = spectral.biot_savart(grid, w)
        u1 = spectral.inverse_transform(grid, u1_hat)
        u2 = spectral.inverse_transform(grid, u2_hat)
        e1, e2 = expected(x1, x2)
        assert np.max(np.abs(u1 - e1)) < 1e-14
        assert np.max(np.abs(u2 - e2)) < 1e-14
        # curl recovers omega: -d2 u1 + d1 u2
        curl = -1j * grid.kd2 * u1_hat + 1j * grid.kd1 * u2_hat
        assert np.max(np.abs(curl - w)) < 1e-15

    def test_rejects_mean_vorticity(self):
        grid = make_grid(16)
        w = grid.zeros()
        w[0, 0] = 1.0
        w[grid.index_of((1, 0))] = 0.5
        with pytest.raises(ConstraintViolation):
            spectral.biot_savart(grid, w)

    def test_tiny_mean_tolerated(self, rng):
        grid = make_grid(16)
        w = random_real_field(grid, rng, mean_free=True)
        w[0, 0] = 1e-14 * spectral.l2_norm(w)
        spectral.biot_savart(grid, w)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), N=st.sampled_from([8, 16, 32]))
    def test_divergence_free_and_real(self, seed, N):
        grid = make_grid(N)
        w = random_real_field(grid, np.random.default_rng(seed), mean_free=True)
        u1, u2 = spectral.biot_savart(grid, w)
        unorm = np.sqrt(spectral.l2_norm(u1) ** 2 + spectral.l2_norm(u2) ** 2)
        assert np.max(np.abs(grid.k1 * u1 + grid.k2 * u2)) < 1e-13 * unorm
        for c in (u1, u2):
            assert spectral.hermitian_defect(c) <= 1e-13 * np.max(np.abs(c))
        assert u1[0, 0] == 0 and u2[0, 0] == 0


class TestDealias:
    def test_inside_unchanged(self, rng):
        grid = make_grid(16)
        c = random_real_field(grid, rng)
        assert np.array_equal(spectral.dealias(grid, c), c)

    def test_nyquist_removed(self):
        grid = make_grid(16)
        c = grid.zeros()
        c[grid.index_of((8, 0))] = 1.0
        assert not spectral.dealias(grid, c).any()

    def test_idempotent(self, rng):
        grid = make_grid(32)
        c = spectral.forward_transform(grid, rng.standard_normal(grid.shape))
        once = spectral.dealias(grid, c)
        assert np.array_equal(spectral.dealias(grid, once), once)


class TestDivergenceFlux:
    def test_zero_scalar(self, rng):
        grid = make_grid(16)
        u1, u2 = spectral.biot_savart(grid, random_real_field(grid, rng, mean_free=True))
        assert not spectral.divergence_flux(grid, u1, u2, grid.zeros()).any()

    def test_hand_calculus(self):
        # u = (0, -cos x1), f = sin x2: div(u f) = d2(-cos x1 sin x2) = -cos x1 cos x2
        grid = make_grid(16)
        x1, x2 = grid.coordinates()
        u1 = grid.zeros()
        u2 = spectral.forward_transform(grid, -np.cos(x1))
        f = spectral.forward_transform(grid, np.sin(x2))
        got = spectral.inverse_transform(grid, spectral.divergence_flux(grid, u1, u2, f))
        assert np.max(np.abs(got + np.cos(x1) * np.cos(x2))) < 1e-14

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), N=st.sampled_from([16, 32]))
    def test_structure(self, seed, N):
        grid = make_grid(N)
        rng = np.random.default_rng(seed)
        u1, u2 = spectral.biot_savart(grid, random_real_field(grid, rng, mean_free=True))
        f = random_real_field(grid, rng)
        flux = spectral.divergence_flux(grid, u1, u2, f)
        # exact zero mean, dealiased, real
        assert flux[0, 0] == 0
        assert not flux[~grid.dealias_mask].any()
        assert spectral.hermitian_defect(flux) <= 1e-13 * np.max(np.abs(flux))
        # skew-symmetry: <f, div(u f)> = 0
        unorm = np.sqrt(spectral.l2_norm(u1) ** 2 + spectral.l2_norm(u2) ** 2)
        pairing = spectral.inner(f, flux)
        assert abs(pairing) < 1e-12 * unorm * spectral.l2_norm(f) ** 2
