import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ebclab import dtn
from ebclab.dtn import DtnKind, apply_dtn, dtn_mode_multiplier, frac_laplacian_half, psi_r_at_0, psi_r_at_h, strip_coeffs
from ebclab.oracles import fd_strip_flux
from ebclab.spectral import SphereGeometry, SurfaceFunction, n_coeffs, surface_inner_product

UNIT = SphereGeometry(1.0, 2.0)
lams = st.floats(1e-3, 1e3)
heights = st.floats(1e-3, 1e2)


def _coeff_system(lam, g1, g2, h):
    k = math.sqrt(lam)
    M = np.array([[1.0, 1.0], [math.exp(k * h), math.exp(-k * h)]])
    return np.linalg.solve(M, [g1, g2])


class TestStripCoeffs:
    def test_example(self):
        A, B = strip_coeffs(1.0, 1.0, 0.0, 1.0)
        assert A == pytest.approx(-0.1565176, abs=1e-7)
        assert B == pytest.approx(1.1565176, abs=1e-7)
        assert (A, B) == pytest.approx(tuple(_coeff_system(1.0, 1.0, 0.0, 1.0)), rel=1e-14)

    @given(lams, st.floats(-5, 5), st.floats(-5, 5), st.floats(1e-2, 5))
    def test_matches_linear_system(self, lam, g1, g2, h):
        if math.sqrt(lam) * h > 30:
            return
        A, B = strip_coeffs(lam, g1, g2, h)
        ref = _coeff_system(lam, g1, g2, h)
        scale = abs(g1) + abs(g2) + 1e-300
        assert abs(A - ref[0]) <= 1e-9 * scale
        assert abs(B - ref[1]) <= 1e-9 * scale

    @given(lams, st.floats(1e-3, 10))
    def test_zero_data(self, lam, h):
        assert strip_coeffs(lam, 0.0, 0.0, h) == (0.0, 0.0)

    def test_large_argument_is_finite(self):
        A, B = strip_coeffs(1e6, 1.0, 1.0, 10.0)
        assert math.isfinite(A) and math.isfinite(B)

    def test_zero_eigenvalue_rejected(self):
        with pytest.raises(ValueError):
            strip_coeffs(0.0, 1.0, 0.0, 1.0)


class TestEndFluxes:
    def test_linear_branch(self):
        assert psi_r_at_0(0.0, 1.0, 0.0, 0.5) == -2.0
        assert psi_r_at_h(0.0, 1.0, 0.0, 0.5) == -2.0

    def test_coth_example(self):
        v = psi_r_at_0(1.0, 1.0, 0.0, 0.01)
        assert v == pytest.approx(-100.00333, abs=1e-5)
        assert v + 100.0 == pytest.approx(-0.01 / 3, rel=1e-3)
        f0, _ = fd_strip_flux(1.0, 1.0, 0.0, 0.01)
        assert v == pytest.approx(f0, rel=1e-6)

    def test_csch_example(self):
        v = psi_r_at_0(4.0, 0.0, 1.0, 1.0)
        assert v == pytest.approx(float(2 / mp.sinh(2)), rel=1e-15)
        assert v == pytest.approx(0.55144, abs=1e-5)
        f0, _ = fd_strip_flux(4.0, 0.0, 1.0, 1.0)
        assert v == pytest.approx(f0, rel=1e-6)

    @pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
    @pytest.mark.parametrize("h", [0.25, 1.0, 4.0])
    def test_against_fd_oracle(self, lam, h):
        f0, fh = fd_strip_flux(lam, 0.7, -0.4, h)
        assert psi_r_at_0(lam, 0.7, -0.4, h) == pytest.approx(f0, rel=1e-6)
        assert psi_r_at_h(lam, 0.7, -0.4, h) == pytest.approx(fh, rel=1e-6)

    def test_flux_defect_is_first_order(self):
        hs = np.array([1e-1, 1e-2, 1e-3, 1e-4])
        d = [abs(psi_r_at_0(2.0, 1.0, 0.3, h) - (0.3 - 1.0) / h) for h in hs]
        assert 0.9 <= np.polyfit(np.log(hs), np.log(d), 1)[0] <= 1.1

    def test_difference_defect_high_precision(self):
        # k (g1 + g2) (tanh(kh/2) - kh/2), evaluated with 50 digits
        mp.mp.dps = 50
        lam, g1, g2 = 2.0, 1.0, 0.3
        for h in (1e-1, 1e-2):
            k = mp.sqrt(lam)
            x = k * mp.mpf(h)
            exact = k * (g1 + g2) * (mp.tanh(x / 2) - x / 2)
            got = psi_r_at_h(lam, g1, g2, h) - psi_r_at_0(lam, g1, g2, h) - 0.5 * h * lam * (g1 + g2)
            assert got == pytest.approx(float(exact), rel=1e-6)


class TestMultiplier:
    def test_first_kind_example(self):
        v = dtn_mode_multiplier(DtnKind.FIRST, 4.0, 1.0)
        assert v == pytest.approx(float(-2 * mp.coth(2)), rel=1e-15)
        assert v == pytest.approx(-2.07463, abs=1e-5)
        f0, _ = fd_strip_flux(4.0, 1.0, 0.0, 1.0)
        assert v == pytest.approx(f0, rel=1e-6)

    def test_infinite_height(self):
        assert dtn_mode_multiplier(DtnKind.SECOND, 1.0, math.inf) == 0.0
        assert dtn_mode_multiplier(DtnKind.COMBINED, 1.0, math.inf) == -1.0
        assert dtn_mode_multiplier(DtnKind.FIRST, 9.0, math.inf) == -3.0

    @pytest.mark.parametrize("kind", list(DtnKind))
    def test_zero_eigenvalue(self, kind):
        assert dtn_mode_multiplier(kind, 0.0, 4.0) == -0.25
        assert dtn_mode_multiplier(kind, 0.0, math.inf) == 0.0

    @pytest.mark.parametrize("H", [0.0, -1.0, math.nan])
    def test_bad_height(self, H):
        with pytest.raises(ValueError):
            dtn_mode_multiplier(DtnKind.FIRST, 1.0, H)

    @given(st.floats(0, 1e4), heights)
    def test_dissipative_signs(self, lam, H):
        assert dtn_mode_multiplier(DtnKind.COMBINED, lam, H) <= 0
        assert dtn_mode_multiplier(DtnKind.FIRST, lam, H) <= 0

    @given(lams, heights)
    def test_combined_is_first_minus_second(self, lam, H):
        # flux at 0 for equal end data: k (csch - coth) = J1 - J2
        j = dtn_mode_multiplier(DtnKind.COMBINED, lam, H)
        j12 = dtn_mode_multiplier(DtnKind.FIRST, lam, H) - dtn_mode_multiplier(DtnKind.SECOND, lam, H)
        assert j == pytest.approx(j12, rel=1e-9, abs=1e-12)

    @given(lams, heights)
    def test_uniform_convergence_in_height(self, lam, H):
        k = math.sqrt(lam)
        if k * H < 1:
            return
        # coth(x) - 1 = 2 e^{-2x} / (1 - e^{-2x}) <= 2 e^{-2x} / (1 - e^{-2}) for x >= 1
        gap = abs(dtn_mode_multiplier(DtnKind.FIRST, lam, H) + k)
        assert gap <= 2 * k * math.exp(-2 * k * H) / (1 - math.exp(-2)) * (1 + 1e-12) + 1e-15 * k

    def test_no_overflow(self):
        for kh in (699.0, 700.0, 701.0, 1e5):
            assert dtn_mode_multiplier(DtnKind.FIRST, 1.0, kh) == -1.0
            assert dtn_mode_multiplier(DtnKind.SECOND, 1.0, kh) == pytest.approx(0.0, abs=1e-300)

    @pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
    @pytest.mark.parametrize("H", [0.25, 1.0, 4.0])
    def test_fd_oracle(self, lam, H):
        f0, fh = fd_strip_flux(lam, 1.0, 0.0, H)
        assert dtn_mode_multiplier(DtnKind.FIRST, lam, H) == pytest.approx(f0, rel=1e-6)
        assert dtn_mode_multiplier(DtnKind.SECOND, lam, H) == pytest.approx(fh, rel=1e-6)


class TestApply:
    def test_constant_mode(self):
        out = apply_dtn(DtnKind.FIRST, 2.0, SurfaceFunction.single(2, 0, 0), UNIT)
        assert out.coeff(0, 0) == -0.5

    def test_fractional_limit(self):
        out = apply_dtn(DtnKind.COMBINED, math.inf, SurfaceFunction.single(2, 1, 0), UNIT)
        assert out.coeff(1, 0) == pytest.approx(-math.sqrt(2), rel=1e-15)

    def test_frac_laplacian(self):
        assert np.all(frac_laplacian_half(SurfaceFunction.single(3, 0, 0, 5.0), UNIT).coeffs == 0)
        out = frac_laplacian_half(SurfaceFunction.single(3, 2, 0), UNIT)
        assert out.coeff(2, 0) == pytest.approx(2.4494897, abs=1e-7)

    def test_frac_laplacian_is_minus_first_kind_at_infinity(self):
        rng = np.random.default_rng(3)
        g = SurfaceFunction(6, rng.standard_normal(n_coeffs(6)))
        a = frac_laplacian_half(g, UNIT).coeffs
        b = apply_dtn(DtnKind.FIRST, math.inf, g, UNIT).coeffs
        assert np.allclose(a, -b, rtol=1e-15, atol=0)

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(list(DtnKind)), st.sampled_from([0.5, 1.0, math.inf]), st.integers(0, 2**32 - 1))
    def test_symmetry(self, kind, H, seed):
        rng = np.random.default_rng(seed)
        g, w = (SurfaceFunction(16, rng.standard_normal(n_coeffs(16))) for _ in range(2))
        lhs = surface_inner_product(apply_dtn(kind, H, g, UNIT), w, UNIT)
        rhs = surface_inner_product(g, apply_dtn(kind, H, w, UNIT), UNIT)
        scale = np.linalg.norm(apply_dtn(kind, H, g, UNIT).coeffs) * np.linalg.norm(w.coeffs)
        assert abs(lhs - rhs) <= 1e-12 * scale

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(list(DtnKind)), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**32 - 1))
    def test_linearity(self, kind, a, b, seed):
        rng = np.random.default_rng(seed)
        g1, g2 = (SurfaceFunction(8, rng.standard_normal(n_coeffs(8))) for _ in range(2))
        lhs = apply_dtn(kind, 0.7, g1 * a + g2 * b, UNIT).coeffs
        rhs = (apply_dtn(kind, 0.7, g1, UNIT) * a + apply_dtn(kind, 0.7, g2, UNIT) * b).coeffs
        assert np.allclose(lhs, rhs, rtol=1e-13, atol=1e-13)

    def test_module_constants(self):
        assert dtn.INF == math.inf
