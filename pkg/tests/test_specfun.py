import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from realbeam import specfun
from realbeam.errors import ModeStrengthUnderflowError


class TestLegendre:
    def test_p0_constant(self):
        assert specfun.legendre_p(0, 0.3) == 1.0

    def test_endpoint_exact(self):
        for n in (1, 3, 7, 12):
            assert specfun.legendre_p(n, 1.0) == 1.0
            assert specfun.legendre_p(n, -1.0) == (-1.0) ** n

    def test_p3_explicit(self):
        # P_3(x) = (5x^3 - 3x)/2
        assert_allclose(specfun.legendre_p(3, 0.5), -0.4375, rtol=0, atol=1e-15)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            specfun.legendre_p(2, 1.0 + 1e-9)
        # slack below 1e-12 is clipped, not rejected
        assert specfun.legendre_p(2, 1.0 + 1e-13) == 1.0

    def test_orthogonality_by_quadrature(self):
        # integral of P_n P_m over [-1, 1] equals 2/(2n+1) delta_nm
        x, w = np.polynomial.legendre.leggauss(64)
        p = specfun.legendre_p_all(12, x)
        gram = (p * w) @ p.T
        expected = np.diag(2.0 / (2.0 * np.arange(13) + 1.0))
        assert np.max(np.abs(gram - expected)) < 1e-10

    def test_vectorized(self):
        x = np.linspace(-1, 1, 11)
        vals = specfun.legendre_p(4, x)
        assert vals.shape == x.shape


class TestSphHarmonic:
    def test_monopole(self):
        assert_allclose(
            specfun.sph_harmonic(0, 0, 1.234, 2.345),
            1.0 / math.sqrt(4 * math.pi),
            rtol=1e-12,
        )

    def test_dipole_at_pole(self):
        assert_allclose(
            specfun.sph_harmonic(1, 0, 0.0, 0.0),
            math.sqrt(3.0 / (4 * math.pi)),
            rtol=1e-12,
        )

    def test_addition_theorem_same_point(self):
        # sum_m |Y_n^m|^2 = (2n+1)/(4 pi), brute-force over m
        n, theta, phi = 4, 1.1, 2.3
        total = sum(
            specfun.sph_harmonic(n, m, theta, phi)
            * np.conj(specfun.sph_harmonic(n, m, theta, phi))
            for m in range(-n, n + 1)
        )
        assert_allclose(total.real, (2 * n + 1) / (4 * math.pi), rtol=1e-12)
        assert abs(total.imag) < 1e-15

    def test_conjugation_exact(self):
        for n in range(6):
            for m in range(1, n + 1):
                lhs = specfun.sph_harmonic(n, -m, 0.7, 1.9)
                rhs = (-1) ** m * np.conj(specfun.sph_harmonic(n, m, 0.7, 1.9))
                assert lhs == rhs  # identical bit pattern by construction

    def test_degree_out_of_range(self):
        with pytest.raises(ValueError):
            specfun.sph_harmonic(2, 3, 0.1, 0.2)

    def test_matrix_shape_and_order(self):
        theta = np.array([0.3, 1.2])
        phi = np.array([0.1, 4.0])
        y = specfun.sph_harmonic_matrix(3, theta, phi)
        assert y.shape == (2, 16)
        assert_allclose(y[0, 6], specfun.sph_harmonic(2, 0, 0.3, 0.1))  # index n^2+n+m


class TestSphBessel:
    def test_j0_closed_form(self):
        assert_allclose(specfun.sph_bessel("j", 0, 1.0), math.sin(1.0), rtol=1e-14)

    def test_j1_closed_form(self):
        assert_allclose(
            specfun.sph_bessel("j", 1, 1.0), math.sin(1.0) - math.cos(1.0), rtol=1e-13
        )

    def test_y0_closed_form(self):
        assert_allclose(specfun.sph_bessel("y", 0, 1.0), -math.cos(1.0), rtol=1e-14)

    def test_j_at_zero_exact(self):
        assert specfun.sph_bessel("j", 0, 0.0) == 1.0
        assert specfun.sph_bessel("j", 3, 0.0) == 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            specfun.sph_bessel("y", 0, 0.0)
        with pytest.raises(ValueError):
            specfun.sph_bessel("j", 0, -1.0)
        with pytest.raises(ValueError):
            specfun.sph_bessel_deriv("j", 1, 0.0)
        with pytest.raises(ValueError):
            specfun.sph_bessel("q", 0, 1.0)

    def test_wronskian(self):
        # j_n(x) y_n'(x) - j_n'(x) y_n(x) = 1/x^2
        for n in range(16):
            for x in (0.5, 1.0, 5.0, 10.0):
                wron = specfun.sph_bessel("j", n, x) * specfun.sph_bessel_deriv(
                    "y", n, x
                ) - specfun.sph_bessel_deriv("j", n, x) * specfun.sph_bessel("y", n, x)
                assert_allclose(wron, 1.0 / x**2, rtol=1e-9)

    def test_derivative_identity(self):
        # f_n' = f_{n-1} - (n+1)/x f_n
        for kind in ("j", "y"):
            for n in (1, 4, 9):
                x = 3.7
                lhs = specfun.sph_bessel_deriv(kind, n, x)
                rhs = specfun.sph_bessel(kind, n - 1, x) - (n + 1) / x * specfun.sph_bessel(
                    kind, n, x
                )
                assert_allclose(lhs, rhs, rtol=1e-12)


class TestModeStrength:
    def test_low_frequency_limit(self):
        # scattering term vanishes as kr -> 0, leaving 4 pi j_0 -> 4 pi
        assert_allclose(abs(specfun.mode_strength(0, 1e-6)), 4 * math.pi, rtol=1e-3)

    def test_high_order_decay(self):
        ratio = abs(specfun.mode_strength(12, 4.0)) / abs(specfun.mode_strength(4, 4.0))
        assert ratio < 1e-3

    def test_near_flat_at_kr_equal_order(self):
        mags = np.abs(specfun.mode_strength_spectrum(10, 10.0).values)
        assert mags.max() / mags.min() < 4.0

    def test_finiteness_grid(self):
        for kr in np.logspace(-3, math.log10(30.0), 25):
            values = specfun.mode_strength_spectrum(15, kr).values
            assert np.all(np.isfinite(values))

    def test_monotone_decay_above_kr(self):
        for kr in (0.5, 2.0, 5.0):
            mags = np.abs(specfun.mode_strength_spectrum(15, kr).values)
            start = math.ceil(kr)
            assert np.all(np.diff(mags[start:]) < 0)

    def test_spectrum_invariants(self):
        spec = specfun.mode_strength_spectrum(6, 2.5)
        assert spec.values.shape == (7,)
        assert spec.values.flags.writeable is False

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            specfun.mode_strength(0, 0.0)
        with pytest.raises(ValueError):
            specfun.mode_strength(-1, 1.0)

    def test_spectrum_rejects_nonfinite(self):
        with pytest.raises(ModeStrengthUnderflowError):
            specfun.ModeStrengthSpectrum(order=1, kr=1.0, values=np.array([1.0, np.inf]))
