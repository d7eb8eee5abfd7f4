import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from realbeam import specfun
from realbeam.cmatrix import CMatrix, CostFunction, c_linear, c_numeric, c_spherical, u_matrix
from realbeam.errors import ConvergenceError
from realbeam.geometry import LinearArray, OpenArray, SphericalArray


class TestCostFunction:
    def test_values(self):
        assert CostFunction.sin()(math.pi / 2) == 1.0
        assert CostFunction.linear()(math.pi) == 1.0
        assert CostFunction.uniform()(0.3) == 1.0
        step = CostFunction.step(theta0=1.0, floor=0.01)
        assert step(0.5) == 0.01 and step(1.5) == 1.0

    def test_normalization(self):
        assert CostFunction.sin().normalization() == 1.0
        assert_allclose(CostFunction.linear().normalization(), math.pi / 4)
        assert_allclose(CostFunction.uniform().normalization(), math.pi / 2)
        custom = CostFunction.custom(lambda t: np.sin(t))
        assert_allclose(custom.normalization(), 1.0, rtol=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            CostFunction.step(floor=0.0)
        with pytest.raises(ValueError):
            CostFunction(kind="custom")
        with pytest.raises(ValueError):
            CostFunction(kind="parabolic")


class TestCLinear:
    def test_identity_at_half_wavelength(self):
        c = c_linear(25, 0.1, 0.2)
        assert np.max(np.abs(c.entries - np.eye(25))) < 1e-12

    def test_unit_diagonal(self):
        c = c_linear(6, 0.13, 0.31)
        assert_allclose(np.diagonal(c.entries), 1.0, atol=1e-15)

    def test_first_offdiagonal_quarter_wavelength(self):
        # d/lambda = 0.25 -> sinc(0.5) = 2/pi
        c = c_linear(4, 0.25, 1.0)
        assert_allclose(c.entries[0, 1], 2.0 / math.pi, rtol=1e-12)
        # quadrature oracle for the same entry:
        # (1/2) int exp(i 2 pi (d/lambda) cos t) sin t dt
        re, _ = quad(lambda t: 0.5 * math.cos(0.5 * math.pi * math.cos(t)) * math.sin(t), 0, math.pi)
        im, _ = quad(lambda t: 0.5 * math.sin(0.5 * math.pi * math.cos(t)) * math.sin(t), 0, math.pi)
        assert_allclose(c.entries[0, 1], complex(re, im), atol=1e-10)


class TestCSpherical:
    def test_sin_closed_form_diagonal(self):
        order, kr = 2, 1.0
        c = c_spherical(order, kr)
        n = np.arange(order + 1)
        modes = specfun.mode_strength_spectrum(order, kr).values
        expected = (2 * n + 1) * np.abs(modes) ** 2 / (4 * math.pi) ** 2
        assert_allclose(np.diagonal(c.entries), expected, rtol=1e-13)
        assert np.max(np.abs(c.entries - np.diag(np.diagonal(c.entries)))) == 0.0

    def test_quadrature_matches_closed_form(self):
        closed = c_spherical(6, 5.0)
        quadr = c_spherical(6, 5.0, method="quadrature")
        assert np.max(np.abs(closed.entries - quadr.entries)) < 1e-10

    def test_quadrature_sin_offdiagonal_vanishes(self):
        quadr = c_spherical(5, 3.0, method="quadrature")
        off = quadr.entries - np.diag(np.diagonal(quadr.entries))
        assert np.max(np.abs(off)) < 1e-12

    def test_uniform_single_mode(self):
        c = c_spherical(0, 2.0, CostFunction.uniform())
        assert c.entries.shape == (1, 1)
        assert c.entries[0, 0].real > 0

    def test_all_costs_hermitian_psd(self):
        for cost in (
            CostFunction.sin(),
            CostFunction.linear(),
            CostFunction.uniform(),
            CostFunction.step(),
        ):
            c = c_spherical(8, 6.0, cost, method="quadrature")
            assert c.convergence_estimate is not None
            assert c.convergence_estimate < 1e-9

    def test_step_discontinuity_converges(self):
        # the split at theta0 restores spectral convergence
        c = c_spherical(10, 10.0, CostFunction.step(theta0=math.pi / 3, floor=1e-3))
        assert c.convergence_estimate < 1e-9

    def test_too_few_nodes_raises(self):
        with pytest.raises(ConvergenceError):
            c_spherical(10, 10.0, CostFunction.linear(), quadrature_nodes=4)


class TestCNumeric:
    def test_linear_model_matches_closed_form(self):
        model = LinearArray(num_mics=25, spacing=0.1, frequency=1715.0)
        closed = c_linear(25, 0.1, model.wavelength)
        numeric = c_numeric(model)
        assert np.max(np.abs(numeric.entries - closed.entries)) < 1e-10

    def test_single_sensor_any_cost(self):
        model = OpenArray(positions=np.zeros((1, 3)), frequency=500.0)
        for cost in (CostFunction.sin(), CostFunction.uniform(), CostFunction.linear()):
            c = c_numeric(model, cost)
            assert_allclose(c.entries, [[1.0]], rtol=1e-9)

    def test_coincident_sensors_rank_one(self):
        model = OpenArray(positions=np.zeros((2, 3)), frequency=500.0)
        c = c_numeric(model)
        assert_allclose(c.entries, np.ones((2, 2)), rtol=1e-9)
        eigs = np.linalg.eigvalsh(np.real(c.entries))
        assert eigs[0] > -1e-10 and abs(eigs[-1] - 2.0) < 1e-9

    def test_spherical_delegates(self):
        model = SphericalArray(order=3, kr=2.0)
        assert_allclose(
            c_numeric(model).entries, c_spherical(3, 2.0).entries, rtol=1e-13
        )


class TestCMatrixInvariants:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            CMatrix(
                entries=np.array([[1.0, 2.0], [0.5, 1.0]]),
                cost=CostFunction.sin(),
                exactness="closed_form",
            )

    def test_rejects_indefinite_real_part(self):
        with pytest.raises(ValueError):
            CMatrix(
                entries=np.array([[1.0, 3.0], [3.0, 1.0]]),
                cost=CostFunction.sin(),
                exactness="closed_form",
            )


class TestUMatrix:
    def test_trivial(self):
        assert_allclose(u_matrix(0, 1).as_array(), [[1.0]])

    def test_diagonal_values(self):
        u = u_matrix(2, 32)
        assert_allclose(u.diagonal, np.array([1.0, 3.0, 5.0]) / 32.0)

    def test_quadratic_form_all_ones(self):
        u = u_matrix(4, 121)
        d = np.ones(5)
        assert_allclose(d @ (u.diagonal * d), 25.0 / 121.0, rtol=1e-14)

    def test_increasing_positive(self):
        u = u_matrix(6, 10)
        assert np.all(u.diagonal > 0)
        assert np.all(np.diff(u.diagonal) > 0)
