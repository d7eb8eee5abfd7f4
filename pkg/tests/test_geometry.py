import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from realbeam import specfun
from realbeam.errors import LayoutError
from realbeam.geometry import (
    Direction,
    LinearArray,
    OpenArray,
    SphericalArray,
    SphericalLayout,
    WeightVector,
    angle_between,
    steer,
)

from conftest import rotation_matrix, unit_to_angles


class TestDirection:
    def test_validation(self):
        with pytest.raises(ValueError):
            Direction(theta=-0.1)
        d = Direction(theta=1.0, phi=7.0)
        assert 0 <= d.phi < 2 * math.pi

    def test_antipode(self):
        d = Direction.from_degrees(100.0, 160.0)
        anti = d.antipode()
        assert_allclose(math.degrees(anti.theta), 80.0, atol=1e-12)
        assert_allclose(math.degrees(anti.phi), 340.0, atol=1e-12)


class TestAngleBetween:
    def test_same_direction(self):
        d = Direction(0.7, 1.3)
        assert angle_between(d, d) == 0.0

    def test_antipodal_equator(self):
        assert_allclose(
            angle_between(Direction(math.pi / 2, 0.0), Direction(math.pi / 2, math.pi)),
            math.pi,
            atol=1e-12,
        )

    def test_source_antipode_pair(self):
        a = Direction.from_degrees(100.0, 160.0)
        b = Direction.from_degrees(80.0, 340.0)
        assert_allclose(angle_between(a, b), math.pi, atol=1e-9)
        # dot-product oracle
        assert_allclose(float(a.unit_vector @ b.unit_vector), -1.0, atol=1e-12)


class TestLinearArray:
    def test_broadside_alignment(self):
        # lambda = 2 d at f = c / (2 d)
        model = LinearArray(num_mics=3, spacing=0.1, frequency=343.0 / 0.2)
        assert_allclose(model.manifold(math.pi / 2), np.ones(3), atol=1e-12)

    def test_endfire_alternation(self):
        model = LinearArray(num_mics=2, spacing=0.1, frequency=343.0 / 0.2)
        assert_allclose(model.manifold(0.0), np.array([1.0, -1.0]), atol=1e-12)

    def test_dtft_symmetry_real_weights(self):
        model = LinearArray(num_mics=7, spacing=0.07, frequency=1200.0)
        rng = np.random.default_rng(3)
        w = rng.standard_normal(7)
        thetas = rng.uniform(0, math.pi, 50)
        b1 = model.manifold(thetas) @ w
        b2 = model.manifold(math.pi - thetas) @ w
        assert np.max(np.abs(np.abs(b1) - np.abs(b2))) < 1e-12

    def test_matches_collinear_open_array(self):
        m, d, f = 5, 0.08, 900.0
        linear = LinearArray(num_mics=m, spacing=d, frequency=f)
        positions = np.column_stack([np.zeros(m), np.zeros(m), np.arange(m) * d])
        open_model = OpenArray(positions=positions, frequency=f)
        for theta in (0.0, 0.4, 1.1, math.pi / 2, 2.9):
            assert_allclose(
                linear.manifold(theta),
                open_model.manifold(Direction(theta, 0.0)),
                atol=1e-12,
            )

    def test_angle_out_of_range(self):
        model = LinearArray(num_mics=2, spacing=0.1, frequency=1000.0)
        with pytest.raises(ValueError):
            model.manifold(3.5)


class TestOpenArray:
    def test_conjugate_symmetry_reversed_propagation(self):
        rng = np.random.default_rng(11)
        model = OpenArray(positions=rng.uniform(-0.3, 0.3, (6, 3)), frequency=1500.0)
        w = rng.standard_normal(6)
        for _ in range(100):
            k_vec = model.wavenumber * _random_unit(rng)
            b_fwd = model.manifold_wavevector(k_vec) @ w
            b_rev = model.manifold_wavevector(-k_vec) @ w
            assert abs(b_rev - np.conj(b_fwd)) < 1e-12


class TestSphericalArray:
    def test_look_manifold_values(self):
        model = SphericalArray(order=4, kr=2.0)
        n = np.arange(5)
        expected = model.mode_strengths * (2 * n + 1) / (4 * math.pi)
        assert_allclose(model.look_manifold(), expected, rtol=1e-13)

    def test_from_physical_kr(self):
        model = SphericalArray.from_physical(4, radius=0.09, frequency=2400.0)
        assert_allclose(model.kr, 2 * math.pi * 2400.0 * 0.09 / 343.0, rtol=1e-12)

    def test_manifold_grid_shape(self):
        model = SphericalArray(order=3, kr=1.5)
        v = model.manifold(np.linspace(0, math.pi, 9))
        assert v.shape == (9, 4)


class TestWeightVector:
    def test_real_storage(self):
        w = WeightVector(values=np.array([1.0, 2.0]), domain="spatial")
        assert w.is_real and not np.iscomplexobj(w.values)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            WeightVector(values=np.array([1.0]), domain="modal")


class TestLayouts:
    def test_fibonacci_coefficients(self):
        layout = SphericalLayout.fibonacci(32)
        assert layout.num_points == 32
        assert_allclose(layout.alphas, 4 * math.pi / 32)

    def test_gauss_discrete_orthonormality(self):
        layout = SphericalLayout.gauss(4)
        y = specfun.sph_harmonic_matrix(4, layout.thetas, layout.phis)
        gram = (y.conj().T * layout.alphas) @ y
        assert np.max(np.abs(gram - np.eye(25))) < 1e-13

    def test_roundtrip_json(self, tmp_path):
        layout = SphericalLayout.fibonacci(12)
        path = tmp_path / "layout.json"
        layout.save(path)
        loaded = SphericalLayout.load(path)
        assert_allclose(loaded.thetas, layout.thetas)
        assert_allclose(loaded.alphas, layout.alphas)

    def test_rejects_unknown_fields(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"M": 1, "points": [[0.1, 0.2]], "alpha": [1.0], "x": 1}))
        with pytest.raises(LayoutError):
            SphericalLayout.load(path)

    def test_rejects_inconsistent_m(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"M": 2, "points": [[0.1, 0.2]], "alpha": [1.0]}))
        with pytest.raises(LayoutError):
            SphericalLayout.load(path)


class TestSteer:
    def test_monopole_only(self):
        d = WeightVector(values=np.array([1.0, 0.0, 0.0]), domain="phase_mode")
        layout = SphericalLayout.fibonacci(16)
        steered = steer(d, Direction(0.3, 2.0), layout)
        assert_allclose(steered.values, 1.0 / (4 * math.pi), rtol=1e-14)

    def test_real_in_real_out(self):
        rng = np.random.default_rng(5)
        d = WeightVector(values=rng.standard_normal(5), domain="phase_mode")
        steered = steer(d, Direction.from_degrees(100, 160), SphericalLayout.fibonacci(25))
        assert not np.iscomplexobj(steered.values)

    def test_linearity(self):
        rng = np.random.default_rng(9)
        layout = SphericalLayout.fibonacci(30)
        look = Direction(1.1, 0.4)
        d1, d2 = rng.standard_normal(4), rng.standard_normal(4)
        s1 = steer(WeightVector(values=d1, domain="phase_mode"), look, layout).values
        s2 = steer(WeightVector(values=d2, domain="phase_mode"), look, layout).values
        s12 = steer(
            WeightVector(values=2.0 * d1 - 3.0 * d2, domain="phase_mode"), look, layout
        ).values
        assert_allclose(s12, 2.0 * s1 - 3.0 * s2, atol=1e-13)

    def test_undersampled_warning(self):
        d = WeightVector(values=np.ones(4), domain="phase_mode")
        with pytest.warns(UserWarning):
            steered = steer(d, Direction(0.0), SphericalLayout.fibonacci(8))
        assert steered.undersampled

    def test_steered_output_matches_phase_mode_pattern(self):
        # array output of the steered weights over an exact-quadrature
        # layout must reproduce the phase-mode beampattern
        order, kr = 4, 3.0
        model = SphericalArray(order=order, kr=kr)
        rng = np.random.default_rng(17)
        d = WeightVector(values=rng.standard_normal(order + 1), domain="phase_mode")
        look = Direction.from_degrees(70.0, 30.0)
        layout = SphericalLayout.gauss(order)
        steered = steer(d, look, layout)
        modes = model.mode_strengths
        acn = np.concatenate([[modes[n]] * (2 * n + 1) for n in range(order + 1)])
        y_mic = specfun.sph_harmonic_matrix(order, layout.thetas, layout.phis)
        worst = 0.0
        for trial in range(25):
            src_rng = np.random.default_rng(trial)
            theta0 = math.acos(src_rng.uniform(-1, 1))
            phi0 = src_rng.uniform(0, 2 * math.pi)
            y_src = specfun.sph_harmonic_matrix(order, [theta0], [phi0])[0]
            pressures = y_mic @ (acn * np.conj(y_src))
            output = np.sum(layout.alphas * pressures * steered.values)
            gamma = angle_between(look, Direction(theta0, phi0))
            direct = d.values @ model.manifold(gamma)
            worst = max(worst, abs(output - direct))
        assert worst < 1e-8


def _random_unit(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


class TestRotationHelpers:
    def test_rotation_preserves_angles(self):
        rng = np.random.default_rng(2)
        rot = rotation_matrix(rng.standard_normal(3), 1.234)
        a, b = _random_unit(rng), _random_unit(rng)
        before = float(a @ b)
        after = float((rot @ a) @ (rot @ b))
        assert_allclose(after, before, atol=1e-12)
        theta, phi = unit_to_angles(rot @ a)
        assert 0 <= theta <= math.pi and 0 <= phi < 2 * math.pi
