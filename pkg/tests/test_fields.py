"""Grid, quadrature and spectral-calculus contracts."""

import numpy as np
import pytest

from bec_lab import (
    ComplexField,
    Grid2D,
    angular_derivative,
    angular_momentum,
    inner_product,
    l2_norm,
    laplacian,
    load_gpf1,
    normalize,
    quartic_integral,
    save_gpf1,
    spectral_gradient,
)
from bec_lab.fields import FieldError, boundary_mass_fraction

from conftest import smooth_random_field


def gaussian(grid, width=1.0):
    return ComplexField(grid, np.exp(-grid.r2 / (2 * width**2)).astype(complex))


class TestGrid:
    def test_spacing_exact(self):
        g = Grid2D(256, 8.0)
        assert g.h == 2 * 8.0 / 256
        assert g.axis[0] == -8.0
        # domain is [-L, L): the right endpoint is excluded
        assert g.axis[-1] == 8.0 - g.h

    @pytest.mark.parametrize("n", [31, 48, 100, 16])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(FieldError):
            Grid2D(n, 8.0)

    def test_rejects_bad_width(self):
        with pytest.raises(FieldError):
            Grid2D(64, 0.0)

    def test_fields_are_immutable(self, grid64):
        u = gaussian(grid64)
        with pytest.raises(ValueError):
            u.values[0, 0] = 1.0

    def test_rejects_nonfinite(self, grid64):
        vals = np.zeros((64, 64), complex)
        vals[3, 3] = np.nan
        with pytest.raises(FieldError):
            ComplexField(grid64, vals)


class TestInnerProduct:
    def test_normalized_field_has_unit_overlap(self, grid128):
        u = normalize(gaussian(grid128))
        assert abs(inner_product(u, u) - 1.0) < 1e-12

    def test_linearity_in_second_slot(self, grid128):
        u = normalize(gaussian(grid128))
        v = ComplexField(grid128, 1j * u.values)
        assert abs(inner_product(u, v) - 1j) < 1e-12

    def test_gaussian_closed_form(self):
        # <g, g> = int exp(-2|x|^2) = pi/2 for g = exp(-|x|^2)
        g = Grid2D(256, 8.0)
        f = ComplexField(g, np.exp(-g.r2).astype(complex))
        assert abs(inner_product(f, f) - np.pi / 2) < 1e-10

    def test_grid_mismatch_is_an_error(self, grid64, grid128):
        with pytest.raises(FieldError):
            inner_product(gaussian(grid64), gaussian(grid128))

    def test_conjugate_symmetry(self, grid64):
        u = smooth_random_field(grid64, 7)
        v = smooth_random_field(grid64, 8)
        assert abs(inner_product(u, v) - np.conj(inner_product(v, u))) < 1e-14


class TestSpectralGradient:
    def test_plane_wave_is_eigenfunction(self, grid64):
        g = grid64
        kres = 2 * np.pi / (2 * g.half_width)  # grid-resonant wavenumber
        k1, k2 = 3 * kres, -2 * kres
        u = ComplexField(g, np.exp(1j * (k1 * g.x1 + k2 * g.x2)))
        ux, uy = spectral_gradient(u)
        assert np.abs(ux.values - 1j * k1 * u.values).max() < 1e-12
        assert np.abs(uy.values - 1j * k2 * u.values).max() < 1e-12

    def test_constant_has_zero_gradient(self, grid64):
        u = ComplexField(grid64, np.ones((64, 64), complex))
        ux, uy = spectral_gradient(u)
        assert np.abs(ux.values).max() < 1e-13
        assert np.abs(uy.values).max() < 1e-13

    def test_gaussian_kinetic_virial(self):
        # ||grad g||^2 = 1 for the normalized oscillator ground state
        g = Grid2D(256, 8.0)
        u = normalize(gaussian(g))
        ux, uy = spectral_gradient(u)
        kinetic = inner_product(ux, ux).real + inner_product(uy, uy).real
        assert abs(kinetic - 1.0) < 1e-8

    def test_integration_by_parts(self, grid128):
        u = smooth_random_field(grid128, 1)
        v = smooth_random_field(grid128, 2)
        ux, _ = spectral_gradient(u)
        vx, _ = spectral_gradient(v)
        assert abs(inner_product(ux, v) + inner_product(u, vx)) < 1e-9

    def test_parseval(self, grid128):
        u = smooth_random_field(grid128, 3)
        phys = l2_norm(u) ** 2
        uh = np.fft.fft2(u.values)
        spec = grid128.h**2 * np.sum(np.abs(uh) ** 2) / grid128.n**2
        assert abs(phys - spec) / phys < 1e-10


class TestAngularDerivative:
    def test_radial_field_is_annihilated(self, grid128):
        u = gaussian(grid128)
        assert np.abs(angular_derivative(u).values).max() < 1e-10

    def test_unit_vortex_has_unit_winding_charge(self, grid128):
        g = grid128
        u = normalize(ComplexField(g, (g.x1 + 1j * g.x2) * np.exp(-g.r2 / 2)))
        du = angular_derivative(u)
        assert np.abs(du.values - 1j * u.values).max() < 1e-8
        assert abs(angular_momentum(u) - 1.0) < 1e-10

    def test_real_fields_carry_no_angular_momentum(self, grid64):
        for seed in range(10):
            u = smooth_random_field(grid64, 100 + seed, complex_valued=False)
            assert abs(angular_momentum(u)) < 1e-12

    def test_momentum_integral_is_real(self, grid64):
        # the pointwise integrand i(u grad(conj u) - conj(u) grad u)/2 is
        # real by algebra; its quadrature against x_perp must be too
        for seed in range(10):
            u = smooth_random_field(grid64, 200 + seed)
            ux, uy = spectral_gradient(u)
            px = 0.5j * (u.values * np.conj(ux.values) - np.conj(u.values) * ux.values)
            py = 0.5j * (u.values * np.conj(uy.values) - np.conj(u.values) * uy.values)
            integral = grid64.h**2 * np.sum(-grid64.x2 * px + grid64.x1 * py)
            assert abs(integral.imag) < 1e-10
            assert abs(integral.real - angular_momentum(u)) < 1e-10


class TestNormalize:
    def test_idempotent(self, grid64):
        u = normalize(gaussian(grid64))
        v = normalize(u)
        assert np.abs(v.values - u.values).max() < 1e-14
        assert abs(l2_norm(v) ** 2 - 1.0) < 1e-12

    def test_scaling_removed(self, grid64):
        u = normalize(gaussian(grid64))
        v = normalize(ComplexField(grid64, 2.0 * u.values))
        assert np.abs(v.values - u.values).max() < 1e-14

    def test_zero_field_is_an_error(self, grid64):
        with pytest.raises(FieldError):
            normalize(ComplexField(grid64, np.zeros((64, 64), complex)))


class TestLaplacianAndMisc:
    def test_laplacian_of_gaussian(self):
        g = Grid2D(256, 8.0)
        u = gaussian(g)
        # lap e^{-r^2/2} = (r^2 - 2) e^{-r^2/2}
        expect = (g.r2 - 2.0) * u.values
        assert np.abs(laplacian(u).values - expect).max() < 1e-9

    def test_quartic_integral_of_gaussian(self):
        g = Grid2D(256, 8.0)
        u = normalize(gaussian(g))
        assert abs(quartic_integral(u) - 1.0 / (2 * np.pi)) < 1e-8

    def test_boundary_mass(self, grid64):
        u = normalize(gaussian(grid64))
        assert boundary_mass_fraction(u) < 1e-12
        shifted = ComplexField(grid64, np.roll(u.values, grid64.n // 2, axis=0))
        assert boundary_mass_fraction(shifted) > 0.1


class TestSnapshotFormat:
    def test_round_trip(self, grid64, tmp_path):
        u = smooth_random_field(grid64, 11)
        path = tmp_path / "field.gpf1"
        save_gpf1(u, path)
        v = load_gpf1(path)
        assert v.grid == u.grid
        assert np.array_equal(v.values, u.values)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.gpf1"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(FieldError):
            load_gpf1(path)

    def test_truncated_payload_rejected(self, grid64, tmp_path):
        u = smooth_random_field(grid64, 12)
        path = tmp_path / "short.gpf1"
        save_gpf1(u, path)
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(FieldError):
            load_gpf1(path)
