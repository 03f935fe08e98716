"""Townes profile, critical mass and the sharp Gagliardo-Nirenberg constant.

Frozen regression values were computed first with an independent oracle:
bisection shooting at dr = 1e-4 (Richardson-consistent across dr = 2e-4 and
1e-4, agreeing to 1e-12) cross-checked against scipy.integrate.solve_ivp at
rtol = 1e-12, and trapezoid quadratures of the oracle profile:

    w(0) = 2.206200864632      (solve_ivp: 2.206200864669)
    a*   = 11.70089650         (r_max = 14: 11.7008965005)
"""

import numpy as np
import pytest

from bec_lab import (
    Grid2D,
    RadialProfile,
    gn_sharpness_check,
    l2_gradient,
    profile_on_grid,
    relax_townes_2d,
    solve_townes,
)
from bec_lab.fields import ComplexField, l2_norm
from bec_lab.model import GPParams, Trap
from bec_lab.townes import ShootingError, critical_mass

from conftest import smooth_random_field

W0_ORACLE = 2.206200864632
ASTAR_ORACLE = 11.70089650


class TestShooting:
    def test_w0_matches_oracle(self, townes_profile):
        assert abs(townes_profile.w0 - W0_ORACLE) < 1e-8

    def test_profile_positive_and_monotone(self, townes_profile):
        w = townes_profile.w
        assert w.min() > 0
        assert np.all(np.diff(w) < 0)

    def test_derivative_vanishes_at_origin(self, townes_profile):
        # quadratic fit near r = 0: the linear coefficient is the w'(0) estimate
        p = townes_profile
        coeffs = np.polyfit(p.r[:6], p.w[:6], 2)
        assert abs(coeffs[1]) < p.dr

    def test_tail_resolved(self, townes_profile):
        assert abs(townes_profile.w[-1]) < 1e-6

    def test_tail_matches_modified_bessel_asymptotics(self, townes_profile):
        # log w + r + log(r)/2 is constant where the e^{-r}/sqrt(r) law holds
        p = townes_profile
        m = (p.r >= 6) & (p.r <= 10)
        c = np.log(p.w[m]) + p.r[m] + 0.5 * np.log(p.r[m])
        assert c.max() - c.min() < 1e-2

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            solve_townes(dr=5e-3)
        with pytest.raises(ValueError):
            solve_townes(r_max=10.0)


class TestCriticalMass:
    def test_a_star_matches_oracle(self, townes_constants):
        assert abs(townes_constants.a_star - ASTAR_ORACLE) / ASTAR_ORACLE < 1e-6

    def test_energy_identities(self, townes_constants):
        assert max(townes_constants.identity_residuals) < 1e-5

    def test_decay_rate_is_minus_one(self, townes_constants):
        assert abs(townes_constants.decay_rate + 1.0) < 5e-3

    def test_grid_independence(self, townes_constants):
        coarse = critical_mass(solve_townes(dr=5e-4, r_max=15.0))
        rel = abs(coarse.a_star - townes_constants.a_star) / townes_constants.a_star
        assert rel < 5e-5  # 4 significant digits

    def test_unconverged_profile_is_flagged(self, townes_profile):
        p = townes_profile
        bad = RadialProfile(r=p.r, w=p.w * (1 + 0.05 * np.exp(-p.r)), w0=p.w0, dw=p.dw)
        with pytest.raises(ShootingError):
            critical_mass(bad)


class TestSharpness:
    def test_extremal_profile_scores_one(self, townes_profile):
        assert abs(gn_sharpness_check(townes_profile) - 1.0) < 1e-5

    def test_rescaled_profile_scores_one(self, townes_profile, astar):
        # the quotient is scale invariant: w(2r) scores 1 as well
        p = townes_profile
        half = p.r <= p.r[-1] / 2
        rescaled = RadialProfile(r=p.r[half], w=np.interp(2 * p.r[half], p.r, p.w),
                                 w0=p.w0, dw=None)
        assert abs(gn_sharpness_check(rescaled, astar) - 1.0) < 1e-5

    def test_gaussian_is_not_extremal(self, astar):
        r = np.linspace(0, 12, 4000)
        gauss = RadialProfile(r=r, w=np.exp(-(r**2) / 2), w0=1.0, dw=None)
        ratio = gn_sharpness_check(gauss, astar)
        assert ratio < 1.0 - 1e-3

    def test_gn_inequality_for_random_fields(self, grid128, astar):
        # int u^4 <= (2/a*) int|grad u|^2 int u^2 with zero violations
        from bec_lab.fields import quartic_integral, spectral_gradient, inner_product

        for seed in range(200):
            u = smooth_random_field(grid128, 5000 + seed, complex_valued=False)
            ux, uy = spectral_gradient(u)
            grad2 = (inner_product(ux, ux) + inner_product(uy, uy)).real
            mass = l2_norm(u) ** 2
            assert quartic_integral(u) <= (2.0 / astar) * grad2 * mass * (1 + 1e-12)


class TestTwoDimensionalRoute:
    def test_relaxation_agrees_with_shooting(self, townes_constants):
        _, mass2d = relax_townes_2d(Grid2D(256, 16.0))
        rel = abs(mass2d - townes_constants.a_star) / townes_constants.a_star
        assert rel < 5e-5

    def test_embedded_profile_solves_field_equation(self, townes_profile):
        # w(|x|) with mu = -1, a = -1 on a flat trap is an exact solution
        grid = Grid2D(512, 16.0)
        w = profile_on_grid(townes_profile, grid)
        res = l2_gradient(w, GPParams(a=-1.0, omega=0.0), Trap.harmonic(0.0), mu=-1.0)
        cubic_scale = l2_norm(ComplexField(grid, w.values**3))
        assert l2_norm(res) / cubic_scale < 1e-4

    def test_mass_normalized_rescaling(self, townes_profile, astar):
        # u = w(sqrt(mu_hat)|x|)/sqrt(a*) is normalized and solves the
        # ground-state equation with a = -a*, mu = -mu_hat
        grid = Grid2D(512, 16.0)
        u = profile_on_grid(townes_profile, grid, scale=1.0)
        u = ComplexField(grid, u.values / np.sqrt(astar))
        assert abs(l2_norm(u) - 1.0) < 1e-5
        res = l2_gradient(u, GPParams(a=-astar, omega=0.0), Trap.harmonic(0.0), mu=-1.0)
        assert l2_norm(res) < 1e-3
