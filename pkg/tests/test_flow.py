"""Normalized gradient flow: benchmarks, failure classification, sweeps."""

import numpy as np
import pytest

from bec_lab import (
    ComplexField,
    GPParams,
    Grid2D,
    SolverOptions,
    Trap,
    continuation_sweep,
    covariant_energy,
    gaussian_initial,
    minimize,
    multistart_uniqueness_probe,
    translate_magnetic,
)
from bec_lab.diagnostics import decay_fit
from bec_lab.fields import quartic_integral
from bec_lab.flow import (
    STATUS_COLLAPSE,
    STATUS_CONVERGED,
    STATUS_DECONFINED,
)

QUICK = SolverOptions(max_iters=40000)


class TestHarmonicBenchmark:
    def test_ground_state_from_cold_start(self, grid128, harmonic):
        # deliberately wrong width so the flow has real work to do
        start = gaussian_initial(grid128, width=1.8)
        res = minimize(start, GPParams(a=0.0, omega=0.0), harmonic, QUICK)
        assert res.status == STATUS_CONVERGED
        assert abs(res.breakdown.total - 2.0) < 5e-6
        exact = np.exp(-grid128.r2 / 2) / np.sqrt(np.pi)
        assert np.abs(np.abs(res.field.values) - exact).max() < 1e-5
        assert abs(res.mu - 2.0) < 1e-6

    def test_critical_rotation_keeps_ground_energy(self, grid128, harmonic):
        res = minimize(gaussian_initial(grid128), GPParams(a=0.0, omega=2.0), harmonic, QUICK)
        assert res.status == STATUS_CONVERGED
        assert abs(res.breakdown.total - 2.0) < 5e-6
        assert res.box_confined  # flagged, not trusted quantitatively

    def test_energy_monotone_after_tenth_step(self, grid128, harmonic):
        start = gaussian_initial(grid128, width=2.5)
        res = minimize(start, GPParams(a=3.0, omega=0.0), harmonic, QUICK)
        assert res.status == STATUS_CONVERGED
        hist = np.asarray(res.energy_history)
        assert np.all(np.diff(hist[10:]) <= 1e-10)
        assert res.monotone_tail

    def test_multiplier_identity_at_convergence(self, solve_cached):
        for a, omega in [(0.0, 0.0), (5.0, 0.0), (5.0, 0.05)]:
            res = solve_cached(a=a, omega=omega)
            assert res.status == STATUS_CONVERGED
            lhs = res.mu
            rhs = res.breakdown.total + 0.5 * a * quartic_integral(res.field)
            assert abs(lhs - rhs) <= 1e-8

    def test_converged_state_decays(self, solve_cached):
        res = solve_cached(a=5.0, omega=0.0)
        g = res.field.grid
        rate = decay_fit(res.field, (0.6 * g.half_width, 0.8 * g.half_width))
        assert rate <= -1.0


class TestFailureModes:
    def test_attractive_collapse(self, grid128, harmonic, astar):
        opts = SolverOptions(tau=1e-3, max_iters=40000)
        res = minimize(gaussian_initial(grid128), GPParams(a=-1.1 * astar, omega=0.0),
                       harmonic, opts)
        assert res.status == STATUS_COLLAPSE

    def test_supercritical_rotation_deconfines(self, grid128, harmonic):
        opts = SolverOptions(tau=1e-3, max_iters=40000)
        res = minimize(gaussian_initial(grid128), GPParams(a=1.0, omega=2.4), harmonic, opts)
        assert res.status == STATUS_DECONFINED

    def test_unnormalized_start_rejected(self, grid64, harmonic):
        bad = ComplexField(grid64, 2.0 * gaussian_initial(grid64).values)
        with pytest.raises(ValueError):
            minimize(bad, GPParams(a=0.0, omega=0.0), harmonic, QUICK)

    def test_rotation_beyond_probing_margin_rejected(self, grid64, harmonic):
        with pytest.raises(ValueError):
            minimize(gaussian_initial(grid64), GPParams(a=0.0, omega=5.0), harmonic, QUICK)


class TestGaugeInvariance:
    def test_magnetic_translation_preserves_covariant_energy(self, grid128, harmonic, astar):
        # converged attractive state at critical rotation; shifting with the
        # matching gauge twist must leave the covariant total unchanged
        params = GPParams(a=-0.5 * astar, omega=2.0)
        res = minimize(gaussian_initial(grid128), params, harmonic, QUICK)
        assert res.status == STATUS_CONVERGED
        before = covariant_energy(res.field, params, harmonic).total
        moved = translate_magnetic(res.field, (0.6, -0.35), 2.0)
        after = covariant_energy(moved, params, harmonic).total
        assert abs(after - before) < 1e-6


class TestSweep:
    def test_energy_increases_with_interaction(self, grid64, harmonic):
        pairs = [(a, 0.0) for a in (0.0, 1.0, 5.0, 20.0)]
        cells = continuation_sweep(pairs, harmonic, QUICK, grid=grid64)
        energies = [c.result.breakdown.total for c in cells]
        assert all(c.result.status == STATUS_CONVERGED for c in cells)
        assert all(b > a for a, b in zip(energies, energies[1:]))
        # warm-started energies agree with independent cold starts
        for (a, _), warm in zip(pairs[1:], energies[1:]):
            cold = minimize(gaussian_initial(grid64), GPParams(a=a, omega=0.0), harmonic, QUICK)
            assert abs(cold.breakdown.total - warm) < 1e-6

    def test_rotation_never_raises_energy(self, grid64, harmonic, astar):
        a = -0.5 * astar
        pairs = [(a, om) for om in (0.0, 0.5, 1.0)]
        cells = continuation_sweep(pairs, harmonic, QUICK, grid=grid64)
        assert all(c.result.status == STATUS_CONVERGED for c in cells)
        energies = [c.result.breakdown.total for c in cells]
        for prev, cur in zip(energies, energies[1:]):
            assert cur <= prev + 1e-9
        # gap bounded by the centrifugal term omega^2/4 <|x|^2>
        for cell in cells[1:]:
            g = cell.result.field.grid
            moment = g.h**2 * float(np.sum(g.r2 * np.abs(cell.result.field.values) ** 2))
            gap = energies[0] - cell.result.breakdown.total
            assert -1e-9 <= gap <= 0.25 * cell.omega**2 * moment + 1e-9

    def test_overcritical_attraction_collapses_everywhere(self, grid64, harmonic, astar):
        opts = SolverOptions(tau=1e-3, max_iters=40000)
        pairs = [(-1.05 * astar, 0.0), (-1.3 * astar, 0.0)]
        cells = continuation_sweep(pairs, harmonic, opts, grid=grid64)
        assert all(c.result.status == STATUS_COLLAPSE for c in cells)

    def test_sweep_survives_failed_cells(self, grid64, harmonic, astar):
        opts = SolverOptions(tau=1e-3, max_iters=40000)
        pairs = [(1.0, 0.0), (-1.2 * astar, 0.0), (2.0, 0.0)]
        cells = continuation_sweep(pairs, harmonic, opts, grid=grid64)
        assert cells[1].result.status == STATUS_COLLAPSE
        assert cells[0].result.status == STATUS_CONVERGED
        assert cells[2].result.status == STATUS_CONVERGED


class TestUniqueness:
    def test_noninteracting_case_is_sharp(self, grid64, harmonic):
        probe = multistart_uniqueness_probe(
            GPParams(a=0.0, omega=0.0), harmonic, QUICK, grid64, restarts=3
        )
        assert probe["failed"] == 0
        assert probe["max_discrepancy"] < 1e-6

    def test_repulsive_slow_rotation(self, grid64, harmonic):
        probe = multistart_uniqueness_probe(
            GPParams(a=5.0, omega=0.05), harmonic, QUICK, grid64, restarts=3
        )
        assert probe["failed"] == 0
        assert probe["max_discrepancy"] < 1e-4

    def test_attractive_slow_rotation(self, grid64, harmonic, astar):
        probe = multistart_uniqueness_probe(
            GPParams(a=-0.5 * astar, omega=0.02), harmonic, QUICK, grid64, restarts=3
        )
        assert probe["failed"] == 0
        assert probe["max_discrepancy"] < 1e-4

    def test_requires_three_seeds(self, grid64, harmonic):
        with pytest.raises(ValueError):
            multistart_uniqueness_probe(GPParams(a=0.0), harmonic, QUICK, grid64, restarts=2)
