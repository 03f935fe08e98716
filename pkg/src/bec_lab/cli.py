"""Command-line front end: `bec-lab <experiment> --config file [--out dir]`.

Experiments
    townes      solve the radial profile, emit its constants (JSON) and the
                (r, w) samples (CSV)
    solve       one ground-state run at fixed (a, omega)
    sweep       warm-started continuation over a_values x omega_values,
                emitting the energy surface and status map as CSV
    smallomega  rotation study at fixed a: energy gap, imaginary part,
                multiplier drift and vortex count per omega
    critical    existence probe at critical rotation for a perturbed trap,
                classified per interaction strength
    trial       lattice trial states per sigma with certified upper bounds
    uniqueness  multi-seed restarts with phase-aligned discrepancy

Exit codes: 0 success (including classified collapse/deconfinement),
2 configuration error, 3 numerical failure (no classification possible).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig
from .diagnostics import align_phase, decay_fit, decompose, vortex_scan
from .fields import Grid2D, boundary_mass_fraction, save_gpf1
from .flow import (
    STATUS_COLLAPSE,
    STATUS_CONVERGED,
    GroundStateResult,
    SolverOptions,
    continuation_sweep,
    gaussian_initial,
    minimize,
    multistart_uniqueness_probe,
)
from .model import GPParams, Trap, chemical_potential, critical_velocity, energy
from .townes import critical_mass, relax_townes_2d, solve_townes
from .trial import HexLattice, certify_upper_bound, lattice_state

SWEEP_COLUMNS = (
    "a", "omega", "status", "energy", "kinetic", "potential",
    "rotation", "interaction", "mu", "residual", "iters",
)


class NumericalFailure(RuntimeError):
    pass


def _record(cfg: ExperimentConfig, results: dict) -> dict:
    return {
        "config_hash": cfg.config_hash,
        "started": results.pop("_started"),
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "fingerprint": {
            "n": cfg.grid.n,
            "half_width": cfg.grid.half_width,
            "tau": cfg.solver.tau,
            "tol": cfg.solver.tol,
            "seed": cfg.seed,
            "numpy": np.__version__,
            "version": __version__,
        },
        **results,
    }


def _write_json(outdir: Path, name: str, payload: dict) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / name, "w") as fh:
        json.dump(payload, fh, indent=2, default=float)
        fh.write("\n")


def _write_csv(outdir: Path, name: str, columns, rows) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / name, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def _result_row(a: float, omega: float, res: GroundStateResult):
    bd = res.breakdown
    return [
        repr(a), repr(omega), res.status,
        repr(bd.total), repr(bd.kinetic), repr(bd.potential),
        repr(bd.rotation), repr(bd.interaction),
        repr(res.mu), repr(res.residual), res.iters,
    ]


def _audit_sweep_csv(path: Path, tol: float = 1e-8) -> None:
    """Re-read the emitted table and verify mu = energy + interaction on
    every row (the multiplier identity, since interaction = (a/2)||u||_4^4)."""
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["status"] != STATUS_CONVERGED:
                continue
            gap = abs(float(row["mu"]) - float(row["energy"]) - float(row["interaction"]))
            if gap > tol:
                raise NumericalFailure(f"multiplier identity violated in {path}: gap {gap:.2e}")


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def run_townes(cfg: ExperimentConfig, outdir: Path) -> dict:
    report = {"_started": time.strftime("%Y-%m-%dT%H:%M:%S")}
    profile = solve_townes(dr=cfg.townes_dr, r_max=cfg.townes_r_max)
    constants = critical_mass(profile)
    report.update(
        w0=profile.w0,
        a_star=constants.a_star,
        residuals=list(constants.identity_residuals),
        decay_rate=constants.decay_rate,
    )
    if cfg.townes_cross_check:
        _, mass2d = relax_townes_2d(Grid2D(512, 16.0))
        report["a_star_2d"] = mass2d
        report["cross_check_rel"] = abs(mass2d - constants.a_star) / constants.a_star
    rows = [(repr(float(r)), repr(float(w))) for r, w in zip(profile.r, profile.w)]
    _write_csv(outdir, "townes_profile.csv", ("r", "w"), rows)
    _write_json(outdir, "townes.json", _record(cfg, report))
    return report


def run_solve(cfg: ExperimentConfig, outdir: Path) -> dict:
    report = {"_started": time.strftime("%Y-%m-%dT%H:%M:%S")}
    res = minimize(gaussian_initial(cfg.grid), cfg.params, cfg.trap, cfg.solver)
    report.update(
        status=res.status,
        breakdown=res.breakdown.as_dict(),
        mu=res.mu,
        residual=res.residual,
        iters=res.iters,
        boundary_fraction=res.boundary_fraction,
        box_confined=res.box_confined,
    )
    if cfg.snapshots and res.status == STATUS_CONVERGED:
        save_gpf1(res.field, outdir / "solve.gpf1")
    _write_json(outdir, "solve.json", _record(cfg, report))
    if res.status == "MaxIters":
        raise NumericalFailure(f"no convergence and no classification after {res.iters} iters")
    return report


def _sweep_pairs(cfg: ExperimentConfig) -> list[tuple[float, float]]:
    if not cfg.a_values or cfg.omega_values is None:
        raise ConfigError("params.a_values", "sweep needs a_values and omega_values")
    pairs = []
    for i, omega in enumerate(cfg.omega_values):
        row = list(cfg.a_values)
        if i % 2:  # serpentine order: consecutive cells differ in one parameter
            row.reverse()
        pairs += [(a, omega) for a in row]
    return pairs


def run_sweep(cfg: ExperimentConfig, outdir: Path, threads: int = 1) -> dict:
    report = {"_started": time.strftime("%Y-%m-%dT%H:%M:%S")}
    omegas = cfg.omega_values or [cfg.omega or 0.0]
    if not cfg.a_values:
        raise ConfigError("params.a_values", "sweep needs a_values")

    def one_row(omega: float):
        pairs = [(a, omega) for a in cfg.a_values]
        return continuation_sweep(pairs, cfg.trap, cfg.solver, grid=cfg.grid)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_row = list(pool.map(one_row, omegas))
    else:
        per_row = [one_row(om) for om in omegas]

    rows, statuses = [], {}
    for cells in per_row:
        for cell in cells:
            rows.append(_result_row(cell.a, cell.omega, cell.result))
            statuses[f"a={cell.a!r},omega={cell.omega!r}"] = cell.result.status
            if cfg.snapshots and cell.result.status == STATUS_CONVERGED:
                save_gpf1(cell.result.field, outdir / f"sweep_a{cell.a}_om{cell.omega}.gpf1")
    _write_csv(outdir, "sweep.csv", SWEEP_COLUMNS, rows)
    _audit_sweep_csv(outdir / "sweep.csv")
    report["statuses"] = statuses
    _write_json(outdir, "sweep.json", _record(cfg, report))
    return report


def run_smallomega(cfg: ExperimentConfig, outdir: Path) -> dict:
    """Rotation study at fixed a: gaps, imaginary parts, multiplier drift.

    For radially symmetric traps the ground state below the vortex
    nucleation threshold coincides with the nonrotating one, so the gap
    and the aligned imaginary part sit at solver noise; the quadratic
    centrifugal bound omega^2/4 * int |x|^2 |u|^2 is reported alongside so
    the measured gap can be judged against it.
    """
    report = {"_started": time.strftime("%Y-%m-%dT%H:%M:%S")}
    if cfg.a is None or not cfg.omega_values:
        raise ConfigError("params", "smallomega needs scalar a and omega_values")
    omega_star = critical_velocity(cfg.trap)
    if np.isfinite(omega_star) and max(cfg.omega_values) > 0.3 * omega_star:
        raise ConfigError("params.omega_values", f"stay within 0.3 * critical speed {omega_star}")

    base = minimize(gaussian_initial(cfg.grid), GPParams(a=cfg.a, omega=0.0), cfg.trap, cfg.solver)
    if base.status != STATUS_CONVERGED:
        raise NumericalFailure(f"nonrotating reference run failed: {base.status}")
    u0 = base.field.abs()
    e0, mu0 = base.breakdown.total, base.mu

    rows, table = [], []
    partial = False
    for omega in sorted(cfg.omega_values, reverse=True):
        res = minimize(gaussian_initial(cfg.grid), GPParams(a=cfg.a, omega=omega), cfg.trap, cfg.solver)
        if res.status != STATUS_CONVERGED:
            partial = True
            rows.append([repr(omega), res.status] + ["nan"] * 7)
            continue
        al = align_phase(res.field, u0)
        dec = decompose(res.field, u0, al)
        scan = vortex_scan(res.field)
        gap = e0 - res.breakdown.total
        centrifugal = 0.25 * omega**2 * float(
            cfg.grid.h**2 * np.sum(cfg.grid.r2 * np.abs(res.field.values) ** 2)
        )
        rate = decay_fit(res.field, (0.6 * cfg.grid.half_width, 0.8 * cfg.grid.half_width))
        entry = {
            "omega": omega,
            "energy": res.breakdown.total,
            "gap": gap,
            "centrifugal_bound": centrifugal,
            "r_inf": float(np.abs(dec.r.values).max()),
            "w_dev_inf": float(np.abs(dec.w_dev.values).max()),
            "mu_gap": res.mu - mu0,
            "vortices": len(scan.vortices),
            "decay_rate": rate,
        }
        table.append(entry)
        rows.append([
            repr(omega), res.status, repr(entry["energy"]), repr(gap), repr(centrifugal),
            repr(entry["r_inf"]), repr(entry["w_dev_inf"]), repr(entry["mu_gap"]),
            entry["vortices"], repr(rate),
        ])

    slope = float("nan")
    if not partial and len(table) >= 2:
        gaps = np.array([t["gap"] for t in table])
        omegas = np.array([t["omega"] for t in table])
        if np.all(gaps > 0):
            slope = float(np.polyfit(np.log(omegas), np.log(gaps), 1)[0])
    report.update(
        e0=e0, mu0=mu0, table=table, gap_power=slope, partial=partial,
        gaps_at_noise=bool(all(abs(t["gap"]) < 1e-8 for t in table)) if table else False,
    )
    _write_csv(
        outdir, "smallomega.csv",
        ("omega", "status", "energy", "gap", "centrifugal_bound",
         "r_inf", "w_dev_inf", "mu_gap", "vortices", "decay_rate"),
        rows,
    )
    _write_json(outdir, "smallomega.json", _record(cfg, report))
    return report


def run_critical(cfg: ExperimentConfig, outdir: Path) -> dict:
    """Existence probe at critical rotation.

    A cell counts as converged-confined only if runs at n and 2n both
    converge with negligible boundary mass and energies agreeing to 1e-4;
    collapse is its own class; everything else is box-confined/deconfining
    (the box itself confines at critical rotation, so non-agreement means
    the infimum is not attained by a localized state).
    """
    report = {"_started": time.strftime("%Y-%m-%dT%H:%M:%S")}
    if cfg.trap.kind != "harmonic_plus":
        raise ConfigError("trap.kind", "critical probe needs harmonic_plus")
    if not cfg.a_values:
        raise ConfigError("params.a_values", "critical probe needs a_values")
    omega_star = critical_velocity(cfg.trap)
    threshold = omega_star + cfg.trap.far_field_offset  # 2 sqrt(A) + B
    grid_fine = Grid2D(2 * cfg.grid.n, cfg.grid.half_width)

    cells = []
    for a in cfg.a_values:
        params = GPParams(a=a, omega=omega_star)
        res = minimize(gaussian_initial(cfg.grid), params, cfg.trap, cfg.solver)
        entry = {"a": a, "status_coarse": res.status, "energy_coarse": res.breakdown.total}
        if res.status == STATUS_COLLAPSE:
            entry["classification"] = "collapsed"
        elif res.status == STATUS_CONVERGED and res.boundary_fraction < 1e-8:
            fine = minimize(gaussian_initial(grid_fine), params, cfg.trap, cfg.solver)
            entry["status_fine"] = fine.status
            entry["energy_fine"] = fine.breakdown.total if fine.breakdown else float("nan")
            agree = (
                fine.status == STATUS_CONVERGED
                and fine.boundary_fraction < 1e-8
                and abs(fine.breakdown.total - res.breakdown.total) < 1e-4
            )
            entry["classification"] = "converged-confined" if agree else "box-confined/deconfining"
            if agree:
                entry["energy"] = fine.breakdown.total
                entry["below_threshold"] = bool(fine.breakdown.total < threshold)
        else:
            entry["classification"] = "box-confined/deconfining"
        cells.append(entry)

    gauss_bound = certify_upper_bound(
        gaussian_initial(cfg.grid), GPParams(a=cfg.a_values[0], omega=omega_star), cfg.trap
    ).certified_upper_bound
    report.update(
        omega_star=omega_star,
        vanishing_threshold=threshold,
        cells=cells,
        gaussian_bound_first_a=gauss_bound,
    )
    _write_json(outdir, "critical.json", _record(cfg, report))
    return report


def _lattice_grid(radius: float) -> Grid2D:
    """Smallest power-of-two grid that holds a lattice ball of this radius
    in both position and momentum space (margin 6)."""
    half_width = radius + 6.0
    n = 32
    while n < 2.0 * half_width * (radius + 6.0) / math.pi:
        n *= 2
    return Grid2D(n, half_width)


def run_trial(cfg: ExperimentConfig, outdir: Path) -> dict:
    report = {"_started": time.strftime("%Y-%m-%dT%H:%M:%S")}
    if cfg.trap.kind == "power":
        raise ConfigError("trap.kind", "trial states need a quadratic-led trap")
    if abs(cfg.trap.A - 1.0) > 1e-12:
        raise ConfigError("trap.a", "lattice trial states are calibrated for A = 1")
    omega_star = critical_velocity(cfg.trap)
    a = cfg.a if cfg.a is not None else 0.0
    params = GPParams(a=a, omega=omega_star)

    entries = []
    for sigma in cfg.sigma_values:
        lat = HexLattice.from_sigma(sigma, R=cfg.radius_factor * sigma)
        grid = _lattice_grid(lat.R)
        state = lattice_state(lat, grid)
        rep = certify_upper_bound(state, params, cfg.trap)
        entries.append({
            "sigma": sigma, "v": lat.v, "R": lat.R,
            "points": int(len(lat.points())), "grid_n": grid.n,
            "grid_half_width": grid.half_width, **rep.as_dict(),
        })
        if cfg.snapshots:
            save_gpf1(state, outdir / f"trial_sigma{sigma}.gpf1")
    gauss = certify_upper_bound(gaussian_initial(cfg.grid), params, cfg.trap)
    report.update(a=a, omega=omega_star, lattice=entries, gaussian=gauss.as_dict())
    _write_json(outdir, "trial.json", _record(cfg, report))
    return report


def run_uniqueness(cfg: ExperimentConfig, outdir: Path) -> dict:
    report = {"_started": time.strftime("%Y-%m-%dT%H:%M:%S")}
    probe = multistart_uniqueness_probe(
        cfg.params, cfg.trap, cfg.solver, cfg.grid, restarts=cfg.restarts, seed=cfg.seed
    )
    report.update(
        converged=probe["converged"],
        failed=probe["failed"],
        max_discrepancy=probe["max_discrepancy"],
        energies=[r.breakdown.total for r in probe["results"] if r.breakdown],
        statuses=[r.status for r in probe["results"]],
    )
    _write_json(outdir, "uniqueness.json", _record(cfg, report))
    if probe["converged"] < 2:
        raise NumericalFailure("fewer than two restarts converged; no discrepancy measurable")
    return report


_RUNNERS = {
    "townes": run_townes,
    "solve": run_solve,
    "sweep": run_sweep,
    "smallomega": run_smallomega,
    "critical": run_critical,
    "trial": run_trial,
    "uniqueness": run_uniqueness,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="bec-lab", description=__doc__.split("\n")[0])
    parser.add_argument("experiment", choices=sorted(_RUNNERS))
    parser.add_argument("--config", required=True, help="key=value configuration file")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, default=1, help="worker pool size for sweeps")
    args = parser.parse_args(argv)

    try:
        cfg = ExperimentConfig.from_file(args.config)
        if cfg.kind != args.experiment:
            raise ConfigError("experiment.kind", f"config says {cfg.kind!r}, CLI says {args.experiment!r}")
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    outdir = Path(args.out or cfg.out or f"runs/{cfg.kind}")
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"config error: cannot create {outdir}: {exc}", file=sys.stderr)
        return 2
    runner = _RUNNERS[cfg.kind]
    try:
        if cfg.kind == "sweep":
            runner(cfg, outdir, threads=max(1, args.threads))
        else:
            runner(cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failures and anything unclassifiable
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
