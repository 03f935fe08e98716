"""Ground states by normalized gradient flow, with failure-mode detection.

One step of the discrete flow, from a unit-mass iterate u with multiplier
mu(u) = E(u) + (a/2)||u||_4^4:

    u*  = u - tau * [ (V - mu) u + a |u|^2 u + i omega x_perp.grad(u) ]
    u** = F^-1[ F[u*] / (1 + tau |k|^2) ]          (Laplacian implicit)
    u'  = u** / ||u**||

Subtracting the current multiplier inside the explicit part is what makes
the scheme unbiased: at a fixed point the renormalization constant is
exactly 1, so the limit solves the true Euler-Lagrange equation

    -lap(u) + (V - mu) u + i omega x_perp.grad(u) + a |u|^2 u = 0

with no O(tau) distortion of trap, rotation or interaction.  (Take the
real inner product of the fixed-point identity with u: every term cancels
against mu except (c - 1)(kinetic + 1/tau), forcing c = 1.)

Failure modes are classified, not chased:

  * CollapseDetected -- the quartic norm grows past `collapse_threshold`
    times its initial value while the effective width 1/sqrt(||u||_4^4)
    drops below four grid cells: the attractive-regime signature of
    nonexistence (a <= -critical mass).
  * DeconfinementDetected -- at least `boundary_threshold` of the mass sits
    in the outer 10% band of the box for 200 consecutive steps: rotation at
    or beyond the critical speed (or a repulsive gas pushed over a finite
    barrier) escaping to infinity.

Near-critical rotation (omega >= 98% of the critical speed) is flagged
`box_confined`: there the box itself confines and quantitative results are
truncation artifacts.
"""

from __future__ import annotations

from collections import deque
import dataclasses
from dataclasses import dataclass

import numpy as np

from .fields import ComplexField, Grid2D, boundary_mass_fraction, l2_norm
from .model import EnergyBreakdown, GPParams, Trap, critical_velocity

__all__ = [
    "SolverOptions",
    "GroundStateResult",
    "minimize",
    "continuation_sweep",
    "multistart_uniqueness_probe",
    "gaussian_initial",
    "vortex_initial",
    "random_phase_initial",
    "STATUS_CONVERGED",
    "STATUS_COLLAPSE",
    "STATUS_DECONFINED",
    "STATUS_MAXITERS",
]

STATUS_CONVERGED = "Converged"
STATUS_COLLAPSE = "CollapseDetected"
STATUS_DECONFINED = "DeconfinementDetected"
STATUS_MAXITERS = "MaxIters"


@dataclass(frozen=True)
class SolverOptions:
    tau: float = 5e-3
    max_iters: int = 20000
    tol: float = 1e-7
    collapse_threshold: float = 50.0
    boundary_threshold: float = 0.05
    check_interval: int = 25
    deconfine_steps: int = 200
    monotone_window: int = 100

    def __post_init__(self):
        if self.tau <= 0 or self.tol <= 0:
            raise ValueError("tau and tol must be positive")


@dataclass(frozen=True)
class GroundStateResult:
    field: ComplexField
    breakdown: EnergyBreakdown
    mu: float
    residual: float
    iters: int
    status: str
    boundary_fraction: float
    box_confined: bool
    monotone_tail: bool
    energy_history: list = dataclasses.field(default_factory=list, repr=False)

    @property
    def energy(self) -> float:
        return self.breakdown.total


def _stable_tau(opts: SolverOptions, params: GPParams, grid: Grid2D, vmax: float) -> float:
    """Cap the step once at start-up so the explicit trap and rotation terms
    stay inside the stability region of the semi-implicit step; the step is
    then fixed for the whole run."""
    tau = opts.tau
    if vmax > 0:
        tau = min(tau, 1.5 / vmax)
    if params.omega > 0:
        tau = min(tau, 0.5 / (params.omega**2 * grid.half_width**2))
    return tau


def minimize(
    initial: ComplexField,
    params: GPParams,
    trap: Trap,
    opts: SolverOptions = SolverOptions(),
) -> GroundStateResult:
    """Run the flow from `initial` (must be normalized) until the sup-norm
    of the Euler-Lagrange residual drops below opts.tol or a failure mode
    is detected."""
    if abs(l2_norm(initial) - 1.0) > 1e-8:
        raise ValueError("initial field must be normalized")
    omega_star = critical_velocity(trap)
    if np.isfinite(omega_star) and params.omega > 2.0 * omega_star:
        raise ValueError(f"omega={params.omega} is beyond the probing margin (2 * {omega_star})")

    g = initial.grid
    n, h = g.n, g.h
    h2 = h * h
    x1, x2 = g.x1, g.x2
    k = g.wavenumbers
    ik1 = (1j * k)[:, None]
    ik2 = (1j * k)[None, :]
    k2 = g.k_squared
    v = trap.potential(g)
    a, omega = params.a, params.omega
    tau = _stable_tau(opts, params, g, float(v.max()))
    damp = 1.0 / (1.0 + tau * k2)
    band = g.boundary_band(0.1)
    box_confined = np.isfinite(omega_star) and omega > 0.98 * omega_star

    u = initial.values.copy()
    quart0 = float(h2 * np.sum(np.abs(u) ** 4))
    energy_tail: deque[float] = deque(maxlen=opts.monotone_window)
    energy_history: list[float] = []
    consec_boundary = 0
    residual = np.inf
    breakdown = None
    mu = 0.0
    status = STATUS_MAXITERS
    it = 0

    for it in range(opts.max_iters):
        uh = np.fft.fft2(u)
        ux = np.fft.ifft2(ik1 * uh)
        uy = np.fft.ifft2(ik2 * uh)
        lu = -x2 * ux + x1 * uy
        absq = (u.real * u.real + u.imag * u.imag)

        kinetic = h2 * float(np.sum(np.abs(ux) ** 2 + np.abs(uy) ** 2))
        potential = h2 * float(np.sum(v * absq))
        rotation = -omega * h2 * float(np.sum((np.conj(u) * lu).imag))
        quart = h2 * float(np.sum(absq * absq))
        interaction = 0.5 * a * quart
        breakdown = EnergyBreakdown(kinetic, potential, rotation, interaction)
        mu = breakdown.total + 0.5 * a * quart
        energy_tail.append(breakdown.total)
        energy_history.append(breakdown.total)

        if not np.isfinite(quart):
            status = STATUS_COLLAPSE if a < 0 else STATUS_MAXITERS
            residual = np.inf
            break
        if quart > opts.collapse_threshold * quart0 and 1.0 / np.sqrt(quart) < 4.0 * h:
            status = STATUS_COLLAPSE
            break
        bfrac = float(absq[band].sum() / absq.sum())
        consec_boundary = consec_boundary + 1 if bfrac > opts.boundary_threshold else 0
        if consec_boundary >= opts.deconfine_steps:
            status = STATUS_DECONFINED
            break

        if it % opts.check_interval == 0 or it == opts.max_iters - 1:
            lap = np.fft.ifft2(-k2 * uh)
            res = -lap + (v - mu) * u + 1j * omega * lu + a * absq * u
            residual = float(np.abs(res).max())
            if residual < opts.tol:
                status = STATUS_CONVERGED
                break

        grad = (v - mu) * u + a * absq * u + 1j * omega * lu
        ustar = np.fft.ifft2(damp * np.fft.fft2(u - tau * grad))
        ustar /= np.sqrt(h2 * np.sum(np.abs(ustar) ** 2))
        u = ustar

    field = ComplexField(g, u) if np.all(np.isfinite(u.view(np.float64))) else initial
    bfrac = boundary_mass_fraction(field, 0.1)
    tail = list(energy_tail)
    monotone = all(tail[i + 1] - tail[i] <= 1e-10 for i in range(len(tail) - 1))
    if status == STATUS_CONVERGED and (bfrac > opts.boundary_threshold or not monotone):
        status = STATUS_MAXITERS
    return GroundStateResult(
        field=field,
        breakdown=breakdown,
        mu=mu,
        residual=residual,
        iters=it + 1,
        status=status,
        boundary_fraction=bfrac,
        box_confined=bool(box_confined),
        monotone_tail=monotone,
        energy_history=energy_history,
    )


# ---------------------------------------------------------------------------
# canonical initial states
# ---------------------------------------------------------------------------

def gaussian_initial(grid: Grid2D, width: float = 1.0) -> ComplexField:
    vals = np.exp(-grid.r2 / (2.0 * width**2)).astype(np.complex128)
    vals /= np.sqrt(grid.h**2 * np.sum(np.abs(vals) ** 2))
    return ComplexField(grid, vals)


def vortex_initial(grid: Grid2D, center: tuple[float, float] = (0.4, 0.25)) -> ComplexField:
    """Gaussian carrying a unit phase winding around an off-centre point.
    Off-centre seeding breaks the lattice symmetry, so a spurious vortex is
    shed in O(1/tau) steps instead of surviving on the symmetry axis."""
    z = (grid.x1 - center[0]) + 1j * (grid.x2 - center[1])
    vals = z * np.exp(-grid.r2 / 2.0)
    vals /= np.sqrt(grid.h**2 * np.sum(np.abs(vals) ** 2))
    return ComplexField(grid, vals)


def random_phase_initial(grid: Grid2D, seed: int = 0) -> ComplexField:
    """Gaussian modulated by a smooth random phase (band-limited noise)."""
    rng = np.random.default_rng(seed)
    phase = np.zeros((grid.n, grid.n))
    for _ in range(6):
        kx, ky = rng.uniform(-1.5, 1.5, size=2)
        amp, off = rng.uniform(0.2, 0.7), rng.uniform(0, 2 * np.pi)
        phase += amp * np.cos(kx * grid.x1 + ky * grid.x2 + off)
    vals = np.exp(-grid.r2 / 2.0) * np.exp(1j * phase)
    vals /= np.sqrt(grid.h**2 * np.sum(np.abs(vals) ** 2))
    return ComplexField(grid, vals)


# ---------------------------------------------------------------------------
# parameter sweeps and uniqueness probes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepCell:
    a: float
    omega: float
    result: GroundStateResult


def continuation_sweep(
    pairs: list[tuple[float, float]],
    trap: Trap,
    opts: SolverOptions = SolverOptions(),
    grid: Grid2D | None = None,
    initial: ComplexField | None = None,
) -> list[SweepCell]:
    """Run `minimize` over a list of (a, omega) cells, warm-starting each
    cell from the converged result of the nearest earlier cell.  Cells are
    assumed ordered so neighbors differ in one parameter; individual
    failures are recorded and never abort the sweep."""
    if grid is None and initial is None:
        raise ValueError("need a grid or an explicit initial field")
    if initial is None:
        initial = gaussian_initial(grid)
    cells: list[SweepCell] = []
    for a, omega in pairs:
        start = initial
        best = None
        for cell in cells:
            if cell.result.status != STATUS_CONVERGED:
                continue
            d = (cell.a - a) ** 2 + (cell.omega - omega) ** 2
            if best is None or d < best[0]:
                best = (d, cell.result.field)
        if best is not None:
            start = best[1]
        result = minimize(start, GPParams(a=a, omega=omega), trap, opts)
        cells.append(SweepCell(a=a, omega=omega, result=result))
    return cells


def multistart_uniqueness_probe(
    params: GPParams,
    trap: Trap,
    opts: SolverOptions,
    grid: Grid2D,
    restarts: int = 3,
    seed: int = 1,
) -> dict:
    """Converge from `restarts` distinct seeds (Gaussian, off-centre vortex,
    random phase, then more random phases) and report the maximum pairwise
    sup-norm discrepancy after phase alignment against the first converged
    state.  Ground states are unique only up to a constant phase, so raw
    fields are never compared directly."""
    from .diagnostics import align_phase

    if restarts < 3:
        raise ValueError("need at least 3 distinct seeds")
    seeds = [gaussian_initial(grid), vortex_initial(grid)]
    seeds += [random_phase_initial(grid, seed=seed + j) for j in range(restarts - 2)]
    results = [minimize(s, params, trap, opts) for s in seeds[:restarts]]

    converged = [r for r in results if r.status == STATUS_CONVERGED]
    failed = len(results) - len(converged)
    discrepancy = np.nan
    if len(converged) >= 2:
        ref = converged[0].field.abs()
        discrepancy = 0.0
        for r in converged[1:]:
            al = align_phase(r.field, ref)
            aligned = r.field.values * np.exp(1j * al.theta)
            discrepancy = max(discrepancy, float(np.abs(aligned - ref.values).max()))
    return {
        "results": results,
        "converged": len(converged),
        "failed": failed,
        "max_discrepancy": discrepancy,
    }
