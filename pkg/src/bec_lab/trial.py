"""Explicit test functions and the upper bounds they certify.

At critical rotation in a quadratic trap the covariant kinetic energy of
any normalized state of the form e^{-|z|^2/2} * (entire function) equals
exactly 2: these states span the lowest eigenspace of the magnetic
oscillator.  Two members matter here:

  * the Gaussian (the nonrotating ground state), and
  * hexagonal vortex-lattice states: a Gaussian times the polynomial whose
    zeros are the lattice points inside a disk of radius R.

The lattice spreads the density: with cell area Q the envelope widens from
e^{-|z|^2/2} to e^{-|z|^2/(2 sigma^2)} where 1/sigma^2 = 1 - pi/Q, so the
quartic integral decays like 1/sigma^2 and the interaction cost of the
state can be made arbitrarily small while its covariant kinetic energy
stays pinned at 2.  Evaluating the energy of such a state yields a
certified (at discretization level) upper bound for the ground energy.

The polynomial has hundreds of factors, so products are accumulated as
log-magnitude plus phase and exponentiated once, with the normalization
constant absorbed; direct multiplication would overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import ComplexField, Grid2D, boundary_mass_fraction, normalize, quartic_integral
from .model import GPParams, Trap, covariant_kinetic, energy

__all__ = [
    "HexLattice",
    "TrialReport",
    "gaussian_state",
    "lattice_state",
    "translated_lattice_state",
    "translate_magnetic",
    "certify_upper_bound",
]


class TrialStateError(ValueError):
    pass


@dataclass(frozen=True)
class HexLattice:
    """Hexagonal lattice v*(m + n*e^{2 pi i/3}) truncated to the disk |z| <= R.

    The unit-cell area sqrt(3) v^2 / 2 must exceed pi for the envelope
    widening to be defined (sigma real)."""

    v: float
    R: float

    def __post_init__(self):
        if self.q_area <= math.pi:
            raise TrialStateError(
                f"cell area {self.q_area:.4f} must exceed pi; increase the scale v"
            )
        if self.R <= 0:
            raise TrialStateError("truncation radius must be positive")

    @property
    def q_area(self) -> float:
        return 0.5 * math.sqrt(3.0) * self.v**2

    @property
    def sigma(self) -> float:
        return 1.0 / math.sqrt(1.0 - math.pi / self.q_area)

    @classmethod
    def from_sigma(cls, sigma: float, R: float | None = None) -> "HexLattice":
        """Choose the scale v so the widened envelope has the requested
        sigma; R defaults to 4*sigma so the lattice comfortably covers the
        envelope's support."""
        if sigma <= 1.0:
            raise TrialStateError("sigma must exceed 1")
        q = math.pi / (1.0 - 1.0 / sigma**2)
        v = math.sqrt(2.0 * q / math.sqrt(3.0))
        return cls(v=v, R=4.0 * sigma if R is None else R)

    def points(self) -> np.ndarray:
        """Lattice points inside the truncation disk, as complex numbers."""
        mmax = int(self.R / self.v) + 2
        gen = np.exp(2j * np.pi / 3.0)
        m, n = np.meshgrid(np.arange(-mmax, mmax + 1), np.arange(-mmax, mmax + 1))
        z = self.v * (m + n * gen).ravel()
        return z[np.abs(z) <= self.R]


@dataclass(frozen=True)
class TrialReport:
    norm_check: float
    covariant_kinetic: float
    quartic_integral: float
    trap_expectation: float
    certified_upper_bound: float

    def as_dict(self) -> dict:
        return {
            "norm_check": self.norm_check,
            "covariant_kinetic": self.covariant_kinetic,
            "quartic_integral": self.quartic_integral,
            "trap_expectation": self.trap_expectation,
            "certified_upper_bound": self.certified_upper_bound,
        }


def gaussian_state(grid: Grid2D) -> ComplexField:
    """The normalized Gaussian pi^{-1/2} e^{-|x|^2/2}."""
    if grid.half_width < 6.0:
        raise TrialStateError("grid too small to resolve the Gaussian (need L >= 6)")
    vals = np.exp(-grid.r2 / 2.0).astype(np.complex128)
    return normalize(ComplexField(grid, vals))


def _lattice_values(lat: HexLattice, grid: Grid2D, shift: complex) -> np.ndarray:
    """exp(log-magnitude) * exp(i phase) of the Gaussian-times-polynomial,
    evaluated at z + shift, normalized on the grid."""
    z = (grid.x1 + 1j * grid.x2) + shift
    logmag = -0.5 * np.abs(z) ** 2
    phase = np.zeros((grid.n, grid.n))
    for j in lat.points():
        dz = z - j
        with np.errstate(divide="ignore"):
            logmag += np.log(np.abs(dz))
        phase += np.arctan2(dz.imag, dz.real)
    logmag -= logmag.max()  # absorb the overall constant before exponentiating
    if logmag.max() > 600.0:
        raise TrialStateError("lattice product overflows even after rescaling")
    vals = np.exp(logmag) * np.exp(1j * phase)
    nrm = np.sqrt(grid.h**2 * np.sum(np.abs(vals) ** 2))
    return vals / nrm


def lattice_state(lat: HexLattice, grid: Grid2D, boundary_tol: float = 1e-8) -> ComplexField:
    """Normalized lattice state on the grid, with one positively wound zero
    at every lattice point inside the disk.

    Raises if the grid fails to contain the state: the polynomial pushes
    mass out to |z| ~ R, and in momentum space the state occupies a ball of
    comparable radius, so both L and pi/h must exceed R with margin.
    """
    if grid.half_width < lat.R + 3.0:
        raise TrialStateError(
            f"half_width {grid.half_width} too small for lattice radius {lat.R}"
        )
    if math.pi / grid.h < lat.R + 3.0:
        raise TrialStateError(
            f"grid too coarse: max wavenumber {math.pi / grid.h:.1f} must exceed "
            f"the lattice radius {lat.R} with margin"
        )
    field = ComplexField(grid, _lattice_values(lat, grid, 0.0))
    bmass = boundary_mass_fraction(field, 0.05)
    if bmass > boundary_tol:
        raise TrialStateError(f"state mass {bmass:.2e} in the boundary band exceeds {boundary_tol}")
    return field


def translated_lattice_state(
    lat: HexLattice,
    grid: Grid2D,
    offset_magnitude: float | None = None,
    direction: tuple[float, float] = (1.0, 0.0),
    boundary_tol: float = 1e-8,
) -> ComplexField:
    """Magnetic translate of the lattice state: evaluate at z + z0 and twist
    by the gauge phase e^{-i x0_perp . x} (critical rotation, A = 1).

    The default offset is sigma^2, which moves the state far enough that a
    decaying trap perturbation W sees only its far-field value; any other
    magnitude may be requested as long as the shifted support stays on the
    grid.  The modulus is an exact translate, so norm and quartic integral
    are unchanged, and the gauge phase keeps the state in the lowest
    magnetic eigenspace: covariant kinetic energy stays exactly 2.
    """
    if offset_magnitude is None:
        offset_magnitude = lat.sigma**2
    d = np.asarray(direction, dtype=float)
    d /= np.hypot(*d)
    x0 = offset_magnitude * d
    z0 = complex(x0[0], x0[1])
    if abs(z0) + lat.R > grid.half_width - 2.0:
        raise TrialStateError("shifted support leaves the grid")
    vals = _lattice_values(lat, grid, z0)
    # x0_perp . x with x0_perp = (-x0_2, x0_1)
    gauge = -x0[1] * grid.x1 + x0[0] * grid.x2
    field = ComplexField(grid, vals * np.exp(-1j * gauge))
    if boundary_mass_fraction(field, 0.05) > boundary_tol:
        raise TrialStateError("shifted state touches the boundary band")
    return field


def translate_magnetic(u: ComplexField, x0: tuple[float, float], omega: float) -> ComplexField:
    """u(x + x0) * e^{-i (omega/2) x0_perp . x}: the shift-and-gauge map that
    leaves the covariant energy invariant at rotation speed omega.

    The shift is spectral (exact for band-limited fields) and wraps
    periodically, so the support of u must stay clear of the boundary both
    before and after the shift.
    """
    g = u.grid
    p, q = float(x0[0]), float(x0[1])
    if p == 0.0 and q == 0.0:
        return u
    if boundary_mass_fraction(u, 0.1) > 1e-8:
        raise TrialStateError("field touches the boundary; spectral shift would wrap")
    k = g.wavenumbers
    shift = np.exp(1j * (k[:, None] * p + k[None, :] * q))
    shifted = np.fft.ifft2(shift * np.fft.fft2(u.values))
    gauge = 0.5 * omega * (-q * g.x1 + p * g.x2)  # (omega/2) x0_perp . x
    out = ComplexField(g, shifted * np.exp(-1j * gauge))
    if boundary_mass_fraction(out, 0.1) > 1e-8:
        raise TrialStateError("shifted support leaves the grid")
    return out


def certify_upper_bound(state: ComplexField, params: GPParams, trap: Trap) -> TrialReport:
    """Evaluate the rotating-frame energy of a normalized trial state.  The
    total is an upper bound for the ground energy at these parameters,
    rigorous up to discretization error."""
    from .fields import l2_norm

    g = state.grid
    bd = energy(state, params, trap)
    w_part = (
        trap.w.evaluate(g.x1, g.x2)
        if trap.kind == "harmonic_plus"
        else np.zeros((g.n, g.n))
    )
    trap_exp = float(g.h**2 * np.sum(w_part * np.abs(state.values) ** 2))
    return TrialReport(
        norm_check=l2_norm(state),
        covariant_kinetic=covariant_kinetic(state, params.omega),
        quartic_integral=quartic_integral(state),
        trap_expectation=trap_exp,
        certified_upper_bound=bd.total,
    )
