"""Traps and the rotating Gross-Pitaevskii energy.

The energy of a unit-mass state u in a trap V rotating at speed omega is

    E(u) = int |grad u|^2 + V |u|^2 + (a/2)|u|^4  -  omega * int x_perp . Im(conj(u) grad u)

with x_perp = (-x2, x1).  Completing the square turns the same number into
the covariant form

    E(u) = int |(grad - i omega x_perp / 2) u|^2 + (V - omega^2 |x|^2 / 4)|u|^2 + (a/2)|u|^4,

which makes explicit that rotation de-confines: once omega exceeds the
critical speed (2*sqrt(A) for a quadratic trap of strength A) the effective
potential stops growing and minimizers cease to exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import (
    ComplexField,
    Grid2D,
    angular_derivative,
    inner_product,
    l2_norm,
    laplacian,
    quartic_integral,
)

__all__ = [
    "WSpec",
    "Trap",
    "GPParams",
    "EnergyBreakdown",
    "critical_velocity",
    "energy",
    "covariant_energy",
    "covariant_kinetic",
    "l2_gradient",
    "chemical_potential",
    "check_diamagnetic",
    "modulus_gradient_sq",
]

NORM_TOL = 1e-10


class TrapError(ValueError):
    pass


@dataclass(frozen=True)
class WSpec:
    """Sub-quadratic perturbation W added to a quadratic trap.

    kind:
      constant  W = far_field
      bump      W = far_field + sign * depth * exp(-|x|^2)
      tail      W = far_field + sign * depth * (1 + |x|^2)^(-s/2),  0 < s < 2

    `far_field` is the limit B of W at infinity; existence thresholds
    compare ground energies against 2*sqrt(A) + B, so B is always carried
    explicitly rather than absorbed.  sign=-1 with depth <= far_field keeps
    the total trap nonnegative while W < B everywhere (attractive well);
    sign=+1 gives W > B (repulsive shoulder).
    """

    kind: str
    far_field: float = 0.0
    depth: float = 1.0
    sign: int = -1
    s: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "bump", "tail"):
            raise TrapError(f"unknown W kind {self.kind!r}")
        if self.kind == "tail" and not (0.0 < self.s < 2.0):
            raise TrapError(f"tail exponent must lie in (0, 2), got {self.s}")
        if self.kind != "constant":
            if self.depth < 0:
                raise TrapError("depth must be nonnegative")
            if self.sign not in (-1, 1):
                raise TrapError("sign must be +1 or -1")

    def evaluate(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        r2 = x1**2 + x2**2
        if self.kind == "constant":
            return np.full_like(r2, self.far_field)
        if self.kind == "bump":
            return self.far_field + self.sign * self.depth * np.exp(-r2)
        return self.far_field + self.sign * self.depth * (1.0 + r2) ** (-0.5 * self.s)


@dataclass(frozen=True)
class Trap:
    """Trapping potential: harmonic A|x|^2, harmonic plus a perturbation W,
    or a pure power |x|^s."""

    kind: str
    A: float = 1.0
    w: WSpec | None = None
    s: float = 2.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "harmonic_plus", "power"):
            raise TrapError(f"unknown trap kind {self.kind!r}")
        if self.kind in ("harmonic", "harmonic_plus") and self.A < 0:
            raise TrapError("quadratic strength A must be nonnegative")
        if self.kind == "harmonic_plus" and self.w is None:
            raise TrapError("harmonic_plus needs a W spec")

    @classmethod
    def harmonic(cls, A: float = 1.0) -> "Trap":
        return cls("harmonic", A=A)

    @classmethod
    def harmonic_plus(cls, A: float, w: WSpec) -> "Trap":
        return cls("harmonic_plus", A=A, w=w)

    @classmethod
    def power(cls, s: float) -> "Trap":
        return cls("power", s=s)

    @property
    def far_field_offset(self) -> float:
        """B, the far-field value of the sub-quadratic part (0 if none)."""
        return self.w.far_field if self.kind == "harmonic_plus" else 0.0

    def potential(self, grid: Grid2D) -> np.ndarray:
        if self.kind == "power":
            v = grid.r2 ** (0.5 * self.s)
        else:
            v = self.A * grid.r2
            if self.kind == "harmonic_plus":
                w = self.w.evaluate(grid.x1, grid.x2)
                # the decaying part of W must be sub-quadratic on this box
                # (the far-field constant only shifts energies, so it is
                # excluded from the ratio)
                edge = abs(
                    self.w.evaluate(np.array([grid.half_width]), np.array([0.0]))[0]
                    - self.w.far_field
                )
                if edge / grid.half_width**2 >= 1e-3:
                    raise TrapError("W is not negligible against |x|^2 at the box edge")
                v = v + w
        if v.min() < 0.0:
            raise TrapError(f"trap is negative on the grid (min {v.min():.3g}); "
                            "raise the far-field offset")
        return v


def critical_velocity(trap: Trap) -> float:
    """Largest rotation speed at which V - omega^2 |x|^2 / 4 still confines.

    Quadratic-dominated traps give 2*sqrt(A); a pure power |x|^s gives 2 at
    s = 2 and infinity for s > 2.  Growth below quadratic never confines a
    rotating gas, so s < 2 is rejected.
    """
    if trap.kind in ("harmonic", "harmonic_plus"):
        return 2.0 * math.sqrt(trap.A)
    if trap.s == 2.0:
        return 2.0
    if trap.s > 2.0:
        return math.inf
    raise TrapError(f"power trap with s={trap.s} < 2 grows too slowly to confine rotation")


@dataclass(frozen=True)
class GPParams:
    """Interaction strength a (signed) and rotation speed omega >= 0."""

    a: float
    omega: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.omega)):
            raise ValueError("parameters must be finite")
        if self.omega < 0:
            raise ValueError("omega must be nonnegative")


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential: float
    rotation: float
    interaction: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.rotation + self.interaction

    def as_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "potential": self.potential,
            "rotation": self.rotation,
            "interaction": self.interaction,
            "total": self.total,
        }


def _require_normalized(u: ComplexField) -> None:
    if abs(l2_norm(u) - 1.0) > NORM_TOL:
        raise ValueError(f"field is not normalized: ||u|| = {l2_norm(u)!r}")


def _gradient_terms(u: ComplexField):
    g = u.grid
    uh = np.fft.fft2(u.values)
    k = g.wavenumbers
    ux = np.fft.ifft2(1j * k[:, None] * uh)
    uy = np.fft.ifft2(1j * k[None, :] * uh)
    return ux, uy


def energy(u: ComplexField, params: GPParams, trap: Trap) -> EnergyBreakdown:
    """All four energy components by quadrature.  The rotation component is
    stored signed, -omega * int x_perp . Im(conj(u) grad u), so the
    breakdown sums to the full rotating-frame energy."""
    _require_normalized(u)
    g = u.grid
    h2 = g.h * g.h
    ux, uy = _gradient_terms(u)
    absq = np.abs(u.values) ** 2
    kinetic = h2 * float(np.sum(np.abs(ux) ** 2 + np.abs(uy) ** 2))
    potential = h2 * float(np.sum(trap.potential(g) * absq))
    if params.omega == 0.0 or not u.values.imag.any():
        # the momentum density of a real field vanishes identically
        rotation = 0.0
    else:
        lu = -g.x2 * ux + g.x1 * uy
        rotation = -params.omega * h2 * float(np.sum(np.imag(np.conj(u.values) * lu)))
    interaction = 0.5 * params.a * h2 * float(np.sum(absq**2))
    return EnergyBreakdown(kinetic, potential, rotation, interaction)


def covariant_kinetic(u: ComplexField, omega: float) -> float:
    """int |(grad - i omega x_perp / 2) u|^2."""
    g = u.grid
    ux, uy = _gradient_terms(u)
    half = 0.5 * omega
    d1 = ux + 1j * half * g.x2 * u.values  # grad - i omega x_perp/2, x_perp = (-x2, x1)
    d2 = uy - 1j * half * g.x1 * u.values
    return g.h * g.h * float(np.sum(np.abs(d1) ** 2 + np.abs(d2) ** 2))


def covariant_energy(u: ComplexField, params: GPParams, trap: Trap) -> EnergyBreakdown:
    """Same total as `energy` via the completed square: covariant kinetic
    plus the centrifugally reduced potential.  Rotation component is zero
    by construction."""
    _require_normalized(u)
    g = u.grid
    h2 = g.h * g.h
    absq = np.abs(u.values) ** 2
    kin = covariant_kinetic(u, params.omega)
    pot = h2 * float(np.sum((trap.potential(g) - 0.25 * params.omega**2 * g.r2) * absq))
    inter = 0.5 * params.a * h2 * float(np.sum(absq**2))
    return EnergyBreakdown(kin, pot, 0.0, inter)


def l2_gradient(u: ComplexField, params: GPParams, trap: Trap, mu: float) -> ComplexField:
    """Euler-Lagrange residual  -lap(u) + (V - mu) u + i omega x_perp.grad(u) + a|u|^2 u.

    Deliberately accepts arbitrary (u, mu) pairs, normalized or not, so it
    doubles as a residual evaluator; at a converged minimizer with its own
    multiplier the sup-norm of this field is the convergence residual.
    """
    g = u.grid
    lap = laplacian(u).values
    lu = angular_derivative(u).values
    vals = (
        -lap
        + (trap.potential(g) - mu) * u.values
        + 1j * params.omega * lu
        + params.a * np.abs(u.values) ** 2 * u.values
    )
    return ComplexField(g, vals)


def chemical_potential(u: ComplexField, params: GPParams, trap: Trap) -> float:
    """mu = E(u) + (a/2) int |u|^4 (the Lagrange multiplier of the mass
    constraint at a minimizer)."""
    return energy(u, params, trap).total + 0.5 * params.a * quartic_integral(u)


def modulus_gradient_sq(u: ComplexField) -> float:
    """int |grad |u||^2 computed via the chain rule Re(conj(u) grad u)/|u|,
    which is pointwise dominated by the covariant gradient and therefore
    immune to the kinks of |u| at zeros."""
    g = u.grid
    ux, uy = _gradient_terms(u)
    mod = np.abs(u.values)
    safe = np.where(mod > 0.0, mod, 1.0)
    gx = np.where(mod > 0.0, (u.values.conj() * ux).real / safe, 0.0)
    gy = np.where(mod > 0.0, (u.values.conj() * uy).real / safe, 0.0)
    return g.h * g.h * float(np.sum(gx**2 + gy**2))


def check_diamagnetic(u: ComplexField, omega: float) -> float:
    """Margin of the diamagnetic inequality:
    int |(grad - i omega x_perp/2) u|^2 - int |grad |u||^2  >= 0."""
    return covariant_kinetic(u, omega) - modulus_gradient_sq(u)
