"""Phase alignment, real/imaginary splitting, vortex detection and decay
fits: the measurement side of the laboratory.

A ground state is determined only up to a constant phase, so every
comparison against a real reference u0 starts by rotating the global phase
to the minimizer of ||u e^{i theta} - u0||_2.  The closed form is
theta = -arg<u0, u>, which simultaneously makes the overlap real and
nonnegative and enforces the orthogonality int u0 * Im(u e^{i theta}) = 0.

After alignment, u e^{i theta} = q + i r splits into real fields that
satisfy a coupled system driven by the rotation speed:

    Lq =  omega * x_perp . grad(r)
    Lr = -omega * x_perp . grad(q),      L = -lap + V - mu + a |u|^2,

whose residuals measure how sharply a computed minimizer solves its own
equations.  Vortices are found by summing wrapped phase differences around
grid plaquettes: an isolated zero with winding m contributes 2 pi m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ComplexField, Grid2D, RealField, inner_product, l2_norm
from .model import GPParams, Trap

__all__ = [
    "PhaseAlignment",
    "Decomposition",
    "VortexReport",
    "LinearizedOps",
    "align_phase",
    "decompose",
    "residual_coupled_system",
    "vortex_scan",
    "contour_winding",
    "decay_fit",
]


@dataclass(frozen=True)
class PhaseAlignment:
    theta: float
    residual_l2: float
    orthogonality: float
    degenerate: bool = False


def align_phase(u: ComplexField, ref: RealField) -> PhaseAlignment:
    """Best constant phase: theta = -arg<ref, u>, normalized to [0, 2 pi)."""
    overlap = inner_product(ref.as_complex(), u)
    if abs(overlap) < 1e-14:
        return PhaseAlignment(theta=0.0, residual_l2=np.nan, orthogonality=0.0, degenerate=True)
    theta = float((-np.angle(overlap)) % (2.0 * np.pi))
    aligned = u.values * np.exp(1j * theta)
    g = u.grid
    res = float(np.sqrt(g.h**2 * np.sum(np.abs(aligned - ref.values) ** 2)))
    orth = float(g.h**2 * np.sum(ref.values * aligned.imag))
    return PhaseAlignment(theta=theta, residual_l2=res, orthogonality=orth)


@dataclass(frozen=True)
class Decomposition:
    q: RealField
    r: RealField
    w_dev: RealField

    def reconstruct(self) -> ComplexField:
        return ComplexField(self.q.grid, self.q.values + 1j * self.r.values)


def decompose(u: ComplexField, ref: RealField, alignment: PhaseAlignment) -> Decomposition:
    aligned = u.values * np.exp(1j * alignment.theta)
    q = RealField(u.grid, aligned.real)
    r = RealField(u.grid, aligned.imag)
    return Decomposition(q=q, r=r, w_dev=RealField(u.grid, q.values - ref.values))


def _real_spectral(grid: Grid2D, vals: np.ndarray):
    uh = np.fft.fft2(vals)
    k = grid.wavenumbers
    dx = np.fft.ifft2(1j * k[:, None] * uh).real
    dy = np.fft.ifft2(1j * k[None, :] * uh).real
    lap = np.fft.ifft2(-grid.k_squared * uh).real
    return dx, dy, lap


def residual_coupled_system(
    d: Decomposition,
    omega: float,
    mu: float,
    params: GPParams,
    trap: Trap,
) -> tuple[float, float]:
    """Sup-norms of both equations of the coupled system at the decomposed
    state, with L built from the state's own density."""
    g = d.q.grid
    v = trap.potential(g)
    dens = d.q.values**2 + d.r.values**2
    lin = v - mu + params.a * dens

    qx, qy, qlap = _real_spectral(g, d.q.values)
    rx, ry, rlap = _real_spectral(g, d.r.values)
    ang_q = -g.x2 * qx + g.x1 * qy
    ang_r = -g.x2 * rx + g.x1 * ry

    res_q = -qlap + lin * d.q.values - omega * ang_r
    res_r = -rlap + lin * d.r.values + omega * ang_q
    return float(np.abs(res_q).max()), float(np.abs(res_r).max())


@dataclass(frozen=True)
class VortexReport:
    vortices: list[tuple[float, float, int]]
    total_winding: int
    low_density: list[tuple[float, float, int]]

    def as_dict(self) -> dict:
        return {
            "vortices": [list(v) for v in self.vortices],
            "total_winding": self.total_winding,
            "low_density": [list(v) for v in self.low_density],
        }


def _wrap(dphi: np.ndarray) -> np.ndarray:
    return (dphi + np.pi) % (2.0 * np.pi) - np.pi


def vortex_scan(u: ComplexField, density_floor: float = 1e-6) -> VortexReport:
    """Plaquette-by-plaquette phase winding over the interior of the grid.

    Phase is meaningless where the modulus underflows, so plaquettes whose
    four corners all sit below density_floor * max|u| are reported
    separately and excluded from the vortex list and the total.

    A zero landing exactly on a node has no phase at all and would corrupt
    its four plaquettes; such nodes are detected directly by the winding of
    the 2x2 block contour around them, whose corners are clean.
    """
    g = u.grid
    vals = u.values
    phase = np.angle(vals)
    mod = np.abs(vals)
    floor = density_floor * mod.max()

    d1 = _wrap(phase[1:, :-1] - phase[:-1, :-1])   # (i,j)   -> (i+1,j)
    d2 = _wrap(phase[1:, 1:] - phase[1:, :-1])     # (i+1,j) -> (i+1,j+1)
    d3 = _wrap(phase[:-1, 1:] - phase[1:, 1:])     # (i+1,j+1) -> (i,j+1)
    d4 = _wrap(phase[:-1, :-1] - phase[:-1, 1:])   # (i,j+1) -> (i,j)
    winding = (d1 + d2 + d3 + d4) / (2.0 * np.pi)

    good = np.maximum.reduce(
        [mod[:-1, :-1], mod[1:, :-1], mod[1:, 1:], mod[:-1, 1:]]
    ) >= floor

    vortices: list[tuple[float, float, int]] = []
    low: list[tuple[float, float, int]] = []
    ax = g.axis
    n = g.n

    zi, zj = np.nonzero(mod == 0.0)
    for i, j in zip(zi, zj):
        if not (1 <= i <= n - 2 and 1 <= j <= n - 2):
            continue
        ring = [
            phase[i - 1, j - 1], phase[i, j - 1], phase[i + 1, j - 1],
            phase[i + 1, j], phase[i + 1, j + 1], phase[i, j + 1],
            phase[i - 1, j + 1], phase[i - 1, j], phase[i - 1, j - 1],
        ]
        w = int(np.rint(_wrap(np.diff(ring)).sum() / (2.0 * np.pi)))
        # the four plaquettes sharing this node carry no trustworthy signal
        winding[max(i - 1, 0):i + 1, max(j - 1, 0):j + 1] = 0.0
        if w != 0:
            entry = (float(ax[i]), float(ax[j]), w)
            ring_mod = mod[i - 1:i + 2, j - 1:j + 2]
            (vortices if ring_mod.max() >= floor else low).append(entry)

    winding = np.rint(winding).astype(int)
    half = 0.5 * g.h
    ii, jj = np.nonzero(winding)
    for i, j in zip(ii, jj):
        entry = (float(ax[i] + half), float(ax[j] + half), int(winding[i, j]))
        (vortices if good[i, j] else low).append(entry)
    total = int(sum(w for _, _, w in vortices))
    return VortexReport(vortices=vortices, total_winding=total, low_density=low)


def contour_winding(u: ComplexField, margin: int = 2) -> int:
    """Total phase winding along the largest axis-aligned square contour
    that stays `margin` cells inside the grid."""
    phase = np.angle(u.values)
    n = u.grid.n
    lo, hi = margin, n - 1 - margin
    top = phase[lo:hi, lo]
    right = phase[hi, lo:hi]
    bottom = phase[hi:lo:-1, hi]
    left = phase[lo, hi:lo:-1]
    loop = np.concatenate([top, right, bottom, left, [phase[lo, lo]]])
    return int(np.rint(_wrap(np.diff(loop)).sum() / (2.0 * np.pi)))


def decay_fit(u: ComplexField, window: tuple[float, float]) -> float:
    """Least-squares slope of log|u| against |x| over the annulus
    window[0] <= |x| <= window[1] (which must stay in the trusted region
    |x| <= 0.8 L)."""
    r1, r2 = window
    g = u.grid
    if r2 > 0.8 * g.half_width:
        raise ValueError(f"window edge {r2} beyond trusted radius {0.8 * g.half_width}")
    r = np.sqrt(g.r2)
    mod = np.abs(u.values)
    mask = (r >= r1) & (r <= r2) & (mod > 0.0)
    if not mask.any():
        raise ValueError("annulus contains no usable samples")
    return float(np.polyfit(r[mask], np.log(mod[mask]), 1)[0])


@dataclass(frozen=True)
class LinearizedOps:
    """Residual evaluators for the operators linearizing the ground-state
    equation at a real reference minimizer u0 with multiplier mu0:

        L = -lap + V - mu0 +   a u0^2      (u0 spans its kernel)
        N = -lap + V - mu0 + 3 a u0^2      (nondegenerate for a != 0)

    Only applications are exposed; nothing here inverts N.
    """

    mu0: float
    u0: RealField
    a: float
    trap: Trap

    def apply_l(self, f: RealField) -> RealField:
        g = f.grid
        _, _, lap = _real_spectral(g, f.values)
        v = self.trap.potential(g)
        return RealField(g, -lap + (v - self.mu0 + self.a * self.u0.values**2) * f.values)

    def apply_n(self, f: RealField) -> RealField:
        g = f.grid
        _, _, lap = _real_spectral(g, f.values)
        v = self.trap.potential(g)
        return RealField(g, -lap + (v - self.mu0 + 3.0 * self.a * self.u0.values**2) * f.values)
