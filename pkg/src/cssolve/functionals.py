"""Energy, Pohozaev and gradient evaluation for the gauged Schrödinger model.

For radial u on the plane the constrained energy is

    Phi(u) = 1/2 ||grad u||_2^2 + 1/2 B(u) - 1/2 int (e^{u^2} - 1 - u^2)
             - int g u,

with the self-interaction term

    B(u) = 2 pi int_0^inf u(r)^2 h_u(r)^2 / r^2  r dr,
    h_u(r) = int_0^r (l/2) u(l)^2 dl,

a sixth-order homogeneous functional carrying the gauge coupling.  The
Pohozaev-type quantity associated with the mass-preserving dilation
u_t(x) = t u(t x) is

    P(u) = ||grad u||_2^2 + B(u) - int [(u^2 - 1) e^{u^2} + 1]
           + int (g + grad g . x) u.

Everything here is exact discrete calculus: gradients are transposes of
the very matrices used by the quadrature, so directional derivatives and
the multiplier identity hold to rounding, not to discretization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, MagnitudeOverflowError
from .perturbation import Perturbation
from .radial_core import (
    STAB_ALPHA,
    RadialFunction,
    prefix_integral,
    prefix_integral_adjoint,
)

__all__ = [
    "EnergyBreakdown",
    "PohozaevValue",
    "OVERFLOW_LIMIT",
    "cumulative_charge",
    "chern_simons",
    "exp_integrals",
    "energy",
    "pohozaev",
    "gradient",
    "extended_gradient",
    "multiplier",
    "energy_and_gradient",
]

# e^x with x = u^2 beyond this is meaningless in float64; fail loudly.
OVERFLOW_LIMIT = 700.0


@dataclass(frozen=True)
class EnergyBreakdown:
    """Signed pieces of Phi; total is their exact float combination."""

    kinetic_half: float
    chern_simons_half: float
    exp_term: float
    perturb_term: float
    total: float

    @classmethod
    def from_parts(cls, kinetic_half, chern_simons_half, exp_term, perturb_term):
        total = kinetic_half + chern_simons_half - exp_term - perturb_term
        return cls(kinetic_half, chern_simons_half, exp_term, perturb_term, total)

    def to_json_dict(self):
        return {
            "kinetic_half": self.kinetic_half,
            "chern_simons_half": self.chern_simons_half,
            "exp_term": self.exp_term,
            "perturb_term": self.perturb_term,
            "total": self.total,
        }


@dataclass(frozen=True)
class PohozaevValue:
    """P(u) with its constituents; value is their exact float combination."""

    value: float
    kinetic: float
    chern_simons: float
    exp_pohozaev: float
    perturb_pohozaev: float

    @classmethod
    def from_parts(cls, kinetic, chern_simons, exp_pohozaev, perturb_pohozaev):
        value = kinetic + chern_simons - exp_pohozaev + perturb_pohozaev
        return cls(value, kinetic, chern_simons, exp_pohozaev, perturb_pohozaev)

    def to_json_dict(self):
        return {
            "value": self.value,
            "kinetic": self.kinetic,
            "chern_simons": self.chern_simons,
            "exp_pohozaev": self.exp_pohozaev,
            "perturb_pohozaev": self.perturb_pohozaev,
        }


def cumulative_charge(u: RadialFunction) -> np.ndarray:
    """h_u at the grid nodes: running integral of (r/2) u^2 from 0.

    h_u(R_max) equals mass/(4 pi) up to quadrature tail decay.
    """
    grid = u.grid
    return prefix_integral(0.5 * grid.r * u.values**2, grid.h)


def chern_simons(u: RadialFunction) -> float:
    """B(u) >= 0; sixth-order homogeneous under amplitude scaling."""
    return _chern_simons_from(u, cumulative_charge(u))


def _chern_simons_from(u: RadialFunction, H: np.ndarray) -> float:
    grid = u.grid
    integrand = np.zeros_like(grid.r)
    integrand[1:] = u.values[1:] ** 2 * H[1:] ** 2 / grid.r[1:] ** 2
    return float(grid.w @ integrand)


def _check_overflow(u: RadialFunction) -> np.ndarray:
    u2 = u.values**2
    peak = float(np.max(u2)) if u2.size else 0.0
    if peak > OVERFLOW_LIMIT:
        raise MagnitudeOverflowError(
            f"max u^2 = {peak:.6g} exceeds the exponential range limit {OVERFLOW_LIMIT:g}"
        )
    return u2


def exp_integrals(u: RadialFunction) -> tuple[float, float, float]:
    """(I_F, I_P, I_f) for the critical-growth nonlinearity.

    I_F = int e^{u^2} - 1 - u^2          (potential)
    I_f = int (e^{u^2} - 1) u^2          (pairing with u)
    I_P = int (u^2 - 1) e^{u^2} + 1      (dilation derivative), and
    I_P = I_f - I_F pointwise, so the identity holds to rounding.
    """
    grid = u.grid
    u2 = _check_overflow(u)
    em1 = np.expm1(u2)
    I_F = float(grid.w @ (em1 - u2))
    I_f = float(grid.w @ (em1 * u2))
    # (u^2 - 1) e^{u^2} + 1 = u^2 expm1(u^2) - (expm1(u^2) - u^2), stable near 0
    I_P = float(grid.w @ (u2 * em1 - (em1 - u2)))
    return I_F, I_P, I_f


def energy(u: RadialFunction, g: Perturbation | None = None) -> EnergyBreakdown:
    grid = u.grid
    I_F, _, _ = exp_integrals(u)
    pert = 0.0
    if g is not None:
        pert = float(grid.w @ (g.samples_on(grid) * u.values))
    return EnergyBreakdown.from_parts(
        kinetic_half=0.5 * u.kinetic,
        chern_simons_half=0.5 * chern_simons(u),
        exp_term=0.5 * I_F,
        perturb_term=pert,
    )


def pohozaev(u: RadialFunction, g: Perturbation | None = None) -> PohozaevValue:
    grid = u.grid
    _, I_P, _ = exp_integrals(u)
    pert = 0.0
    if g is not None:
        gv = g.samples_on(grid)
        gxv = grid.r * g.derivative_samples_on(grid)
        pert = float(grid.w @ ((gv + gxv) * u.values))
    return PohozaevValue.from_parts(
        kinetic=u.kinetic,
        chern_simons=chern_simons(u),
        exp_pohozaev=I_P,
        perturb_pohozaev=pert,
    )


def _raw_gradient(u: RadialFunction, g: Perturbation | None) -> np.ndarray:
    """dPhi/du_k against the coefficient basis (not yet an L^2 element)."""
    grid = u.grid
    uv = u.values
    w, r, h = grid.w, grid.r, grid.h

    du = u.derivative()
    gk = grid.deriv_t @ (w * du)
    d2 = grid.second @ uv
    gk += (STAB_ALPHA / h**2) * (grid.second_t @ (w * d2))

    H = cumulative_charge(u)
    q = np.zeros_like(uv)
    q[1:] = w[1:] * uv[1:] ** 2 * H[1:] / r[1:] ** 2
    gB = np.zeros_like(uv)
    gB[1:] = w[1:] * uv[1:] * H[1:] ** 2 / r[1:] ** 2
    gB += r * uv * prefix_integral_adjoint(q, h)

    u2 = _check_overflow(u)
    gexp = -w * uv * np.expm1(u2)

    out = gk + gB + gexp
    if g is not None:
        out -= w * g.samples_on(grid)
    return out


def gradient(u: RadialFunction, g: Perturbation | None = None) -> RadialFunction:
    """L^2 representative G of Phi'(u): <G, v>_{L^2} matches the
    directional derivative of the discrete energy exactly.

    The origin coefficient carries no quadrature weight and the energy
    never reads it, so G(0) is fixed to zero.
    """
    grid = u.grid
    raw = _raw_gradient(u, g)
    G = np.zeros_like(raw)
    G[1:] = raw[1:] / grid.w[1:]
    return RadialFunction(grid, G)


def extended_gradient(u: RadialFunction, t: float,
                      g: Perturbation | None = None) -> RadialFunction:
    """L^2 gradient in u of the dilated energy Phi(e^t u(e^t .)).

    Same term-by-term structure as the plain gradient: the quadratic
    terms scale by e^{2t}, the exponential term sees the amplified
    argument, and the perturbation is sampled at the squeezed radii.
    At t = 0 this reproduces gradient(u, g) identically, so saddle
    searches can work on the dilation fiber without ever resampling.
    """
    if not math.isfinite(t):
        raise InvalidArgumentError("scaling parameter must be finite")
    grid = u.grid
    uv = u.values
    w, r, h = grid.w, grid.r, grid.h
    e2t = math.exp(2.0 * t)
    et = math.exp(t)

    du = u.derivative()
    gk = grid.deriv_t @ (w * du)
    d2 = grid.second @ uv
    gk += (STAB_ALPHA / h**2) * (grid.second_t @ (w * d2))

    H = cumulative_charge(u)
    q = np.zeros_like(uv)
    q[1:] = w[1:] * uv[1:] ** 2 * H[1:] / r[1:] ** 2
    gB = np.zeros_like(uv)
    gB[1:] = w[1:] * uv[1:] * H[1:] ** 2 / r[1:] ** 2
    gB += r * uv * prefix_integral_adjoint(q, h)

    s2 = e2t * uv**2
    peak = float(np.max(s2)) if s2.size else 0.0
    if peak > OVERFLOW_LIMIT:
        raise MagnitudeOverflowError(
            f"max (e^t u)^2 = {peak:.6g} exceeds the exponential range "
            f"limit {OVERFLOW_LIMIT:g}"
        )
    gexp = -w * uv * np.expm1(s2)

    raw = e2t * (gk + gB) + gexp
    if g is not None:
        raw -= (w / et) * np.asarray(g.profile(r / et), dtype=float)
    G = np.zeros_like(raw)
    G[1:] = raw[1:] / grid.w[1:]
    return RadialFunction(grid, G)


def multiplier(u: RadialFunction, g: Perturbation | None = None) -> float:
    """Lagrange multiplier lambda = -<Phi'(u), u> / ||u||_2^2."""
    m = u.mass
    if not m > 0.0:
        raise InvalidArgumentError("multiplier needs a function of positive mass")
    raw = _raw_gradient(u, g)
    return -float(raw @ u.values) / m


def energy_and_gradient(
    u: RadialFunction, g: Perturbation | None = None
) -> tuple[EnergyBreakdown, RadialFunction]:
    """Single-pass pair for solver loops; results match the separate calls."""
    return energy(u, g), gradient(u, g)
