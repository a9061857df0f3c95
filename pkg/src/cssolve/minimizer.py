"""Constrained local minimization on the mass sphere.

For admissible mass c the energy restricted to the set
{ kinetic < s0, ||u||_2^2 = c } is coercive and negative somewhere, and
the local minimizer is found by projected gradient descent: steepest
descent in the L^2 metric, tangential projection, multiplicative
renormalization back to exact mass, an Armijo line search, and a hard
guard rejecting any step whose kinetic energy reaches the ceiling s0.

The multiplier lambda = -<Phi'(u), u>/c and the dilation identity value
P(u) are reported at the final iterate; for a genuine interior minimum
lambda > 0 and P is residual-small.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import constants as _constants
from .errors import InvalidArgumentError, NumericFailureError, OutOfRegimeError
from .functionals import (
    EnergyBreakdown,
    PohozaevValue,
    chern_simons,
    energy,
    gradient,
    multiplier,
    pohozaev,
)
from .perturbation import Perturbation
from .radial_core import (
    RadialFunction,
    RadialGrid,
    dilate_mass_preserving,
    sobolev_solve,
)

__all__ = [
    "seed_profile",
    "seed_function",
    "DilationProfile",
    "dilation_profile",
    "SolverOptions",
    "SolverReport",
    "minimize_local",
]


def seed_profile(grid: RadialGrid, c0: float) -> RadialFunction:
    """The reference bump sqrt(c0 / 3 pi) / (r^4 + 1); its exact planar mass
    is c0 pi / 12, below every admissible threshold."""
    if not c0 > 0.0:
        raise InvalidArgumentError("threshold mass must be positive")
    amp = math.sqrt(c0 / (3.0 * math.pi))
    return RadialFunction(grid, amp / (grid.r**4 + 1.0))


def seed_function(c: float, grid: RadialGrid) -> RadialFunction:
    """The bump profile rescaled to exact discrete mass c."""
    if not c > 0.0:
        raise InvalidArgumentError("mass must be positive")
    u = RadialFunction(grid, 1.0 / (grid.r**4 + 1.0))
    return u.with_values(u.values * math.sqrt(c / u.mass))


@dataclass(frozen=True)
class DilationProfile:
    """Energy along the mass-preserving dilation t -> t u(t x)."""

    t_samples: np.ndarray
    phi: np.ndarray
    envelope: np.ndarray | None
    min_index: int
    min_value: float

    def to_json_dict(self):
        return {
            "t_samples": list(map(float, self.t_samples)),
            "phi": list(map(float, self.phi)),
            "envelope": None if self.envelope is None else list(map(float, self.envelope)),
            "min_index": self.min_index,
            "min_value": self.min_value,
        }


def dilation_profile(u: RadialFunction, g: Perturbation | None, t_samples,
                     witness: tuple[float, float, float] | None = None) -> DilationProfile:
    """Sample Phi(t u(t x)) at positive t.

    witness = (delta, x0, m_tilde) adds the analytic upper envelope
    (t^2/2)(K + B) - (t/2) pi delta^2 g(x0) m_tilde, valid for dilation
    parameters small enough that the witness ball stays inside the
    support; it certifies negativity of the true profile near t = 0.
    """
    ts = np.asarray(t_samples, dtype=float)
    if ts.size == 0 or np.any(ts <= 0.0):
        raise InvalidArgumentError("dilation samples must be positive")
    phi = np.empty_like(ts)
    for i, t in enumerate(ts):
        phi[i] = energy(dilate_mass_preserving(u, float(t)), g).total
    env = None
    if witness is not None:
        if g is None:
            raise InvalidArgumentError("an envelope witness needs a perturbation")
        delta, x0, m_tilde = witness
        kb = u.kinetic + chern_simons(u)
        gx0 = float(np.asarray(g.profile(np.asarray([x0])))[0])
        env = 0.5 * ts**2 * kb - 0.5 * ts * math.pi * delta**2 * gx0 * m_tilde
    imin = int(np.argmin(phi))
    return DilationProfile(t_samples=ts, phi=phi, envelope=env,
                           min_index=imin, min_value=float(phi[imin]))


@dataclass(frozen=True)
class SolverOptions:
    step: float = 1.0
    tol: float = 1e-6
    max_iter: int = 50000
    armijo: float = 1e-4
    backtrack: float = 0.5
    grow: float = 1.25
    max_backtracks: int = 60


@dataclass(frozen=True)
class SolverReport:
    u: RadialFunction = field(repr=False)
    energy: EnergyBreakdown
    lam: float
    pohozaev: PohozaevValue
    pg_norm: float
    iterations: int
    mass: float
    kinetic: float
    converged: bool
    guard_activations: int
    step_final: float
    step_min: float
    step_max: float
    backtracks: int
    tol: float
    s_ceiling: float

    def to_json_dict(self):
        return {
            "energy": self.energy.to_json_dict(),
            "lambda": self.lam,
            "pohozaev": self.pohozaev.to_json_dict(),
            "pg_norm": self.pg_norm,
            "iterations": self.iterations,
            "mass": self.mass,
            "kinetic": self.kinetic,
            "converged": self.converged,
            "guard_activations": self.guard_activations,
            "step_final": self.step_final,
            "step_min": self.step_min,
            "step_max": self.step_max,
            "backtracks": self.backtracks,
            "tol": self.tol,
            "s_ceiling": self.s_ceiling,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def _renormalized(grid: RadialGrid, values: np.ndarray, c: float) -> RadialFunction:
    u = RadialFunction(grid, values)
    m = u.mass
    if not m > 0.0:
        raise NumericFailureError("iterate lost all mass")
    return u.with_values(values * math.sqrt(c / m))


def project_tangent(u: RadialFunction, G: RadialFunction) -> np.ndarray:
    """Tangential part of G at u on the mass sphere (L^2 projection)."""
    grid = u.grid
    inner = float(grid.w @ (G.values * u.values))
    return G.values - (inner / u.mass) * u.values


def descent_direction(u: RadialFunction, G: RadialFunction) -> tuple[np.ndarray, float]:
    """H^1-preconditioned tangential descent direction and its slope.

    The gradient is projected onto the sphere tangent space BEFORE the
    Riesz solve: feeding the full gradient would smear its normal
    component (the multiplier mode) across the solve and the final
    projection could not remove it, killing the descent property.  With
    the projected functional w*pg as right-hand side the slope equals
    d^T (s W + D^T W D) d, strictly positive away from stationary
    points; since <pg, u> = 0 the second projection only mops up
    rounding.

    The shift s tracks the multiplier estimate -<G, u>/||u||^2 (floored
    at 1, quantized to a power of two so factorizations are reused):
    near a constrained critical point the Lagrangian Hessian is
    -Laplacian + lambda + lower order, so the matched metric keeps the
    preconditioned curvature O(1) whether lambda is 0.05 or 3000.
    """
    grid = u.grid
    mass = u.mass
    inner = float(grid.w @ (G.values * u.values))
    shift = 2.0 ** round(math.log2(max(1.0, -inner / mass)))
    pg = G.values - (inner / mass) * u.values
    raw = grid.w * pg
    d = sobolev_solve(grid, raw, shift)
    d[0] = 0.0
    d_inner = float(grid.w @ (d * u.values))
    d_tan = d - (d_inner / mass) * u.values
    slope = float(raw @ d_tan)
    return d_tan, slope


def minimize_local(c: float, g: Perturbation | None, grid: RadialGrid,
                   options: SolverOptions | None = None,
                   seed: RadialFunction | None = None,
                   constants_report=None) -> SolverReport:
    """Projected gradient descent for the local minimizer at mass c.

    Requires 0 < c < c0(g); raises OutOfRegimeError otherwise.  The
    returned report flags convergence only when the projected gradient
    is below tol, the mass is exact to 1e-12 relative, and the kinetic
    energy sits strictly under the ceiling s0.
    """
    if g is None:
        raise InvalidArgumentError("the local minimization regime needs a perturbation")
    opts = options or SolverOptions()
    if constants_report is None:
        constants_report = _constants.thresholds(g, (c,))
    c0 = constants_report.c0
    if not (0.0 < c < c0):
        raise OutOfRegimeError(f"mass {c:.6g} is not inside (0, c0 = {c0:.6g})")
    s0 = _constants.s_zero(c, constants_report.c4, constants_report.g_norm_43)

    u = seed if seed is not None else seed_function(c, grid)
    if u.grid is not grid:
        raise InvalidArgumentError("seed must live on the supplied grid")
    u = _renormalized(grid, u.values, c)
    if u.kinetic >= s0:
        raise OutOfRegimeError("seed kinetic energy already at the ceiling s0")

    step = opts.step
    step_min, step_max = step, step
    guard_hits = 0
    n_backtracks = 0
    phi = energy(u, g).total
    pg_norm = math.inf
    it = 0
    converged = False

    for it in range(1, opts.max_iter + 1):
        G = gradient(u, g)
        pg = project_tangent(u, G)
        pg_norm = math.sqrt(float(grid.w @ pg**2))
        if pg_norm <= opts.tol:
            converged = True
            break

        direction, slope = descent_direction(u, G)
        if not slope > 0.0:
            direction, slope = pg, pg_norm**2

        accepted = False
        for _ in range(opts.max_backtracks):
            trial = _renormalized(grid, u.values - step * direction, c)
            if trial.kinetic >= s0:
                guard_hits += 1
                step *= opts.backtrack
                step_min = min(step_min, step)
                continue
            phi_trial = energy(trial, g).total
            if phi_trial <= phi - opts.armijo * step * slope:
                u, phi = trial, phi_trial
                accepted = True
                # growth cap keeps the next line search short
                step = min(step * opts.grow, 64.0)
                step_max = max(step_max, step)
                break
            n_backtracks += 1
            step *= opts.backtrack
            step_min = min(step_min, step)
        if not accepted:
            break

    final_energy = energy(u, g)
    lam = multiplier(u, g)
    P = pohozaev(u, g)
    mass = u.mass
    kinetic = u.kinetic
    ok = (
        converged
        and abs(mass - c) <= 1e-12 * c
        and kinetic < s0
    )
    return SolverReport(
        u=u, energy=final_energy, lam=lam, pohozaev=P, pg_norm=pg_norm,
        iterations=it, mass=mass, kinetic=kinetic, converged=ok,
        guard_activations=guard_hits, step_final=step, step_min=step_min,
        step_max=step_max, backtracks=n_backtracks, tol=opts.tol,
        s_ceiling=s0,
    )
