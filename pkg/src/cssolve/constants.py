"""Sharp constants, series bounds and mass thresholds.

Three ingredients feed the smallness regime:

* the sharp constant C4 of ||u||_4 <= C4 ||u||_2^{1/2} ||grad u||_2^{1/2},
  obtained from the ground state Q of -Q'' - Q'/r + Q = Q^3 via
  C4 = (2 / ||Q||_2^2)^{1/4}, computed here by shooting;

* the entire series  zeta(t) = sum_{k>=0} a_k t^k  with
  a_k = (4^{k+2}(k+1) + 1) / ((k+1)(k+3)!),  zeta(0) = 17/6,
  which controls the exponential remainder on mass-constrained balls,
  together with its weighted companion  zeta2(t) = sum (k+2) a_k t^k;

* the lower envelope
  h(c, s) = 1/12 - c^{1/4} s^{-3/4} C4 ||g||_{4/3}
            - (c^{3/2} s^{1/2} / pi^2) zeta(sqrt(c / 3 pi)),
  positive on (0, s0] for small mass, where s0 = min(s_c, pi/3) and s_c
  is the stationary point of the two c-dependent terms.

The admissible mass range is c < c0 = min(c1, c2), where c1 and c2 are
the roots of two explicit monotone threshold functions E1, E2 = 1.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import InvalidArgumentError, NumericFailureError, TruncationWarning
from .perturbation import Perturbation

__all__ = [
    "zeta",
    "zeta_weighted",
    "GNReport",
    "gn_sharp_constant",
    "h_tilde",
    "s_crit",
    "s_zero",
    "kappa_lower_bound",
    "e1",
    "e2",
    "CEntry",
    "ConstantsReport",
    "thresholds",
]

ZETA_WARN_THRESHOLD = 10.0
_MAX_TERMS = 500


def _zeta_generic(t: float, weight) -> float:
    if not (t >= 0.0 and math.isfinite(t)):
        raise InvalidArgumentError("series argument must be finite and nonnegative")
    if t > ZETA_WARN_THRESHOLD:
        warnings.warn(
            f"series argument {t:.3g} > {ZETA_WARN_THRESHOLD:g}; "
            "truncation error may dominate",
            TruncationWarning,
            stacklevel=3,
        )
    total = 0.0
    tk = 1.0
    for k in range(_MAX_TERMS):
        a_k = (4.0 ** (k + 2) * (k + 1) + 1.0) / ((k + 1) * math.factorial(k + 3))
        term = weight(k) * a_k * tk
        total += term
        if term < 1e-15 * total and k > 2:
            return total
        tk *= t
    return total


def zeta(t: float) -> float:
    """zeta(t) = sum a_k t^k; zeta(0) = 17/6.  Warns beyond t = 10."""
    return _zeta_generic(t, lambda k: 1.0)


def zeta_weighted(t: float) -> float:
    """zeta2(t) = sum (k+2) a_k t^k, the derivative-weighted companion."""
    return _zeta_generic(t, lambda k: k + 2.0)


# ---------------------------------------------------------------------------
# Ground-state shooting


def _townes_rhs(r, y):
    return [y[1], -y[1] / r + y[0] - y[0] ** 3]


def _classify(a: float, r_end: float):
    """Integrate from the series start; +1 overshoot (profile crosses zero),
    -1 undershoot (slope turns positive first)."""
    r0 = 1e-8
    b = (a - a**3) / 4.0
    y0 = [a + b * r0**2, 2.0 * b * r0]

    def cross_zero(r, y):
        return y[0]

    cross_zero.terminal = True
    cross_zero.direction = -1

    def turn_up(r, y):
        return y[1]

    turn_up.terminal = True
    turn_up.direction = 1

    sol = solve_ivp(
        _townes_rhs, (r0, r_end), y0, method="DOP853",
        rtol=1e-12, atol=1e-14, events=(cross_zero, turn_up), dense_output=True,
    )
    if sol.t_events[0].size:
        return 1, sol
    if sol.t_events[1].size:
        return -1, sol
    return (1 if sol.y[0, -1] <= 0.0 else -1), sol


_GN_CACHE: dict[int, "GNReport"] = {}


@dataclass(frozen=True)
class GNReport:
    """Shooting result: sharp constant, ground-state data, self-test ratio."""

    c4: float
    a_star: float
    mass_q: float
    kinetic_q: float
    l4_q: float
    extremality_ratio: float
    resolution: int

    def to_json_dict(self):
        return {
            "c4": self.c4,
            "a_star": self.a_star,
            "mass_q": self.mass_q,
            "kinetic_q": self.kinetic_q,
            "l4_q": self.l4_q,
            "extremality_ratio": self.extremality_ratio,
            "resolution": self.resolution,
        }


def gn_sharp_constant(resolution: int = 4096) -> GNReport:
    """Sharp interpolation constant via bisection on the initial height.

    resolution sets the quadrature density for the profile integrals;
    the shooting tolerance itself is fixed near machine precision.
    Raises on a non-bracketing initial interval.
    """
    if resolution in _GN_CACHE:
        return _GN_CACHE[resolution]
    if resolution < 16:
        raise InvalidArgumentError("resolution must be at least 16")
    r_end = 20.0
    lo, hi = 2.0, 2.5
    s_lo, _ = _classify(lo, r_end)
    s_hi, _ = _classify(hi, r_end)
    if not (s_lo < 0 < s_hi):
        raise NumericFailureError(
            f"shooting interval [{lo}, {hi}] does not bracket the ground state"
        )
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        s_mid, _ = _classify(mid, r_end)
        if s_mid > 0:
            hi = mid
        else:
            lo = mid
    a_star = 0.5 * (lo + hi)
    side, sol = _classify(a_star, r_end)
    r_cut = min(float(sol.t[-1]), r_end)

    n = resolution if resolution % 2 == 0 else resolution + 1
    rr = np.linspace(sol.t[0], r_cut, n + 1)
    yy = sol.sol(rr)
    q, dq = yy[0], yy[1]
    two_pi_r = 2.0 * math.pi * rr
    from scipy.integrate import simpson

    mass = float(simpson(two_pi_r * q**2, x=rr))
    kinetic = float(simpson(two_pi_r * dq**2, x=rr))
    l4 = float(simpson(two_pi_r * q**4, x=rr))
    c4 = (2.0 / mass) ** 0.25
    ratio = l4 / (c4**4 * mass * kinetic)
    report = GNReport(
        c4=c4, a_star=a_star, mass_q=mass, kinetic_q=kinetic, l4_q=l4,
        extremality_ratio=ratio, resolution=resolution,
    )
    _GN_CACHE[resolution] = report
    return report


# ---------------------------------------------------------------------------
# Envelope and thresholds


def h_tilde(c: float, s: float, c4: float, g_norm_43: float) -> float:
    """Lower envelope for Phi / kinetic on the mass-c sphere at kinetic s."""
    if not (c > 0.0 and s > 0.0):
        raise InvalidArgumentError("h_tilde needs positive mass and kinetic")
    z = zeta(math.sqrt(c / (3.0 * math.pi)))
    return (
        1.0 / 12.0
        - c**0.25 * s**-0.75 * c4 * g_norm_43
        - (c**1.5 * s**0.5 / math.pi**2) * z
    )


def s_crit(c: float, c4: float, g_norm_43: float) -> float:
    """Stationary point of the two mass-dependent envelope terms."""
    if not c > 0.0:
        raise InvalidArgumentError("mass must be positive")
    z = zeta(math.sqrt(c / (3.0 * math.pi)))
    return (3.0 * math.pi**2 * c4 * g_norm_43 / (2.0 * c**1.25 * z)) ** 0.8


def s_zero(c: float, c4: float, g_norm_43: float) -> float:
    """Kinetic ceiling s0 = min(s_c, pi/3) used by the local problem."""
    return min(s_crit(c, c4, g_norm_43), math.pi / 3.0)


def kappa_lower_bound(c: float, c4: float, g_norm_43: float) -> float:
    """s0 * h(c, s0): positive lower bound for energies at kinetic s0."""
    s0 = s_zero(c, c4, g_norm_43)
    return s0 * h_tilde(c, s0, c4, g_norm_43)


def e1(c: float, c4: float, g_norm_43: float) -> float:
    """First threshold function; its root c1 makes the envelope peak vanish."""
    z = zeta(math.sqrt(c / (3.0 * math.pi)))
    inner = 2.0 * c**1.25 * z / (3.0 * math.pi**2 * c4 * g_norm_43)
    return 30.0 * c**0.25 * c4 * g_norm_43 * inner**0.6


def e2(c: float, c4: float, g_norm_43: float) -> float:
    """Second threshold function; its root c2 controls the pi/3 branch."""
    z = zeta(math.sqrt(c / (3.0 * math.pi)))
    s = math.pi / 3.0
    return (
        12.0 * c**0.25 * s**-0.75 * c4 * g_norm_43
        + 12.0 * (c**1.5 * s**0.5 / math.pi**2) * z
    )


def _root_of(fn, c4, g_norm_43) -> float:
    """Root of fn(c) = 1 by bracketed root-finding at relative precision."""
    lo = 1e-30
    hi = 1.0
    for _ in range(200):
        if fn(hi, c4, g_norm_43) > 1.0:
            break
        hi *= 2.0
    else:
        raise NumericFailureError("threshold function never exceeds 1")
    if fn(lo, c4, g_norm_43) >= 1.0:
        raise NumericFailureError("threshold function exceeds 1 at the bracket floor")
    return float(
        brentq(lambda c: fn(c, c4, g_norm_43) - 1.0, lo, hi,
               xtol=1e-300, rtol=8.9e-16, maxiter=300)
    )


@dataclass(frozen=True)
class CEntry:
    """Per-mass diagnostics attached to a thresholds report."""

    c: float
    in_regime: bool
    zeta_value: float
    s_c: float
    s_0: float
    h_tilde_at_s0: float
    kappa_lower: float
    e1_value: float
    e2_value: float
    e1_strictly_below: bool
    e2_strictly_below: bool

    def to_json_dict(self):
        return {
            "c": self.c,
            "in_regime": self.in_regime,
            "zeta_value": self.zeta_value,
            "s_c": self.s_c,
            "s_0": self.s_0,
            "h_tilde_at_s0": self.h_tilde_at_s0,
            "kappa_lower": self.kappa_lower,
            "e1_value": self.e1_value,
            "e2_value": self.e2_value,
            "e1_strictly_below": self.e1_strictly_below,
            "e2_strictly_below": self.e2_strictly_below,
        }


@dataclass(frozen=True)
class ConstantsReport:
    c4: float
    g_norm_43: float
    c1: float
    c2: float
    c0: float
    e1_residual_at_c1: float
    e2_residual_at_c2: float
    entries: tuple[CEntry, ...]

    def to_json_dict(self):
        return {
            "c4": self.c4,
            "g_norm_43": self.g_norm_43,
            "c1": self.c1,
            "c2": self.c2,
            "c0": self.c0,
            "e1_residual_at_c1": self.e1_residual_at_c1,
            "e2_residual_at_c2": self.e2_residual_at_c2,
            "entries": [e.to_json_dict() for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def thresholds(g: Perturbation, c_values=(), resolution: int = 4096,
               c4: float | None = None) -> ConstantsReport:
    """Mass thresholds c1, c2, c0 = min for the given perturbation, plus
    per-mass envelope diagnostics for every requested c."""
    if c4 is None:
        c4 = gn_sharp_constant(resolution).c4
    gn = g.norm_43
    if not gn > 0.0:
        raise InvalidArgumentError("perturbation norm must be positive")
    c1 = _root_of(e1, c4, gn)
    c2 = _root_of(e2, c4, gn)
    c0 = min(c1, c2)
    entries = []
    for c in c_values:
        if not c > 0.0:
            raise InvalidArgumentError("requested mass values must be positive")
        zv = zeta(math.sqrt(c / (3.0 * math.pi)))
        sc = s_crit(c, c4, gn)
        s0 = min(sc, math.pi / 3.0)
        hval = h_tilde(c, s0, c4, gn)
        e1v = e1(c, c4, gn)
        e2v = e2(c, c4, gn)
        entries.append(
            CEntry(
                c=float(c), in_regime=bool(c < c0), zeta_value=zv, s_c=sc,
                s_0=s0, h_tilde_at_s0=hval, kappa_lower=s0 * hval,
                e1_value=e1v, e2_value=e2v,
                e1_strictly_below=bool(e1v < 1.0),
                e2_strictly_below=bool(e2v < 1.0),
            )
        )
    return ConstantsReport(
        c4=c4, g_norm_43=gn, c1=c1, c2=c2, c0=c0,
        e1_residual_at_c1=abs(e1(c1, c4, gn) - 1.0),
        e2_residual_at_c2=abs(e2(c2, c4, gn) - 1.0),
        entries=tuple(entries),
    )
