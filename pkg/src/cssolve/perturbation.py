"""The radial inhomogeneity g and its hypothesis checkers.

The theory asks four things of g: nonnegativity with L^{4/3} integrability
(G1), the sign condition 2g + r g' >= 0 (G2), monotonicity of t -> g(tr)
(G3), and the one-parameter comparison g(r) - g(theta r) <= (1-theta) r g'(r)
for some theta in (0,1) (G4).  Pointwise universally quantified hypotheses
cannot be decided by sampling, so the checkers report worst violations over
declared sample sets; for a clean result the honest reading is "no
violation found", not "holds".

The concrete profile shipped here is 1/2 inside the unit disk and
(r^2+1)^{-1} outside, continuous at r=1 with a kink; its radial derivative
at the kink is taken from the outer branch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .errors import InvalidArgumentError

__all__ = [
    "Perturbation",
    "AssumptionCheck",
    "AssumptionReport",
    "example_g",
    "check_assumptions",
    "save_perturbation_csv",
    "load_perturbation_csv",
]


def _lp43_norm(f: Callable, breakpoints: tuple[float, ...], upper: float | None) -> float:
    """||f||_{4/3} over R^2 for radial f, adaptive quadrature to ~1e-10.

    upper=None integrates the last piece to infinity (the profile must
    decay); a finite upper truncates, for sampled profiles.
    """
    def integrand(r):
        return abs(f(np.asarray([r]))[0]) ** (4.0 / 3.0) * r

    pts = sorted(p for p in breakpoints if p > 0.0)
    total = 0.0
    lo = 0.0
    for p in pts:
        val, _ = quad(integrand, lo, p, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
        lo = p
    if upper is None:
        val, _ = quad(integrand, lo, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    else:
        val, _ = quad(integrand, lo, upper, epsabs=1e-13, epsrel=1e-12, limit=200)
    total += val
    return (2.0 * math.pi * total) ** 0.75


@dataclass
class Perturbation:
    """Radial perturbation profile with derivative and L^{4/3} data.

    profile and radial_derivative are vectorized callables of r >= 0;
    radial_derivative(r) is g'(r), so that grad g(x) . x = r g'(r).
    """

    profile: Callable[[np.ndarray], np.ndarray]
    radial_derivative: Callable[[np.ndarray], np.ndarray]
    norm_43: float
    norm_43_radial_derivative: float
    name: str = "custom"
    breakpoints: tuple[float, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_callables(cls, profile, radial_derivative, name="custom",
                       breakpoints=(), upper=None) -> "Perturbation":
        norm = _lp43_norm(profile, breakpoints, upper)
        gx = lambda r: np.asarray(r) * radial_derivative(np.asarray(r))
        norm_dx = _lp43_norm(gx, breakpoints, upper)
        return cls(profile=profile, radial_derivative=radial_derivative,
                   norm_43=norm, norm_43_radial_derivative=norm_dx,
                   name=name, breakpoints=tuple(breakpoints))

    def scaled(self, factor: float) -> "Perturbation":
        """factor * g; the L^{4/3} norms scale linearly, no requadrature."""
        if not (factor > 0.0):
            raise InvalidArgumentError("scale factor must be positive")
        g, gp = self.profile, self.radial_derivative
        return Perturbation(
            profile=lambda r: factor * g(r),
            radial_derivative=lambda r: factor * gp(r),
            norm_43=factor * self.norm_43,
            norm_43_radial_derivative=factor * self.norm_43_radial_derivative,
            name=f"{self.name}*{factor:g}",
            breakpoints=self.breakpoints,
        )

    def samples_on(self, grid) -> np.ndarray:
        key = ("g", id(grid))
        if key not in self._cache:
            v = np.asarray(self.profile(grid.r), dtype=float)
            v.setflags(write=False)
            self._cache[key] = v
        return self._cache[key]

    def derivative_samples_on(self, grid) -> np.ndarray:
        key = ("gp", id(grid))
        if key not in self._cache:
            v = np.asarray(self.radial_derivative(grid.r), dtype=float)
            v.setflags(write=False)
            self._cache[key] = v
        return self._cache[key]

    @property
    def assumptions(self) -> "AssumptionReport":
        """Report of the default (G1)-(G4) scan, computed on first read."""
        if "assumptions" not in self._cache:
            self._cache["assumptions"] = check_assumptions(self)
        return self._cache["assumptions"]


def example_g() -> Perturbation:
    """The shipped profile: 1/2 on [0,1], (r^2+1)^{-1} on [1, inf).

    Continuous at r=1; the kink derivative uses the outer branch.  Its
    L^{4/3} norm has the closed form (pi 2^{-4/3} + 3 pi 2^{-1/3})^{3/4},
    reproduced here by quadrature.
    """
    def g(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= 1.0, 0.5, 1.0 / (r * r + 1.0))

    def gp(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < 1.0, 0.0, -2.0 * r / (r * r + 1.0) ** 2)

    return Perturbation.from_callables(g, gp, name="example", breakpoints=(1.0,))


@dataclass(frozen=True)
class AssumptionCheck:
    """One hypothesis: pass flag, worst violation and where it occurred."""
    passed: bool
    worst_violation: float
    worst_location: float | None
    detail: str

    def to_json_dict(self):
        return {"passed": self.passed,
                "worst_violation": self.worst_violation,
                "worst_location": self.worst_location,
                "detail": self.detail}


@dataclass(frozen=True)
class AssumptionReport:
    g1: AssumptionCheck
    g2: AssumptionCheck
    g3: AssumptionCheck
    g4_passing_thetas: tuple[float, ...]
    g4_worst_by_theta: tuple[tuple[float, float, float], ...]  # (theta, violation, radius)
    theta_grid: tuple[float, ...]
    sample_radii: tuple[float, ...]

    @property
    def g4_exists(self) -> bool:
        return len(self.g4_passing_thetas) > 0

    def to_json_dict(self):
        return {
            "g1": self.g1.to_json_dict(),
            "g2": self.g2.to_json_dict(),
            "g3": self.g3.to_json_dict(),
            "g4_passing_thetas": list(self.g4_passing_thetas),
            "g4_worst_by_theta": [
                {"theta": t, "worst_violation": v, "worst_location": r}
                for t, v, r in self.g4_worst_by_theta
            ],
            "g4_exists": self.g4_exists,
            "theta_grid": list(self.theta_grid),
            "n_sample_radii": len(self.sample_radii),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def _default_radii() -> np.ndarray:
    return np.logspace(-3.0, 3.0, 121)


def check_assumptions(g: Perturbation,
                      theta_grid=None,
                      sample_radii=None,
                      tol: float = 1e-12) -> AssumptionReport:
    """Scan (G1)-(G4) over sample radii; failures are data, not faults.

    (G4) is an existence statement in theta, so the report carries the
    set of sampled theta that pass everywhere, along with each theta's
    worst violation and its location.
    """
    thetas = np.arange(0.1, 0.95, 0.1) if theta_grid is None else np.asarray(theta_grid, dtype=float)
    radii = _default_radii() if sample_radii is None else np.asarray(sample_radii, dtype=float)

    gv = np.asarray(g.profile(radii), dtype=float)
    gpv = np.asarray(g.radial_derivative(radii), dtype=float)

    def worst(viol):
        i = int(np.argmax(viol))
        return float(max(viol[i], 0.0)), float(radii[i])

    v1 = -gv
    w1, r1 = worst(v1)
    g1 = AssumptionCheck(w1 <= tol, w1, r1 if w1 > tol else None,
                         "g >= 0 at all sampled radii" if w1 <= tol else "negative sample found")

    v2 = -(2.0 * gv + radii * gpv)
    w2, r2 = worst(v2)
    g2 = AssumptionCheck(w2 <= tol, w2, r2 if w2 > tol else None,
                         "2g + r g' >= 0 at all sampled radii" if w2 <= tol else "sign condition violated")

    v3 = gpv
    w3, r3 = worst(v3)
    g3 = AssumptionCheck(w3 <= tol, w3, r3 if w3 > tol else None,
                         "g' <= 0 at all sampled radii" if w3 <= tol else "profile increases somewhere")

    passing = []
    by_theta = []
    for th in thetas:
        lhs = gv - np.asarray(g.profile(th * radii), dtype=float)
        rhs = (1.0 - th) * radii * gpv
        v4 = lhs - rhs
        w4, r4 = worst(v4)
        by_theta.append((float(th), w4, r4))
        if w4 <= tol:
            passing.append(float(th))

    return AssumptionReport(
        g1=g1, g2=g2, g3=g3,
        g4_passing_thetas=tuple(passing),
        g4_worst_by_theta=tuple(by_theta),
        theta_grid=tuple(float(t) for t in thetas),
        sample_radii=tuple(float(r) for r in radii),
    )


def save_perturbation_csv(g: Perturbation, radii, path) -> None:
    """Write samples of g at the given radii, columns r,g,gprime."""
    import csv as _csv
    r = np.asarray(radii, dtype=float)
    gs = np.asarray(g.profile(r), dtype=float)
    gps = np.asarray(g.radial_derivative(r), dtype=float)
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["r", "g", "gprime"])
        for a, b, c in zip(r, gs, gps):
            writer.writerow([format(a, ".17g"), format(b, ".17g"), format(c, ".17g")])


def load_perturbation_csv(path, tail_norm_43: float = 0.0) -> Perturbation:
    """Read a sampled profile with columns r,g,gprime.

    The samples become monotone cubic interpolants, zero beyond the last
    radius; the L^{4/3} norms integrate the truncated range only, plus
    the caller-declared tail contribution (default none).
    """
    import csv as _csv
    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        if [c.strip() for c in header[:3]] != ["r", "g", "gprime"]:
            raise InvalidArgumentError(f"expected header 'r,g,gprime', got {header!r}")
        rows = [(float(a), float(b), float(c)) for a, b, c, *_ in reader]
    r = np.array([a for a, _, _ in rows])
    if r.size < 2 or np.any(np.diff(r) <= 0):
        raise InvalidArgumentError("radii must be strictly increasing")
    gs = np.array([b for _, b, _ in rows])
    gps = np.array([c for _, _, c in rows])
    pg = PchipInterpolator(r, gs, extrapolate=False)
    pgp = PchipInterpolator(r, gps, extrapolate=False)
    rmax = float(r[-1])

    def prof(x):
        x = np.asarray(x, dtype=float)
        out = np.nan_to_num(pg(np.clip(x, r[0], rmax)), nan=0.0)
        return np.where(x > rmax, 0.0, out)

    def dprof(x):
        x = np.asarray(x, dtype=float)
        out = np.nan_to_num(pgp(np.clip(x, r[0], rmax)), nan=0.0)
        return np.where(x > rmax, 0.0, out)

    norm = (_lp43_norm(prof, (rmax,), rmax) ** (4.0 / 3.0) + tail_norm_43 ** (4.0 / 3.0)) ** 0.75
    gx = lambda x: np.asarray(x) * dprof(np.asarray(x))
    norm_dx = _lp43_norm(gx, (rmax,), rmax)
    return Perturbation(profile=prof, radial_derivative=dprof,
                        norm_43=norm, norm_43_radial_derivative=norm_dx,
                        name="csv", breakpoints=(rmax,))
