"""Radial discretization of H^1_r(R^2).

Functions of one radial variable stand in for radial functions on the
plane; every integral over R^2 is realized as a weighted node sum

    int_{R^2} f(|x|) dx  =  2 pi int_0^R f(r) r dr  ~=  sum_i w_i f(r_i)

on a uniform mesh r_i = i h, h = R_max/N.  The weights are composite
Simpson weights times 2 pi r (with a 3/8 tail block when N is odd), so
smooth compactly decaying integrands come out to O(h^4).  Derivatives are
fourth-order finite differences assembled once per grid as a sparse
matrix.  The r=0 node never enters any functional: its area weight is
zero and all other derivative rows are built from nodes >= 1, which keeps
every discrete energy independent of the (measure-zero) sample u(0).

The module also houses the two mass-preserving dilations used by the
solvers, the logarithmic plateau test functions, and their closed-form
integrals.
"""

from __future__ import annotations

import csv
import math
import weakref
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import PchipInterpolator

from .errors import InvalidArgumentError

__all__ = [
    "RadialGrid",
    "RadialFunction",
    "STAB_ALPHA",
    "build_grid",
    "norms",
    "sobolev_solve",
    "dilate_mass_preserving",
    "gauge_dilate",
    "moser",
    "moser_exact_integrals",
    "prefix_integral",
    "prefix_integral_adjoint",
    "save_csv",
    "load_csv",
]

#: derivative at the right endpoint is zeroed when the function has
#: already decayed below this, to suppress one-sided truncation noise
EDGE_DECAY_EPS = 1e-14

#: weight of the grid-oscillation penalty folded into the kinetic term.
#: Centered difference stencils annihilate the two-node alternating mode,
#: so the bare quadratic form is blind to it while the exponential term
#: actively rewards it; the penalty (alpha/h^2)||D2 u||_w^2 restores
#: coercivity.  For smooth profiles it contributes alpha * h^2 ||u''||^2,
#: about 1e-10 relative on the reference grid: far below every stated
#: tolerance, while the alternating mode is suppressed by roughly four
#: orders of magnitude more than the exponential term can pay.
STAB_ALPHA = 1e-5


def _simpson_sigma(N: int, h: float) -> np.ndarray:
    """Composite Simpson weights for int_0^{Nh} f dr on N+1 uniform nodes.

    Even N is plain composite Simpson.  Odd N uses Simpson on the first
    N-3 intervals and a 3/8 block on the last three, keeping O(h^4).
    """
    sig = np.zeros(N + 1)
    if N % 2 == 0:
        sig[0:N + 1:2] = 2.0
        sig[1:N:2] = 4.0
        sig[0] = 1.0
        sig[N] = 1.0
        sig *= h / 3.0
    else:
        if N >= 3:
            sig[:N - 2] = _simpson_sigma(N - 3, h)
            sig[N - 3:] += np.array([3.0, 9.0, 9.0, 3.0]) * (h / 8.0)
        else:  # N == 1, trapezoid is all there is
            sig[:] = h / 2.0
    return sig


def _fd4_matrix(N: int, h: float) -> sp.csr_matrix:
    """Fourth-order first-derivative matrix on N+1 uniform nodes.

    Row 0 is the usual left-edge stencil and exists for reporting only
    (its quadrature weight is zero).  Rows 1 and 2 use stencils built
    from nodes 1..5 so that no energy depends on u(0).  Interior rows are
    centered; the last two rows mirror rows 2 and 0.
    """
    left = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h)
    # derivative at the second node of a five-node block, offsets -1..3
    biased = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12.0 * h)
    centered = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * h)

    rows, cols, vals = [], [], []
    for j in range(5):
        rows.append(0); cols.append(j); vals.append(left[j])
        rows.append(1); cols.append(1 + j); vals.append(left[j])
        rows.append(2); cols.append(1 + j); vals.append(biased[j])
        rows.append(N - 1); cols.append(N - j); vals.append(-biased[j])
        rows.append(N); cols.append(N - j); vals.append(-left[j])
    idx = np.arange(3, N - 1)
    for k, off in enumerate((-2, -1, 1, 2)):
        rows.extend(idx)
        cols.extend(idx + off)
        vals.extend(np.full(idx.size, centered[k]))
    return sp.csr_matrix((vals, (rows, cols)), shape=(N + 1, N + 1))


def _second_diff_matrix(N: int) -> sp.csr_matrix:
    """Undivided second differences u_{i-1} - 2u_i + u_{i+1}.

    Row 1 is shifted to nodes 1..3 so that, like the first-derivative
    rows, no energy reads u(0); rows 0 and N stay empty.  Used only for
    the oscillation penalty, where O(h) placement error is irrelevant.
    """
    rows, cols, vals = [], [], []
    for j, v in enumerate((1.0, -2.0, 1.0)):
        rows.append(1); cols.append(1 + j); vals.append(v)
    idx = np.arange(2, N)
    for off, v in ((-1, 1.0), (0, -2.0), (1, 1.0)):
        rows.extend(idx)
        cols.extend(idx + off)
        vals.extend(np.full(idx.size, v))
    return sp.csr_matrix((vals, (rows, cols)), shape=(N + 1, N + 1))


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform truncated radial mesh with area-quadrature weights.

    weights w_i satisfy sum_i w_i f(r_i) ~= int_{R^2} f(|x|) dx; the
    constant function integrates to pi R_max^2 exactly (the integrand
    2 pi r is linear and the rule is exact through cubics).
    """

    r: np.ndarray
    w: np.ndarray
    R_max: float
    N: int
    h: float
    deriv: sp.csr_matrix = field(repr=False)
    deriv_t: sp.csr_matrix = field(repr=False)
    second: sp.csr_matrix = field(repr=False)
    second_t: sp.csr_matrix = field(repr=False)

    def __post_init__(self):
        self.r.setflags(write=False)
        self.w.setflags(write=False)

    def area_integral(self, samples: np.ndarray) -> float:
        """sum_i w_i samples_i, the discrete integral over R^2."""
        return float(self.w @ samples)


def build_grid(R_max: float, N: int) -> RadialGrid:
    """Uniform grid on [0, R_max] with N intervals and area weights."""
    if not (R_max > 0.0) or not math.isfinite(R_max):
        raise InvalidArgumentError(f"R_max must be positive, got {R_max}")
    if int(N) != N or N < 2:
        raise InvalidArgumentError(f"N must be an integer >= 2, got {N}")
    N = int(N)
    h = R_max / N
    r = np.linspace(0.0, R_max, N + 1)
    w = 2.0 * np.pi * r * _simpson_sigma(N, h)
    D = _fd4_matrix(N, h)
    D2 = _second_diff_matrix(N)
    return RadialGrid(r=r, w=w, R_max=float(R_max), N=N, h=h,
                      deriv=D, deriv_t=D.T.tocsr(),
                      second=D2, second_t=D2.T.tocsr())


class RadialFunction:
    """Sampled radial profile with lazily cached integral scalars.

    Values are frozen at construction; mass, kinetic and quartic caches
    are filled on first read by the same code a fresh recomputation would
    run, so a cached value always equals recomputation bit for bit.
    """

    __slots__ = ("grid", "values", "_cache")

    def __init__(self, grid: RadialGrid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.r.shape:
            raise InvalidArgumentError(
                f"values shape {values.shape} does not match grid {grid.r.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("values must be finite")
        values = values.copy()
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self._cache = {}

    def _compute(self, key: str) -> float:
        g = self.grid
        u = self.values
        if key == "mass":
            return float(g.w @ (u * u))
        if key == "kinetic":
            du = self.derivative()
            d2 = g.second @ u
            return float(g.w @ (du * du)) + (
                STAB_ALPHA / g.h**2) * float(g.w @ (d2 * d2))
        if key == "quartic":
            u2 = u * u
            return float(g.w @ (u2 * u2))
        raise KeyError(key)

    @property
    def mass(self) -> float:
        if "mass" not in self._cache:
            self._cache["mass"] = self._compute("mass")
        return self._cache["mass"]

    @property
    def kinetic(self) -> float:
        if "kinetic" not in self._cache:
            self._cache["kinetic"] = self._compute("kinetic")
        return self._cache["kinetic"]

    @property
    def quartic(self) -> float:
        if "quartic" not in self._cache:
            self._cache["quartic"] = self._compute("quartic")
        return self._cache["quartic"]

    def derivative(self) -> np.ndarray:
        """Fourth-order u'(r_i); the right-edge value is zeroed once the
        profile has decayed below EDGE_DECAY_EPS there."""
        if "deriv" not in self._cache:
            du = self.grid.deriv @ self.values
            if abs(self.values[-1]) < EDGE_DECAY_EPS:
                du[-1] = 0.0
            du.setflags(write=False)
            self._cache["deriv"] = du
        return self._cache["deriv"]

    def with_values(self, values: np.ndarray) -> "RadialFunction":
        return RadialFunction(self.grid, values)

    def interpolator(self) -> PchipInterpolator:
        """Monotone cubic interpolant of the samples, zero past R_max."""
        if "pchip" not in self._cache:
            self._cache["pchip"] = PchipInterpolator(
                self.grid.r, self.values, extrapolate=False)
        return self._cache["pchip"]


def norms(u: RadialFunction) -> tuple[float, float, float]:
    """(mass, kinetic, quartic) = (||u||_2^2, ||grad u||_2^2, ||u||_4^4)."""
    return u.mass, u.kinetic, u.quartic


_H1_FACTOR_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def sobolev_solve(grid: RadialGrid, rhs: np.ndarray, shift: float = 1.0) -> np.ndarray:
    """Solve (shift * W + D^T W D) d = rhs: the Riesz map of a shifted
    H^1 inner product.  Preconditioning descent directions with it
    removes the mesh-induced stiffness of the raw L^2 gradient flow,
    and matching `shift` to the current Lagrange multiplier keeps the
    preconditioned curvature O(1) even when the multiplier is large.

    Factorizations are cached per (grid, shift); callers should quantize
    shifts (powers of two work well) so the cache stays small.

    The origin node carries no quadrature weight and no energy coupling,
    so its row is the identity; pass rhs[0] = 0 to keep d[0] = 0.
    """
    per_grid = _H1_FACTOR_CACHE.get(grid)
    if per_grid is None:
        per_grid = {}
        _H1_FACTOR_CACHE[grid] = per_grid
    solver = per_grid.get(shift)
    if solver is None:
        W = sp.diags(grid.w)
        M = (shift * W + grid.deriv_t @ W @ grid.deriv
             + (STAB_ALPHA / grid.h**2) * (grid.second_t @ W @ grid.second)
             ).tolil()
        M[0, :] = 0.0
        M[0, 0] = 1.0
        solver = spla.splu(M.tocsc())
        per_grid[shift] = solver
    return solver.solve(np.asarray(rhs, dtype=float))


def _resample_scaled(u: RadialFunction, amplitude: float, scale: float) -> RadialFunction:
    """amplitude * u(scale * r) on u's own grid, zero beyond the data."""
    g = u.grid
    rs = scale * g.r
    inside = rs <= g.R_max
    vals = np.zeros_like(g.r)
    vals[inside] = u.interpolator()(rs[inside])
    np.nan_to_num(vals, copy=False)
    return RadialFunction(g, amplitude * vals)


def dilate_mass_preserving(u: RadialFunction, t: float) -> RadialFunction:
    """t * u(t r): preserves the continuum mass, scales kinetic by t^2."""
    if not (t > 0.0) or not math.isfinite(t):
        raise InvalidArgumentError(f"dilation parameter must be positive, got {t}")
    if t == 1.0:
        return RadialFunction(u.grid, u.values)
    return _resample_scaled(u, t, t)


def gauge_dilate(v: RadialFunction, t: float) -> RadialFunction:
    """e^t * v(e^t r), the mass-preserving dilation the saddle search uses."""
    if not math.isfinite(t):
        raise InvalidArgumentError(f"gauge parameter must be finite, got {t}")
    if t == 0.0:
        return RadialFunction(v.grid, v.values)
    s = math.exp(t)
    return _resample_scaled(v, s, s)


def moser(n: float, grid: RadialGrid) -> RadialFunction:
    """Logarithmic plateau profile supported in the unit ball.

    (2 pi)^{-1/2} * { sqrt(log n)        on [0, 1/n]
                      log(1/r)/sqrt(log n) on [1/n, 1]
                      0                   beyond },
    sampled exactly at the nodes.  Unit Dirichlet energy in the
    continuum; mass and quartic integral have the closed forms returned
    by moser_exact_integrals.
    """
    if not (n >= 2.0):
        raise InvalidArgumentError(f"plateau parameter must be >= 2, got {n}")
    if grid.R_max < 1.0:
        raise InvalidArgumentError("grid must reach past the unit ball")
    return RadialFunction(grid, _moser_values(grid.r, float(n)))


def _moser_values(r: np.ndarray, n: float) -> np.ndarray:
    L = math.log(n)
    vals = np.zeros_like(r)
    plateau = r <= 1.0 / n
    vals[plateau] = math.sqrt(L / (2.0 * math.pi))
    logpart = (r > 1.0 / n) & (r < 1.0)
    vals[logpart] = np.log(1.0 / r[logpart]) / math.sqrt(2.0 * math.pi * L)
    return vals


def moser_exact_integrals(n: float) -> tuple[float, float, float]:
    """(mass, kinetic, quartic) of the plateau profile, per-piece antiderivatives.

    On the log branch every integrand is r * log^k(1/r); repeated
    integration by parts gives the closed forms below.  The Dirichlet
    energy telescopes to exactly 1.
    """
    if not (n >= 2.0):
        raise InvalidArgumentError(f"plateau parameter must be >= 2, got {n}")
    n = float(n)
    L = math.log(n)
    n2 = n * n
    mass = 1.0 / (4.0 * L) - 1.0 / (4.0 * n2 * L) - 1.0 / (2.0 * n2)
    kinetic = 1.0
    quartic = (1.0 / (2.0 * math.pi)) * (
        3.0 / (4.0 * L * L)
        - L / n2
        - 3.0 / (2.0 * n2)
        - 3.0 / (2.0 * n2 * L)
        - 3.0 / (4.0 * n2 * L * L)
    )
    return mass, kinetic, quartic


def prefix_integral(samples: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral H_i = int_0^{r_i} f dr of uniform samples, O(h^4).

    Even-index nodes accumulate plain Simpson pairs; odd interior nodes
    add the cubic-exact half-panel rule (5, 8, -1)h/12, and a trailing
    odd node closes with its mirror (-1, 8, 5)h/12.
    """
    f = np.asarray(samples, dtype=float)
    N = f.size - 1
    H = np.zeros_like(f)
    if N < 1:
        return H
    if N == 1:
        H[1] = 0.5 * h * (f[0] + f[1])
        return H
    m = N // 2
    pair = (h / 3.0) * (f[0:2 * m - 1:2] + 4.0 * f[1:2 * m:2] + f[2:2 * m + 1:2])
    H[2:2 * m + 1:2] = np.cumsum(pair)
    odd = np.arange(1, N, 2)
    H[odd] = H[odd - 1] + (h / 12.0) * (5.0 * f[odd - 1] + 8.0 * f[odd] - f[odd + 1])
    if N % 2 == 1:
        H[N] = H[N - 1] + (h / 12.0) * (-f[N - 2] + 8.0 * f[N - 1] + 5.0 * f[N])
    return H


def prefix_integral_adjoint(p: np.ndarray, h: float) -> np.ndarray:
    """Transpose of prefix_integral as a linear map: <p, Cum f> = <Adj p, f>.

    Needed by the energy gradient; runs in O(N) with suffix sums instead
    of materializing the dense lower-triangular cumulative matrix.
    """
    p = np.asarray(p, dtype=float)
    N = p.size - 1
    out = np.zeros_like(p)
    if N < 1:
        return out
    if N == 1:
        out[0] = 0.5 * h * p[1]
        out[1] = 0.5 * h * p[1]
        return out
    m = N // 2
    # multiplier collected by each even prefix value H_{2j}
    P2 = np.zeros(m + 1)
    P2[1:] = p[2:2 * m + 1:2]
    odd = np.arange(1, N, 2)
    np.add.at(P2, (odd - 1) // 2, p[odd])
    if N % 2 == 1:
        P2[(N - 1) // 2] += p[N]
    S = np.cumsum(P2[::-1])[::-1]
    j = np.arange(1, m + 1)
    np.add.at(out, 2 * j - 2, (h / 3.0) * S[j])
    np.add.at(out, 2 * j - 1, (4.0 * h / 3.0) * S[j])
    np.add.at(out, 2 * j, (h / 3.0) * S[j])
    np.add.at(out, odd - 1, (5.0 * h / 12.0) * p[odd])
    np.add.at(out, odd, (8.0 * h / 12.0) * p[odd])
    np.add.at(out, odd + 1, (-h / 12.0) * p[odd])
    if N % 2 == 1:
        out[N - 2] += -h / 12.0 * p[N]
        out[N - 1] += 8.0 * h / 12.0 * p[N]
        out[N] += 5.0 * h / 12.0 * p[N]
    return out


def save_csv(u: RadialFunction, path) -> None:
    """Write the profile as `r,u` rows at full double precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "u"])
        for r, v in zip(u.grid.r, u.values):
            writer.writerow([format(r, ".17g"), format(v, ".17g")])


def load_csv(path, grid: RadialGrid | None = None) -> RadialFunction:
    """Read a profile written by save_csv.

    Without a grid argument the mesh is rebuilt from the radii column and
    checked for uniformity; with one, the radii must match its nodes.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [c.strip() for c in header[:2]] != ["r", "u"]:
            raise InvalidArgumentError(f"expected header 'r,u', got {header!r}")
        rows = [(float(a), float(b)) for a, b, *_ in reader]
    r = np.array([a for a, _ in rows])
    vals = np.array([b for _, b in rows])
    if grid is None:
        N = r.size - 1
        grid = build_grid(r[-1], N)
    if r.shape != grid.r.shape or not np.allclose(r, grid.r, rtol=0, atol=1e-12 * grid.R_max):
        raise InvalidArgumentError("radii in file do not match the grid nodes")
    return RadialFunction(grid, vals)
