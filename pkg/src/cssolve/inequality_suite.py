"""Corpus-based verification of the standalone inequalities.

Every inequality the analysis leans on is checked numerically over a
seeded corpus of radial functions: sharp interpolation (the L^4 case),
the radial decay estimate, the gauge-term bounds

    B(u) <= ||u||_2^2 ||u||_4^4 / (16 pi),
    ||u||_4^4 <= 4 ||grad u||_2 B(u)^{1/2},
    B(u) <= ||grad u||_2^2 ||u||_2^4 / (16 pi^2),

the even-power interpolation bounds for int u^{2k} (k = 3, 4), the two
series-controlled exponential moments (valid for kinetic < pi; the
corpus caps kinetic at 0.9 pi since both right sides blow up at pi),
a boundedness probe of the subcritical exponential integral at exponent
2 pi, the three-step chain bounding kinetic + gauge - quartic/2 from
below, and the energy envelope Phi >= K h(c, K) on the kinetic ball.

Hypotheses are enforced by multiplicative scaling, never rejection, so
the corpus is deterministic in (family, count, seed).  Records carry
both sides, the slack, and the witness id; a degenerate function skips
with a reason instead of failing.
"""

from __future__ import annotations

import csv as _csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import constants as _constants
from .errors import InvalidArgumentError
from .functionals import chern_simons, energy, exp_integrals
from .perturbation import Perturbation, example_g
from .radial_core import RadialFunction, RadialGrid, build_grid, dilate_mass_preserving, moser

__all__ = [
    "CorpusSpec",
    "InequalityRecord",
    "SuiteReport",
    "generate_corpus",
    "verify_corpus",
    "verify_lemma32_chain",
    "boundary_probe",
]

DEFAULT_TOLERANCES = {"algebraic": 1e-9, "quadrature": 1e-6}
KINETIC_SERIES_CAP = 0.9 * math.pi


@dataclass(frozen=True)
class CorpusSpec:
    """Deterministic corpus description: (family, count, seed) fixes it."""

    family: str = "mixed"
    count: int = 200
    seed: int = 20260819
    mass_target: float | None = None
    kinetic_target: float | None = None

    def __post_init__(self):
        if self.family not in ("gaussians", "tents", "moser", "mixed"):
            raise InvalidArgumentError(f"unknown corpus family {self.family!r}")
        if self.count < 1:
            raise InvalidArgumentError("corpus count must be positive")


@dataclass(frozen=True)
class InequalityRecord:
    inequality_id: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    witness_id: str
    skipped: bool = False
    reason: str = ""

    def to_json_dict(self):
        return {
            "inequality_id": self.inequality_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "passed": self.passed,
            "witness_id": self.witness_id,
            "skipped": self.skipped,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class SuiteReport:
    spec: CorpusSpec
    records: tuple[InequalityRecord, ...]
    n_pass: int
    n_fail: int
    n_skip: int
    tolerances: dict
    tm_empirical_max: float
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.n_fail == 0

    def worst_by_id(self) -> dict[str, InequalityRecord]:
        out: dict[str, InequalityRecord] = {}
        for rec in self.records:
            if rec.skipped:
                continue
            cur = out.get(rec.inequality_id)
            if cur is None or rec.slack < cur.slack:
                out[rec.inequality_id] = rec
        return out

    def to_json_dict(self):
        return {
            "family": self.spec.family,
            "count": self.spec.count,
            "seed": self.spec.seed,
            "n_pass": self.n_pass,
            "n_fail": self.n_fail,
            "n_skip": self.n_skip,
            "passed": self.passed,
            "tolerances": dict(self.tolerances),
            "tm_empirical_max": self.tm_empirical_max,
            "notes": list(self.notes),
            "records": [r.to_json_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["inequality_id", "witness_id", "lhs", "rhs", "slack",
                        "passed", "skipped", "reason"])
            for r in self.records:
                w.writerow([r.inequality_id, r.witness_id,
                            format(r.lhs, ".17g"), format(r.rhs, ".17g"),
                            format(r.slack, ".17g"), r.passed, r.skipped, r.reason])


# ---------------------------------------------------------------------------
# Corpus generation


def _gaussian_mixture(rng, grid):
    k = int(rng.integers(1, 4))
    vals = np.zeros_like(grid.r)
    for _ in range(k):
        amp = rng.uniform(0.1, 1.5)
        mu = rng.uniform(0.0, 3.0)
        sigma = rng.uniform(0.3, 1.5)
        vals += amp * np.exp(-((grid.r - mu) ** 2) / (2.0 * sigma**2))
    return vals


def _tent(rng, grid):
    k = int(rng.integers(1, 3))
    vals = np.zeros_like(grid.r)
    for _ in range(k):
        amp = rng.uniform(0.2, 2.0)
        # width floor keeps each bump resolvable on the reference grid
        width = rng.uniform(0.15, 1.5)
        mu = rng.uniform(0.0, 6.0)
        vals += amp * np.maximum(0.0, 1.0 - np.abs(grid.r - mu) / width)
    return vals


def _moser_sample(rng, grid):
    n = rng.uniform(3.0, 50.0)
    amp = rng.uniform(0.3, 1.5)
    t = rng.uniform(0.5, 2.0)
    u = moser(n, grid)
    u = u.with_values(amp * u.values)
    return dilate_mass_preserving(u, t).values


def generate_corpus(spec: CorpusSpec, grid: RadialGrid) -> list[tuple[str, RadialFunction]]:
    """Materialize (id, function) pairs; deterministic in the spec."""
    rng = np.random.default_rng(spec.seed)
    families = {
        "gaussians": _gaussian_mixture,
        "tents": _tent,
        "moser": _moser_sample,
    }
    if spec.family == "mixed":
        cycle = ("gaussians", "tents", "moser")
    else:
        cycle = (spec.family,)
    out = []
    for i in range(spec.count):
        fam = cycle[i % len(cycle)]
        vals = families[fam](rng, grid)
        u = RadialFunction(grid, vals)
        if spec.mass_target is not None and u.mass > 0.0:
            u = u.with_values(u.values * math.sqrt(spec.mass_target / u.mass))
        if spec.kinetic_target is not None and u.kinetic > 0.0:
            u = u.with_values(u.values * math.sqrt(spec.kinetic_target / u.kinetic))
        out.append((f"{fam}-{spec.seed}-{i:03d}", u))
    return out


def _scaled_down(u: RadialFunction, factor: float) -> RadialFunction:
    return u if factor >= 1.0 else u.with_values(u.values * math.sqrt(factor))


# ---------------------------------------------------------------------------
# Row evaluators.  Each returns (lhs, rhs) or raises _Skip.


class _Skip(Exception):
    pass


def _need_positive(*vals):
    if any(not v > 0.0 for v in vals):
        raise _Skip("degenerate function: a required norm vanishes")


def _row_gn_l4(u, ctx):
    _need_positive(u.mass, u.kinetic)
    return u.quartic, ctx["c4"] ** 4 * u.mass * u.kinetic


def _row_radial_decay(u, ctx):
    _need_positive(u.mass, u.kinetic)
    r = u.grid.r[1:]
    lhs = float(np.max(math.pi * r * u.values[1:] ** 2))
    return lhs, math.sqrt(u.mass * u.kinetic)


def _row_cs_mass_quartic(u, ctx):
    _need_positive(u.mass)
    return chern_simons(u), u.mass * u.quartic / (16.0 * math.pi)


def _row_quartic_vs_cs(u, ctx):
    _need_positive(u.kinetic)
    B = chern_simons(u)
    return u.quartic, 4.0 * math.sqrt(u.kinetic) * math.sqrt(B)


def _row_cs_kinetic_mass(u, ctx):
    _need_positive(u.mass, u.kinetic)
    return chern_simons(u), u.kinetic * u.mass**2 / (16.0 * math.pi**2)


def _even_power(u, k):
    grid = u.grid
    return float(grid.w @ u.values ** (2 * k))


def _row_u2k(k):
    def row(u, ctx):
        _need_positive(u.mass, u.kinetic)
        lead = (2.0 + 2.0 ** (2 * k - 1) * (k - 2)) / ((k - 2) * math.pi ** (k - 1))
        tail = math.factorial(k) / (2.0 * math.pi ** (k - 1))
        rhs = lead * (u.mass * u.kinetic) ** (k / 2.0) + tail * u.kinetic**k
        return _even_power(u, k), rhs

    return row


def _capped_for_series(u):
    if u.kinetic >= KINETIC_SERIES_CAP:
        u = _scaled_down(u, KINETIC_SERIES_CAP / u.kinetic)
    return u


def _row_exp_moment_f(u, ctx):
    u = _capped_for_series(u)
    _need_positive(u.mass, u.kinetic)
    K, c = u.kinetic, u.mass
    i_f, _, _ = exp_integrals(u)
    z = _constants.zeta(math.sqrt(c * K) / math.pi)
    rhs = (
        0.5 * u.quartic
        + K**3 / (2.0 * math.pi * (math.pi - K))
        + 2.0 * c**1.5 * K**1.5 / math.pi**2 * z
    )
    return i_f, rhs


def _row_exp_moment_p(u, ctx):
    u = _capped_for_series(u)
    _need_positive(u.mass, u.kinetic)
    K, c = u.kinetic, u.mass
    _, i_p, _ = exp_integrals(u)
    z2 = _constants.zeta_weighted(math.sqrt(c * K) / math.pi)
    rhs = (
        0.5 * u.quartic
        + (2.0 * math.pi - K) * K**3 / (2.0 * math.pi * (math.pi - K) ** 2)
        + 2.0 * c**1.5 * K**1.5 / math.pi**2 * z2
    )
    return i_p, rhs


def _tm_value(u):
    if u.kinetic > 1.0:
        u = _scaled_down(u, 1.0 / u.kinetic)
    arg = 2.0 * math.pi * u.values**2
    if float(np.max(arg)) > 700.0:
        raise _Skip("exponential argument out of floating range")
    return float(u.grid.w @ np.expm1(arg))


def _nb0_parts(u, c_cap):
    if u.mass > c_cap:
        u = _scaled_down(u, c_cap / u.mass)
    _need_positive(u.mass, u.kinetic)
    K = u.kinetic
    B = chern_simons(u)
    Q = u.quartic
    c = u.mass
    return u, K, B, Q, c


def _row_nb0_step1(c_cap):
    def row(u, ctx):
        u, K, B, Q, c = _nb0_parts(u, c_cap)
        return K + B - 2.0 * math.sqrt(K) * math.sqrt(B), K + B - 0.5 * Q

    return row


def _row_nb0_step2(c_cap):
    def row(u, ctx):
        u, K, B, Q, c = _nb0_parts(u, c_cap)
        return (1.0 - c / (4.0 * math.pi)) ** 2 * K, K + B - 2.0 * math.sqrt(K) * math.sqrt(B)

    return row


def _row_nb0_step3(c_cap):
    def row(u, ctx):
        u, K, B, Q, c = _nb0_parts(u, c_cap)
        return 0.25 * K, (1.0 - c / (4.0 * math.pi)) ** 2 * K

    return row


def _row_phi_envelope(c_cap):
    def row(u, ctx):
        factor = min(1.0, c_cap / u.mass if u.mass > 0.0 else 1.0,
                     (math.pi / 3.0) / u.kinetic if u.kinetic > 0.0 else 1.0)
        u = _scaled_down(u, factor)
        _need_positive(u.mass, u.kinetic)
        g, c4 = ctx["g"], ctx["c4"]
        K, c = u.kinetic, u.mass
        lhs = K * _constants.h_tilde(c, K, c4, g.norm_43)
        return lhs, energy(u, g).total

    return row


def verify_corpus(spec: CorpusSpec, c_cap: float = 2.0 * math.pi,
                  tolerances: dict | None = None,
                  grid: RadialGrid | None = None,
                  g: Perturbation | None = None,
                  c4: float | None = None) -> SuiteReport:
    """Evaluate every inequality row over the corpus and aggregate.

    c_cap bounds the mass used by the mass-constrained rows (capped by
    scaling); tolerances default to 1e-9 for algebraic rows and 1e-6 for
    quadrature-heavy ones.
    """
    if not 0.0 < c_cap <= 2.0 * math.pi:
        raise InvalidArgumentError("mass cap must lie in (0, 2 pi]")
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    if grid is None:
        grid = build_grid(12.0, 4096)
    if g is None:
        g = example_g()
    if c4 is None:
        c4 = _constants.gn_sharp_constant().c4
    ctx = {"g": g, "c4": c4}

    corpus = generate_corpus(spec, grid)

    rows = [
        ("gn_l4", _row_gn_l4, "quadrature"),
        ("radial_decay", _row_radial_decay, "quadrature"),
        ("cs_mass_quartic", _row_cs_mass_quartic, "quadrature"),
        ("quartic_vs_cs", _row_quartic_vs_cs, "quadrature"),
        ("cs_kinetic_mass", _row_cs_kinetic_mass, "quadrature"),
        ("u6_interp", _row_u2k(3), "quadrature"),
        ("u8_interp", _row_u2k(4), "quadrature"),
        ("exp_moment_f", _row_exp_moment_f, "quadrature"),
        ("exp_moment_p", _row_exp_moment_p, "quadrature"),
        ("nb0_step1", _row_nb0_step1(c_cap), "quadrature"),
        ("nb0_step2", _row_nb0_step2(c_cap), "quadrature"),
        ("nb0_step3", _row_nb0_step3(c_cap), "algebraic"),
        ("phi_envelope", _row_phi_envelope(c_cap), "quadrature"),
    ]

    records: list[InequalityRecord] = []
    n_pass = n_fail = n_skip = 0

    for row_id, fn, kind in rows:
        eps = tol[kind]
        for wid, u in corpus:
            try:
                lhs, rhs = fn(u, ctx)
            except _Skip as exc:
                records.append(InequalityRecord(
                    inequality_id=row_id, lhs=math.nan, rhs=math.nan,
                    slack=math.nan, passed=True, witness_id=wid,
                    skipped=True, reason=str(exc)))
                n_skip += 1
                continue
            slack = rhs - lhs
            ok = slack >= -eps * max(1.0, abs(rhs))
            records.append(InequalityRecord(
                inequality_id=row_id, lhs=lhs, rhs=rhs, slack=slack,
                passed=ok, witness_id=wid))
            n_pass += ok
            n_fail += not ok

    # Boundedness probe of the subcritical exponential moment: every value
    # is compared against the corpus maximum (the constant is not explicit).
    tm_vals = []
    for wid, u in corpus:
        try:
            tm_vals.append((wid, _tm_value(u)))
        except _Skip as exc:
            records.append(InequalityRecord(
                inequality_id="tm_bounded", lhs=math.nan, rhs=math.nan,
                slack=math.nan, passed=True, witness_id=wid,
                skipped=True, reason=str(exc)))
            n_skip += 1
    tm_max = max((v for _, v in tm_vals), default=0.0)
    for wid, v in tm_vals:
        slack = tm_max - v
        ok = slack >= -tol["algebraic"]
        records.append(InequalityRecord(
            inequality_id="tm_bounded", lhs=v, rhs=tm_max, slack=slack,
            passed=ok, witness_id=wid))
        n_pass += ok
        n_fail += not ok

    return SuiteReport(
        spec=spec, records=tuple(records), n_pass=n_pass, n_fail=n_fail,
        n_skip=n_skip, tolerances=tol, tm_empirical_max=tm_max,
        notes=(
            "series rows evaluated with kinetic capped at 0.9 pi; both "
            "right-hand sides blow up as kinetic approaches pi",
        ),
    )


# ---------------------------------------------------------------------------
# Energy envelope chain at fixed mass


def _to_sphere_cap(u: RadialFunction, c: float, s_cap: float) -> RadialFunction | None:
    """Scale to exact mass c, then squeeze kinetic under s_cap keeping mass."""
    if not u.mass > 0.0:
        return None
    u = u.with_values(u.values * math.sqrt(c / u.mass))
    for _ in range(4):
        if u.kinetic < s_cap:
            break
        t = math.sqrt(0.98 * s_cap / u.kinetic)
        u = dilate_mass_preserving(u, t)
        u = u.with_values(u.values * math.sqrt(c / u.mass))
    if not u.kinetic < s_cap or not u.kinetic > 0.0:
        return None
    return u


def verify_lemma32_chain(c: float, g: Perturbation, corpus, grid: RadialGrid,
                         constants_report=None) -> list[InequalityRecord]:
    """Phi(u) >= K h(c, K) over corpus functions moved onto the sphere
    S_c intersected with the kinetic ball of radius pi/3."""
    if not 0.0 < c <= 2.0 * math.pi:
        raise InvalidArgumentError("the envelope chain needs c in (0, 2 pi]")
    if constants_report is None:
        constants_report = _constants.thresholds(g, (c,))
    c4 = constants_report.c4
    records = []
    for wid, u in corpus:
        v = _to_sphere_cap(u, c, math.pi / 3.0)
        if v is None:
            records.append(InequalityRecord(
                inequality_id="phi_envelope_chain", lhs=math.nan, rhs=math.nan,
                slack=math.nan, passed=True, witness_id=wid, skipped=True,
                reason="cannot reach the kinetic ball by mass-preserving squeezing"))
            continue
        K = v.kinetic
        lhs = K * _constants.h_tilde(c, K, c4, g.norm_43)
        rhs = energy(v, g).total
        slack = rhs - lhs
        records.append(InequalityRecord(
            inequality_id="phi_envelope_chain", lhs=lhs, rhs=rhs, slack=slack,
            passed=slack >= -1e-6, witness_id=wid))
    return records


def boundary_probe(c: float, g: Perturbation, grid: RadialGrid,
                   constants_report=None) -> InequalityRecord:
    """A mass-c function with kinetic pinned at the ceiling s0; its energy
    must be strictly positive (the barrier separating the local well)."""
    from .minimizer import seed_function

    if constants_report is None:
        constants_report = _constants.thresholds(g, (c,))
    s0 = _constants.s_zero(c, constants_report.c4, constants_report.g_norm_43)
    u = seed_function(c, grid)
    for _ in range(60):
        K = u.kinetic
        if abs(K - s0) <= 1e-10 * s0:
            break
        u = dilate_mass_preserving(u, math.sqrt(s0 / K))
        u = u.with_values(u.values * math.sqrt(c / u.mass))
    phi = energy(u, g).total
    return InequalityRecord(
        inequality_id="boundary_positive", lhs=0.0, rhs=phi, slack=phi,
        passed=phi > 0.0, witness_id=f"seed-dilated-to-s0@c={c:.6g}")
