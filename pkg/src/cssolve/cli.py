"""Command-line entry point: constants, verification, minimization, saddle.

Subcommands
    constants   thresholds and per-mass diagnostics as JSON
    verify      inequality corpus suite (JSON + CSV records)
    minimize    local minimizer at mass c (JSON + profile CSV)
    mpass       concentration-path gap table and string-method saddle
    full        all of the above plus the ordering summary
                m(c) < 0 < kappa_c <= M_estimate < m(c) + 2 pi

Every run echoes its parsed configuration in a canonical key=value form
that is byte-identical across reruns, and all artifacts are
deterministic: no wall-clock, no hostnames, floats at full precision.

Exit codes: 0 success, 1 suite or criterion failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields

from . import constants as _constants
from . import inequality_suite as _ineq
from . import minimizer as _minimizer
from . import mountain_pass as _mpass
from .errors import AdmissibilityError, InvalidArgumentError, OutOfRegimeError
from .perturbation import example_g, load_perturbation_csv
from .radial_core import build_grid, save_csv

__all__ = ["RunConfig", "run", "main"]

_OUT_ENV = "CSSOLVE_OUT"


@dataclass
class RunConfig:
    mode: str = "constants"
    c: float | None = None
    c_frac: float | None = None
    g: str = "example"
    g_scale: float = 1.0
    grid_rmax: float = 12.0
    grid_n: int = 4096
    seed: int = 20260819
    tol: float = 1e-6
    n: float = 1000.0
    images: int = 33
    count: int = 200
    out: str | None = None

    def canonical_text(self) -> str:
        lines = []
        for f in sorted(fld.name for fld in fields(self)):
            v = getattr(self, f)
            if v is None:
                s = "none"
            elif isinstance(v, float):
                s = format(v, ".17g")
            else:
                s = str(v)
            lines.append(f"{f}={s}")
        return "\n".join(lines) + "\n"

    def out_dir(self) -> str:
        return self.out or os.environ.get(_OUT_ENV) or "out"


def _load_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidArgumentError(f"bad config line {raw.strip()!r}")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    return values


_FLOAT_KEYS = {"c", "c_frac", "g_scale", "tol", "n"}
_INT_KEYS = {"seed", "images", "count", "grid_n"}


def _apply_kv(cfg: RunConfig, key: str, val: str) -> None:
    key = key.replace("-", "_")
    if key == "grid":
        rmax, n = val.split(",")
        cfg.grid_rmax = float(rmax)
        cfg.grid_n = int(n)
        return
    if not hasattr(cfg, key):
        raise InvalidArgumentError(f"unknown config key {key!r}")
    if key in _FLOAT_KEYS:
        setattr(cfg, key, float(val))
    elif key in _INT_KEYS:
        setattr(cfg, key, int(val))
    elif key == "grid_rmax":
        cfg.grid_rmax = float(val)
    else:
        setattr(cfg, key, val)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cssolve",
        description="normalized solutions of a gauged planar Schrödinger model",
    )
    sub = p.add_subparsers(dest="mode", required=True)
    for mode in ("constants", "verify", "minimize", "mpass", "full"):
        sp = sub.add_parser(mode)
        sp.add_argument("--config", help="key=value file; flags override it")
        sp.add_argument("--c", type=float, help="mass constraint (absolute)")
        sp.add_argument("--c-frac", type=float, dest="c_frac",
                        help="mass as a fraction of the threshold c0")
        sp.add_argument("--g", default=None,
                        help="perturbation: 'example' or a CSV path")
        sp.add_argument("--g-scale", type=float, dest="g_scale", default=None,
                        help="multiply the perturbation by this factor")
        sp.add_argument("--grid", default=None, help="R_max,N")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--n", type=float, default=None,
                        help="concentration index for mpass")
        sp.add_argument("--images", type=int, default=None)
        sp.add_argument("--count", type=int, default=None,
                        help="corpus size for verify")
        sp.add_argument("--out", default=None, help="output directory")
    return p


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(mode=args.mode)
    if args.config:
        for key, val in _load_config_file(args.config).items():
            _apply_kv(cfg, key, val)
    for key in ("c", "c_frac", "g", "g_scale", "seed", "tol", "n",
                "images", "count", "out"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if args.grid is not None:
        _apply_kv(cfg, "grid", args.grid)
    return cfg


def _json_dump(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve(cfg: RunConfig):
    """Perturbation, grid, constants report and absolute mass for the run."""
    if cfg.g == "example":
        g = example_g()
    else:
        g = load_perturbation_csv(cfg.g)
    if cfg.g_scale != 1.0:
        g = g.scaled(cfg.g_scale)
    grid = build_grid(cfg.grid_rmax, cfg.grid_n)
    if cfg.c is not None and cfg.c_frac is not None:
        raise InvalidArgumentError("give either c or c_frac, not both")
    base = _constants.thresholds(g, ())
    if cfg.c is not None:
        c = cfg.c
    else:
        frac = cfg.c_frac if cfg.c_frac is not None else 0.5
        c = frac * base.c0
    report = _constants.thresholds(g, (c,), c4=base.c4)
    return g, grid, report, c


def _run_constants(cfg: RunConfig, out: str) -> int:
    g, grid, report, c = _resolve(cfg)
    _json_dump(report.to_json_dict(), os.path.join(out, "constants.json"))
    print(f"c0 = {report.c0:.17g} (c1 = {report.c1:.17g}, c2 = {report.c2:.17g})")
    print(f"run mass c = {c:.17g}")
    return 0


def _run_verify(cfg: RunConfig, out: str) -> int:
    g, grid, report, c = _resolve(cfg)
    spec = _ineq.CorpusSpec(family="mixed", count=cfg.count, seed=cfg.seed)
    suite = _ineq.verify_corpus(spec, grid=grid, g=g, c4=report.c4)
    _json_dump(suite.to_json_dict(), os.path.join(out, "verify.json"))
    suite.write_csv(os.path.join(out, "verify_records.csv"))
    print(f"inequality suite: {suite.n_pass} pass, {suite.n_fail} fail, "
          f"{suite.n_skip} skipped")
    return 0 if suite.passed else 1


def _minimize_report(cfg: RunConfig, g, grid, report, c):
    opts = _minimizer.SolverOptions(tol=cfg.tol)
    return _minimizer.minimize_local(c, g, grid, options=opts,
                                     constants_report=report)


def _write_minimize_artifacts(rep, out: str) -> None:
    flat = {
        "phi": rep.energy.total,
        "lambda": rep.lam,
        "pohozaev": rep.pohozaev.value,
        "kinetic": rep.kinetic,
        "mass": rep.mass,
        "converged": rep.converged,
        "detail": rep.to_json_dict(),
    }
    _json_dump(flat, os.path.join(out, "minimize.json"))
    save_csv(rep.u, os.path.join(out, "minimizer_profile.csv"))


def _run_minimize(cfg: RunConfig, out: str) -> int:
    g, grid, report, c = _resolve(cfg)
    rep = _minimize_report(cfg, g, grid, report, c)
    _write_minimize_artifacts(rep, out)
    print(f"phi = {rep.energy.total:.17g}, lambda = {rep.lam:.17g}, "
          f"converged = {rep.converged}")
    return 0 if rep.converged else 1


def _saddle_criteria(string) -> tuple[bool, bool, bool]:
    """(window, lambda > 0, |P| <= 1e-3 (1 + kinetic)) for a string report.

    The climbing stage's residual tolerance is a stop rule, not a success
    criterion; these three are what the saddle search is for.
    """
    window_ok = (string.kappa_lower <= string.M_estimate
                 < string.m_level + 2.0 * math.pi)
    lam_ok = string.saddle.lam > 0.0
    p_ok = (abs(string.saddle.pohozaev.value)
            <= 1e-3 * (1.0 + string.saddle.kinetic))
    return window_ok, lam_ok, p_ok


def _gap_table(u_c, g, c, out: str):
    rows = []
    for n in (100.0, 1000.0, 10000.0):
        prof = _mpass.path_energy_profile(u_c, g, n, t_max=4.0, samples=48, c=c)
        rows.append((n, prof.sup, prof.gap, prof.t_hat, prof.extended))
    with open(os.path.join(out, "gap_table.csv"), "w", newline="") as fh:
        import csv as _csv

        w = _csv.writer(fh)
        w.writerow(["n", "sup", "gap", "t_hat", "extended"])
        for n, sup, gap, t_hat, ext in rows:
            w.writerow([format(n, ".17g"), format(sup, ".17g"),
                        format(gap, ".17g"),
                        "" if t_hat is None else format(t_hat, ".17g"), ext])
    return rows


def _write_profile_table(u_c, g, n, c, out: str) -> None:
    prof = _mpass.path_energy_profile(u_c, g, n, t_max=4.0, samples=48, c=c)
    with open(os.path.join(out, "profile_table.csv"), "w", newline="") as fh:
        import csv as _csv

        w = _csv.writer(fh)
        w.writerow(["t", "phi", "tau"])
        for t, phi, tau in zip(prof.t_samples, prof.phi, prof.tau):
            w.writerow([format(t, ".17g"), format(phi, ".17g"),
                        format(tau, ".17g")])


def _write_path_dir(state, out: str) -> None:
    path_dir = os.path.join(out, "path")
    os.makedirs(path_dir, exist_ok=True)
    for i, u in enumerate(state.images):
        save_csv(u, os.path.join(path_dir, f"image_{i:03d}.csv"))
    _json_dump(state.to_json_dict(), os.path.join(path_dir, "path_state.json"))


def _run_mpass(cfg: RunConfig, out: str) -> int:
    g, grid, report, c = _resolve(cfg)
    rep = _minimize_report(cfg, g, grid, report, c)
    _write_minimize_artifacts(rep, out)
    _gap_table(rep.u, g, c, out)
    _write_profile_table(rep.u, g, cfg.n, c, out)
    try:
        init = _mpass.build_initial_path(rep.u, g, n=cfg.n, images=cfg.images, c=c)
    except AdmissibilityError as exc:
        msg = (f"saddle search blocked: {exc}")
        with open(os.path.join(out, "mpass_blocked.txt"), "w") as fh:
            fh.write(msg + "\n")
        print(msg)
        return 1
    _json_dump(init.to_json_dict(), os.path.join(out, "path_initial.json"))
    string = _mpass.string_method(init, c, g, constants_report=report)
    _json_dump(string.to_json_dict(), os.path.join(out, "string.json"))
    _write_path_dir(string.relaxed, out)
    window_ok, lam_ok, p_ok = _saddle_criteria(string)
    print(f"M_estimate = {string.M_estimate:.17g}, "
          f"kappa = {string.kappa_lower:.17g}")
    print(f"window = {window_ok}, lambda_positive = {lam_ok}, "
          f"pohozaev_small = {p_ok}, residual_converged = {string.converged}")
    return 0 if (window_ok and lam_ok and p_ok) else 1


def _run_full(cfg: RunConfig, out: str) -> int:
    g, grid, report, c = _resolve(cfg)
    _json_dump(report.to_json_dict(), os.path.join(out, "constants.json"))

    spec = _ineq.CorpusSpec(family="mixed", count=cfg.count, seed=cfg.seed)
    suite = _ineq.verify_corpus(spec, grid=grid, g=g, c4=report.c4)
    _json_dump(suite.to_json_dict(), os.path.join(out, "verify.json"))
    suite.write_csv(os.path.join(out, "verify_records.csv"))

    rep = _minimize_report(cfg, g, grid, report, c)
    _write_minimize_artifacts(rep, out)
    _gap_table(rep.u, g, c, out)
    _write_profile_table(rep.u, g, cfg.n, c, out)

    kappa = _constants.kappa_lower_bound(c, report.c4, report.g_norm_43)
    m = rep.energy.total
    summary = {
        "c": c,
        "c0": report.c0,
        "m": m,
        "kappa": kappa,
        "m_plus_2pi": m + 2.0 * math.pi,
        "suite_passed": suite.passed,
        "minimizer_converged": rep.converged,
    }
    blocked_reason = None
    M_est = None
    saddle_ok = False
    try:
        init = _mpass.build_initial_path(rep.u, g, n=cfg.n, images=cfg.images, c=c)
        string = _mpass.string_method(init, c, g, constants_report=report)
        _json_dump(string.to_json_dict(), os.path.join(out, "string.json"))
        _write_path_dir(string.relaxed, out)
        M_est = string.M_estimate
        window_ok, lam_ok, p_ok = _saddle_criteria(string)
        saddle_ok = lam_ok and p_ok
        summary["saddle_lambda_positive"] = lam_ok
        summary["saddle_pohozaev_small"] = p_ok
    except AdmissibilityError as exc:
        blocked_reason = str(exc)
        with open(os.path.join(out, "mpass_blocked.txt"), "w") as fh:
            fh.write(blocked_reason + "\n")

    summary["M_estimate"] = M_est
    summary["blocked_reason"] = blocked_reason
    ordering_ok = (
        M_est is not None
        and m < 0.0 < kappa <= M_est < m + 2.0 * math.pi
    )
    summary["ordering_ok"] = bool(ordering_ok)
    _json_dump(summary, os.path.join(out, "summary.json"))

    if M_est is None:
        print(f"ordering chain blocked: {blocked_reason}")
    else:
        print(f"ordering: m = {m:.9g} < 0 < kappa = {kappa:.9g} "
              f"<= M = {M_est:.9g} < m + 2pi = {m + 2 * math.pi:.9g} : "
              f"{'ok' if ordering_ok else 'VIOLATED'}")
    return 0 if (suite.passed and rep.converged and ordering_ok and saddle_ok) else 1


def run(cfg: RunConfig) -> int:
    out = cfg.out_dir()
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.txt"), "w") as fh:
        fh.write(cfg.canonical_text())
    dispatch = {
        "constants": _run_constants,
        "verify": _run_verify,
        "minimize": _run_minimize,
        "mpass": _run_mpass,
        "full": _run_full,
    }
    return dispatch[cfg.mode](cfg, out)


def main(argv=None) -> None:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        code = run(cfg)
    except (InvalidArgumentError, OutOfRegimeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
    sys.exit(code)


if __name__ == "__main__":
    main()
