"""Batch command-line front end.

Three subcommands:

* ``check``: classify a parameter quadruple (existence, Lebesgue-index
  interval, regularity region with thresholds, decay cases).
* ``solve``: run the ground-state solver from a JSON config and write
  ``u.hfld``/``v.hfld``, ``profile.csv``, ``report.json`` and PNG figures
  into the output directory.
* ``sweep``: classify a rectangle of (p, q) values into ``regions.csv``
  (classification only, never a solve).

Exit codes: 0 success/converged, 1 solver did not converge, 2 refused on
critical/nonexistence parameters, 3 parameters outside the classification,
64 bad usage or invalid values, 66 missing input file.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .functional import StatePair
from .grid import Field, GridSpec, radial_profile, write_field
from .params import (
    EXISTS,
    NONEXIST_LOWER,
    NONEXIST_UPPER,
    OUTSIDE,
    ProblemParams,
    check_h1,
    classify_existence,
    classify_regularity,
    decay_case,
    theta_interval,
)
from .riesz import get_plan, riesz_apply
from .solver import GaussianInit, RandomInit, SolveConfig, solve

EX_OK = 0
EX_NOCONV = 1
EX_REFUSED = 2
EX_OUTSIDE = 3
EX_USAGE = 64
EX_NOINPUT = 66

DEFAULT_WINDOWS = [[0.35, 0.70], [0.30, 0.65], [0.40, 0.75]]


class ConfigError(ValueError):
    pass


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _require_keys(obj: dict, allowed: set[str], where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _parse_init(raw, where="solver.init"):
    if raw is None or raw == "gaussian":
        return GaussianInit()
    if raw == "random" or raw == "random_positive":
        return RandomInit()
    if isinstance(raw, dict):
        kind = raw.get("kind")
        if kind == "gaussian":
            _require_keys(raw, {"kind", "widths", "centers", "amplitudes"}, where)
            return GaussianInit(
                widths=tuple(float(w) for w in raw.get("widths", [1.0])),
                centers=tuple(
                    tuple(float(x) for x in c) for c in raw.get("centers", [])
                ),
                amplitudes=tuple(float(a) for a in raw.get("amplitudes", [1.0])),
            )
        if kind in ("random", "random_positive"):
            _require_keys(raw, {"kind", "n_bumps"}, where)
            return RandomInit(n_bumps=int(raw.get("n_bumps", 4)))
        raise ConfigError(f"{where}.kind must be 'gaussian' or 'random'")
    raise ConfigError(f"{where} must be 'gaussian', 'random' or an object")


def load_run_config(path: Path) -> dict:
    """Parse and validate the run-configuration document."""
    raw = json.loads(path.read_text())
    _require_keys(raw, {"params", "grid", "solver", "diagnostics", "output"}, "config")
    if "params" not in raw or "grid" not in raw:
        raise ConfigError("config requires 'params' and 'grid' sections")
    _require_keys(raw["params"], {"N", "alpha", "p", "q"}, "params")
    _require_keys(raw["grid"], {"L", "M"}, "grid")
    solver_raw = raw.get("solver", {})
    _require_keys(
        solver_raw,
        {"init", "seed", "step0", "tol", "max_iters", "symmetrize_every", "force"},
        "solver",
    )
    diag_raw = raw.get("diagnostics", {})
    _require_keys(diag_raw, {"windows"}, "diagnostics")
    out_raw = raw.get("output", {})
    _require_keys(out_raw, {"dir", "figures"}, "output")

    try:
        params = ProblemParams(
            N=int(raw["params"]["N"]),
            alpha=float(raw["params"]["alpha"]),
            p=float(raw["params"]["p"]),
            q=float(raw["params"]["q"]),
        )
        spec = GridSpec(
            N=int(raw["params"]["N"]),
            L=float(raw["grid"]["L"]),
            M=int(raw["grid"]["M"]),
        )
        cfg = SolveConfig(
            params=params,
            spec=spec,
            init=_parse_init(solver_raw.get("init")),
            seed=int(solver_raw.get("seed", 0)),
            step0=float(solver_raw.get("step0", 0.5)),
            tol_residual=float(solver_raw.get("tol", 1e-6)),
            max_iters=int(solver_raw.get("max_iters", 5000)),
            symmetrize_every=int(solver_raw.get("symmetrize_every", 10)),
            force=bool(solver_raw.get("force", False)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    windows = diag_raw.get("windows", DEFAULT_WINDOWS)
    for wdw in windows:
        if len(wdw) != 2 or not 0.0 <= wdw[0] < wdw[1] <= 1.0:
            raise ConfigError("diagnostics.windows entries must be [lo, hi] in (0,1]")
    return {
        "cfg": cfg,
        "windows": [tuple(float(x) for x in wdw) for wdw in windows],
        "outdir": out_raw.get("dir"),
        "figures": bool(out_raw.get("figures", True)),
        "echo": raw,
    }


def _existence_payload(params: ProblemParams) -> dict:
    ex = classify_existence(params)
    iv = theta_interval(params)
    payload = {
        "existence_class": ex.tag,
        "margins": {k: _finite_or_none(v) for k, v in asdict(ex.margins).items()},
        "theta_interval": {
            "lo": _finite_or_none(iv.lo),
            "hi": _finite_or_none(iv.hi),
            "theta1": iv.theta1,
            "theta2": iv.theta2,
        },
    }
    if ex.tag == EXISTS:
        reg = classify_regularity(params)
        dc = decay_case(params)
        payload["regularity"] = {
            "region": reg.region,
            "r_bar": reg.r_bar,
            "h_bar": reg.h_bar,
        }
        payload["decay"] = {
            "case_u": dc.case_u.case,
            "case_v": dc.case_v.case,
            "exponent_u": dc.case_u.exponent,
            "exponent_v": dc.case_v.exponent,
            "extra_ok": dc.extra_ok,
            "extra_threshold": dc.extra_threshold,
        }
    return payload


def cmd_check(args) -> int:
    try:
        params = ProblemParams(N=args.N, alpha=args.alpha, p=args.p, q=args.q)
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EX_USAGE
    payload = _existence_payload(params)
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(f"existence: {payload['existence_class']}")
        iv = payload["theta_interval"]
        if iv["theta1"] is not None:
            print(
                f"index interval for 1/theta1: ({iv['lo']:.6g}, {iv['hi']:.6g}); "
                f"canonical theta1={iv['theta1']:.6g}, theta2={iv['theta2']:.6g}"
            )
        else:
            print("index interval: empty")
        if "regularity" in payload:
            reg = payload["regularity"]
            print(
                f"regularity region {reg['region']}: thresholds "
                f"r_bar={reg['r_bar']:.9g}, h_bar={reg['h_bar']:.9g}"
            )
            dc = payload["decay"]
            print(
                f"decay: u {dc['case_u']}, v {dc['case_v']}"
                + (
                    ""
                    if dc["extra_ok"]
                    else " (extra smallness condition fails; decay not asserted)"
                )
            )
    tag = payload["existence_class"]
    if tag == EXISTS:
        return EX_OK
    if tag in (NONEXIST_LOWER, NONEXIST_UPPER):
        return EX_REFUSED
    return EX_OUTSIDE


def _profile_table(w: StatePair, params: ProblemParams) -> dict:
    spec = w.spec
    plan = get_plan(spec, params.alpha)
    center = np.unravel_index(int(np.argmax(np.abs(w.u.values))), spec.shape)
    conv_up = riesz_apply(plan, Field(spec, np.abs(w.u.values) ** params.p))
    conv_vq = riesz_apply(plan, Field(spec, np.abs(w.v.values) ** params.q))
    prof_u = radial_profile(w.u, center)
    prof_v = radial_profile(w.v, center)
    prof_up = radial_profile(conv_up, center)
    prof_vq = radial_profile(conv_vq, center)
    return {
        "r": prof_u.r.tolist(),
        "u_mean": prof_u.mean.tolist(),
        "v_mean": prof_v.mean.tolist(),
        "u_max": prof_u.max.tolist(),
        "v_max": prof_v.max.tolist(),
        # shell means of the smoothing of |v|^q (drives u) and |u|^p
        "Iav_mean": prof_vq.mean.tolist(),
        "Iau_mean": prof_up.mean.tolist(),
    }


def _fit_payload(fit: diag.DecayFit) -> dict:
    return {
        "component": fit.component,
        "case": fit.case,
        "window": list(fit.window),
        "n_bins": fit.n_bins,
        "fitted": fit.fitted,
        "predicted": fit.predicted,
        "r_squared": fit.r_squared,
        "limit_estimate": fit.limit_estimate,
        "limit_predicted": fit.limit_predicted,
        "theory_applicable": fit.theory_applicable,
    }


def _diagnostics_payload(w: StatePair, params: ProblemParams, windows) -> dict:
    payload = {
        "pohozaev_residual": diag.pohozaev_residual(w, params),
        "symmetry_deviation_u": diag.symmetry_deviation(w.u),
        "symmetry_deviation_v": diag.symmetry_deviation(w.v),
    }
    try:
        audit = diag.hls_audit(w, params)
        payload["hls"] = {
            "theta1": audit.theta1,
            "theta2": audit.theta2,
            "pair_ratio": audit.pair_ratio,
            "conv_ratio": audit.conv_ratio,
        }
    except ValueError as exc:
        payload["hls"] = {"error": str(exc)}
    fits = []
    for frac in windows:
        window = (frac[0] * w.spec.L, frac[1] * w.spec.L)
        try:
            fit_u, fit_v = diag.fit_decay(w, params, window=window)
            fits.append(
                {"window_fraction": list(frac), "u": _fit_payload(fit_u), "v": _fit_payload(fit_v)}
            )
        except ValueError as exc:
            fits.append({"window_fraction": list(frac), "error": str(exc)})
    payload["decay_fits"] = fits
    return payload


def cmd_solve(args) -> int:
    cfg_path = Path(args.config)
    if not cfg_path.exists():
        print(f"config not found: {cfg_path}", file=sys.stderr)
        return EX_NOINPUT
    try:
        loaded = load_run_config(cfg_path)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EX_USAGE

    cfg: SolveConfig = loaded["cfg"]
    tag = classify_existence(cfg.params).tag
    if tag != EXISTS and not cfg.force:
        print(
            f"refused: critical/nonexistence parameters ({tag}); "
            "set solver.force to override",
            file=sys.stderr,
        )
        return EX_REFUSED

    outdir = Path(args.out) if args.out else Path(loaded["outdir"] or "out")
    outdir.mkdir(parents=True, exist_ok=True)

    w, report = solve(cfg)

    write_field(outdir / "u.hfld", w.u)
    write_field(outdir / "v.hfld", w.v)

    profile = _profile_table(w, cfg.params)
    with open(outdir / "profile.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        cols = ["r", "u_mean", "v_mean", "u_max", "v_max", "Iav_mean", "Iau_mean"]
        writer.writerow(cols)
        for i in range(len(profile["r"])):
            writer.writerow([repr(profile[c][i]) for c in cols])

    payload = {
        "config": loaded["echo"],
        "converged": report.converged,
        "iterations": report.iterations,
        "wall_time_s": report.wall_time_s,
        "energy": {
            "e_norm_sq": report.final_energy.e_norm_sq,
            "d_interaction": report.final_energy.d_interaction,
            "energy_I": report.final_energy.energy_I,
            "nehari_P": report.final_energy.nehari_P,
            "c_level": report.c_level,
        },
        "history": {
            "I": report.history_I,
            "residual": report.history_residual,
            "t_scale": report.history_t,
        },
        "diagnostics": _diagnostics_payload(w, cfg.params, loaded["windows"]),
    }
    (outdir / "report.json").write_text(json.dumps(payload, indent=2))

    if loaded["figures"]:
        from .plots import render_solve_figures

        render_solve_figures(outdir, profile, payload)

    return EX_OK if report.converged else EX_NOCONV


def _parse_range(spec_str: str):
    # "p0:p1:n,q0:q1:m"
    try:
        p_part, q_part = spec_str.split(",")
        p0, p1, n = p_part.split(":")
        q0, q1, m = q_part.split(":")
        p0, p1, q0, q1 = float(p0), float(p1), float(q0), float(q1)
        n, m = int(n), int(m)
        if n < 1 or m < 1:
            raise ValueError("counts must be >= 1")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"malformed range spec {spec_str!r}: {exc}") from exc
    ps = np.linspace(p0, p1, n) if n > 1 else np.array([p0])
    qs = np.linspace(q0, q1, m) if m > 1 else np.array([q0])
    return ps, qs


def cmd_sweep(args) -> int:
    cfg_path = Path(args.config)
    if not cfg_path.exists():
        print(f"config not found: {cfg_path}", file=sys.stderr)
        return EX_NOINPUT
    try:
        raw = json.loads(cfg_path.read_text())
        base_n = int(raw["params"]["N"])
        base_alpha = float(raw["params"]["alpha"])
        ps, qs = _parse_range(args.grid_pq)
    except (ConfigError, KeyError, json.JSONDecodeError, ValueError) as exc:
        print(f"invalid sweep request: {exc}", file=sys.stderr)
        return EX_USAGE

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "regions.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "p",
                "q",
                "existence_class",
                "regularity_region",
                "r_bar",
                "h_bar",
                "decay_case_u",
                "decay_case_v",
            ]
        )
        for p in ps:
            for q in qs:
                try:
                    params = ProblemParams(base_n, base_alpha, float(p), float(q))
                except ValueError:
                    writer.writerow([repr(float(p)), repr(float(q)), "Invalid",
                                     "", "", "", "", ""])
                    continue
                tag = classify_existence(params).tag
                if tag == EXISTS:
                    reg = classify_regularity(params)
                    dc = decay_case(params)
                    writer.writerow(
                        [
                            repr(float(p)),
                            repr(float(q)),
                            tag,
                            reg.region,
                            repr(reg.r_bar),
                            repr(reg.h_bar),
                            dc.case_u.case,
                            dc.case_v.case,
                        ]
                    )
                else:
                    writer.writerow(
                        [repr(float(p)), repr(float(q)), tag, "", "", "", "", ""]
                    )
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hartreepair",
        description="Ground states and diagnostics for coupled Hartree pairs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="classify a parameter quadruple")
    p_check.add_argument("--N", type=int, required=True, help="dimension (1, 2 or 3)")
    p_check.add_argument("--alpha", type=float, required=True, help="kernel order in (0, N)")
    p_check.add_argument("--p", type=float, required=True, help="first exponent (> 1)")
    p_check.add_argument("--q", type=float, required=True, help="second exponent (> 1)")
    p_check.add_argument("--json", action="store_true", help="machine-readable output")
    p_check.set_defaults(func=cmd_check)

    p_solve = sub.add_parser("solve", help="compute a ground state from a config")
    p_solve.add_argument("--config", required=True, help="run configuration JSON")
    p_solve.add_argument("--out", default=None, help="output directory (overrides config)")
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="classify a (p, q) rectangle to CSV")
    p_sweep.add_argument("--config", required=True, help="base configuration JSON")
    p_sweep.add_argument(
        "--grid-pq",
        required=True,
        dest="grid_pq",
        help="range spec 'p0:p1:n,q0:q1:m'",
    )
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to the documented code
        return EX_USAGE if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
